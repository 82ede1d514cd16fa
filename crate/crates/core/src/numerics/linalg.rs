use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::svd::{self as faer_svd_mod, ComputeSvdVectors};
use faer::diag::Diag;
use faer::{Mat, Par};
use nalgebra::SymmetricEigen;

use crate::error::{PcsError, Result};

use super::{ComplexMatrix, ComplexVector, Complex64, TOLERANCES};

const MAX_SWEEPS: usize = 0; // nalgebra: 0 means iterate until convergence

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// `x y†`.
pub fn outer(x: &ComplexVector, y: &ComplexVector) -> ComplexMatrix {
    x * y.adjoint()
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A − A†|`.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let n = a.nrows().min(a.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U†U − I|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

fn require_hermitian(h: &ComplexMatrix, context: &str) -> Result<()> {
    if !h.is_square() {
        return Err(PcsError::invalid(format!(
            "{context}: matrix is {}x{}, expected square",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(PcsError::NumericIntegrity(format!(
            "{context}: non-finite entry"
        )));
    }
    let defect = hermiticity_defect(h);
    let scale = h.norm();
    if defect > TOLERANCES.hermitian_input * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(PcsError::invalid(format!(
            "{context}: Hermiticity defect {defect:.3e} exceeds {:.0e}·‖H‖_F",
            TOLERANCES.hermitian_input
        )));
    }
    Ok(())
}

/// Spectrum sorted descending with paired eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V·diag(f(λ))·V†` restricted to the columns where `f(λ) != 0`.
    pub fn reassemble(&self, weights: &[f64]) -> ComplexMatrix {
        let dim = self.eigenvectors.nrows();
        let keep: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] != 0.0).collect();
        if keep.is_empty() {
            return ComplexMatrix::zeros(dim, dim);
        }
        let v = self.eigenvectors.select_columns(&keep);
        let mut scaled = v.clone();
        for (c, &k) in keep.iter().enumerate() {
            let w = weights[k];
            for x in scaled.column_mut(c).iter_mut() {
                *x *= w;
            }
        }
        let mut out = scaled * v.adjoint();
        symmetrize(&mut out);
        out
    }
}

pub fn symmetrize(a: &mut ComplexMatrix) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
/// Ties keep nalgebra's order (stable sort).
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    require_hermitian(h, "hermitian_eig")?;
    let mut sym = h.clone();
    symmetrize(&mut sym);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| PcsError::Decomposition("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = eig.eigenvectors.select_columns(&order);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Thin SVD with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_adjoint: ComplexMatrix,
}

impl FullSvd {
    /// Keeps the leading `k` triplets; returns them with the discarded energy `Σ_{i≥k} σ_i²`.
    pub fn truncate(self, k: usize) -> TruncatedSvd {
        let k = k.min(self.singular_values.len());
        let discarded_energy = self.singular_values[k..].iter().map(|s| s * s).sum();
        TruncatedSvd {
            u: self.u.columns(0, k).into_owned(),
            singular_values: self.singular_values[..k].to_vec(),
            v_adjoint: self.v_adjoint.rows(0, k).into_owned(),
            discarded_energy,
        }
    }

    /// Tail energies: `tail[k] = Σ_{i≥k} σ_i²`, length `len + 1`.
    pub fn tail_energies(&self) -> Vec<f64> {
        let mut tail = vec![0.0; self.singular_values.len() + 1];
        for i in (0..self.singular_values.len()).rev() {
            tail[i] = tail[i + 1] + self.singular_values[i] * self.singular_values[i];
        }
        tail
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_adjoint: ComplexMatrix,
    /// Sum of squared discarded singular values.
    pub discarded_energy: f64,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (c, s) in self.singular_values.iter().enumerate() {
            for x in us.column_mut(c).iter_mut() {
                *x *= *s;
            }
        }
        us * &self.v_adjoint
    }
}

/// Runs faer's sequential SVD; nalgebra's complex SVD returns wrong factors
/// on some rank-deficient inputs, which TT-SVD unfoldings routinely are.
fn faer_svd(a: &ComplexMatrix, vectors: bool) -> Result<(Vec<f64>, Option<(ComplexMatrix, ComplexMatrix)>)> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(PcsError::NumericIntegrity("svd: non-finite entry".into()));
    }
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        let empty = vectors.then(|| (ComplexMatrix::zeros(m, 0), ComplexMatrix::zeros(0, n)));
        return Ok((Vec::new(), empty));
    }
    let fa = Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)]);
    let mut s = Diag::<Complex64>::zeros(k);
    let mut u = Mat::<Complex64>::zeros(m, if vectors { k } else { 0 });
    let mut v = Mat::<Complex64>::zeros(n, if vectors { k } else { 0 });
    let mode = if vectors {
        ComputeSvdVectors::Thin
    } else {
        ComputeSvdVectors::No
    };
    let mut buf = MemBuffer::new(faer_svd_mod::svd_scratch::<Complex64>(
        m,
        n,
        mode,
        mode,
        Par::Seq,
        Default::default(),
    ));
    faer_svd_mod::svd(
        fa.as_ref(),
        s.as_mut(),
        vectors.then(|| u.as_mut()),
        vectors.then(|| v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|_| PcsError::Decomposition("SVD did not converge".into()))?;
    let sv = (0..k).map(|i| s[i].re).collect();
    let factors = vectors.then(|| {
        (
            ComplexMatrix::from_fn(m, k, |i, j| u[(i, j)]),
            ComplexMatrix::from_fn(k, n, |i, j| v[(j, i)].conj()),
        )
    });
    Ok((sv, factors))
}

/// Thin SVD, singular values descending.
pub fn svd_descending(a: &ComplexMatrix) -> Result<FullSvd> {
    let (singular_values, factors) = faer_svd(a, true)?;
    let (u, v_adjoint) = factors.expect("vectors requested");
    Ok(FullSvd {
        u,
        singular_values,
        v_adjoint,
    })
}

/// Leading `min(max_rank, rank)` singular triplets, where rank is numerical
/// (σ > σ₁·max(m, n)·ε); `discarded_energy` counts everything dropped.
pub fn truncated_svd(a: &ComplexMatrix, max_rank: usize) -> Result<TruncatedSvd> {
    if max_rank == 0 {
        return Err(PcsError::invalid("truncated_svd: max_rank must be >= 1"));
    }
    let full = svd_descending(a)?;
    let cutoff = full.singular_values.first().copied().unwrap_or(0.0)
        * a.nrows().max(a.ncols()) as f64
        * f64::EPSILON;
    let rank = full
        .singular_values
        .iter()
        .filter(|&&s| s > cutoff)
        .count()
        .max(1);
    Ok(full.truncate(max_rank.min(rank)))
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(faer_svd(a, false)?.0)
}

/// `exp(scale·H) = V·diag(exp(scale·λ))·V†` for Hermitian `H`.
pub fn expm_hermitian(h: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let worst = eig
        .eigenvalues
        .iter()
        .map(|l| scale * l)
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > TOLERANCES.exp_limit {
        return Err(PcsError::Range(format!(
            "expm_hermitian: exponent {worst:.3e} exceeds {}",
            TOLERANCES.exp_limit
        )));
    }
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|l| (scale * l).exp()).collect();
    Ok(eig.reassemble(&weights))
}
