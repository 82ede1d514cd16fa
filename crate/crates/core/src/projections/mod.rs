//! Projections of a (generally unphysical) Hermitian estimate onto physical sets.
//!
//! * [`project_simplex_state`]: nearest density matrix (eigenvalues onto the simplex).
//! * [`lr_pcs`]: rank-r truncation followed by the simplex projection.
//! * [`mpo_pcs`]: TT-SVD truncation, Hermitization, then the simplex projection.

pub(crate) mod tt;

pub use tt::{tt_svd, BondControl, TruncationReport};

use crate::error::{PcsError, Result};
use crate::numerics::{hermitian_eig, symmetrize, ComplexMatrix, Complex64};
use crate::states::{dim_to_qubits, DensityMatrix};

/// Euclidean projection onto `{w ≥ 0, Σw = 1}` by waterfilling:
/// `w_i = max(v_i − τ, 0)`.
pub fn project_simplex_vector(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(PcsError::invalid("simplex projection of an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(PcsError::NumericIntegrity(
            "simplex projection of a non-finite vector".into(),
        ));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|x| (x - tau).max(0.0)).collect();
    // Absorb rounding in the largest entry so the sum is 1 and nothing goes negative.
    let total: f64 = w.iter().sum();
    let top = (0..w.len())
        .max_by(|&a, &b| w[a].total_cmp(&w[b]))
        .expect("non-empty");
    w[top] += 1.0 - total;
    Ok(w)
}

/// Frobenius-nearest density matrix to a Hermitian `H`.
pub fn project_simplex_state(h: &ComplexMatrix) -> Result<DensityMatrix> {
    let n = dim_to_qubits(h)?;
    let eig = hermitian_eig(h)?;
    let weights = project_simplex_vector(&eig.eigenvalues)?;
    Ok(DensityMatrix::from_trusted(n, eig.reassemble(&weights)))
}

fn check_rank(h: &ComplexMatrix, rank: usize) -> Result<()> {
    if rank == 0 || rank > h.nrows() {
        return Err(PcsError::invalid(format!(
            "rank {rank} outside 1..={}",
            h.nrows()
        )));
    }
    Ok(())
}

/// Keeps the `rank` algebraically largest eigenvalues of `H` and zeros the rest.
pub fn project_rank(h: &ComplexMatrix, rank: usize) -> Result<ComplexMatrix> {
    check_rank(h, rank)?;
    let eig = hermitian_eig(h)?;
    let mut weights = eig.eigenvalues.clone();
    for w in weights.iter_mut().skip(rank) {
        *w = 0.0;
    }
    Ok(eig.reassemble(&weights))
}

/// Rank-r truncation followed by the simplex projection. The simplex step acts
/// on the retained eigenvalues only, so the result has rank at most `rank`;
/// for `rank = dim` it coincides with [`project_simplex_state`].
pub fn lr_pcs(h: &ComplexMatrix, rank: usize) -> Result<DensityMatrix> {
    let n = dim_to_qubits(h)?;
    check_rank(h, rank)?;
    let eig = hermitian_eig(h)?;
    let mut weights = project_simplex_vector(&eig.eigenvalues[..rank])?;
    weights.resize(eig.eigenvalues.len(), 0.0);
    Ok(DensityMatrix::from_trusted(n, eig.reassemble(&weights)))
}

/// Options for [`mpo_pcs`].
#[derive(Debug, Clone, PartialEq)]
pub struct MpoPcsOptions {
    pub bonds: BondControl,
    /// Hermitize before the TT-SVD instead of after it.
    pub hermitize_first: bool,
}

impl MpoPcsOptions {
    pub fn new(bonds: BondControl) -> Self {
        Self {
            bonds,
            hermitize_first: false,
        }
    }
}

/// TT-SVD truncation, contraction, Hermitization and simplex projection.
/// The output's own bond dimension is not constrained.
pub fn mpo_pcs(h: &ComplexMatrix, n: usize, options: &MpoPcsOptions) -> Result<DensityMatrix> {
    let input = if options.hermitize_first {
        hermitize(h)?
    } else {
        h.clone()
    };
    let (mpo, _) = tt_svd(&input, n, &options.bonds)?;
    let truncated = hermitize(&mpo.to_dense()?)?;
    project_simplex_state(&truncated)
}

/// `H + ((1 − trace H)/dim)·I`, the nearest unit-trace matrix.
pub fn project_trace(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(PcsError::invalid("project_trace needs a non-empty square matrix"));
    }
    let dim = h.nrows();
    let shift = (Complex64::new(1.0, 0.0) - h.trace()) / dim as f64;
    let mut out = h.clone();
    for i in 0..dim {
        out[(i, i)] += shift;
    }
    Ok(out)
}

/// `(B + B†)/2`.
pub fn hermitize(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !b.is_square() {
        return Err(PcsError::invalid("hermitize needs a square matrix"));
    }
    let mut out = b.clone();
    symmetrize(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ComplexVector, RngStream, ONE, ZERO};

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            values.len(),
            values.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn simplex_vector_examples() {
        assert_close(&project_simplex_vector(&[0.3, 0.7]).unwrap(), &[0.3, 0.7], 1e-15);
        assert_close(
            &project_simplex_vector(&[0.6, 0.6, -0.2]).unwrap(),
            &[0.5, 0.5, 0.0],
            1e-15,
        );
        assert_close(&project_simplex_vector(&[5.0, 1.0]).unwrap(), &[1.0, 0.0], 1e-15);
        assert!(project_simplex_vector(&[]).is_err());
    }

    #[test]
    fn simplex_vector_sums_to_one() {
        let mut rng = RngStream::new(3);
        for _ in 0..500 {
            let v: Vec<f64> = (0..7).map(|_| 3.0 * rng.normal()).collect();
            let w = project_simplex_vector(&v).unwrap();
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn simplex_state_examples() {
        let rho = project_simplex_state(&diag(&[0.6, 0.6, -0.2, 0.0])).unwrap();
        assert!((rho.matrix() - diag(&[0.5, 0.5, 0.0, 0.0])).norm() < 1e-12);

        let mut rng = RngStream::new(1);
        let truth = crate::states::random_lowrank_state(3, 3, &mut rng).unwrap();
        let again = project_simplex_state(truth.matrix()).unwrap();
        assert!((again.matrix() - truth.matrix()).norm() <= 1e-10);
    }

    #[test]
    fn rank_projection_examples() {
        let h = diag(&[0.5, 0.3, 0.2]);
        // A 3x3 matrix is fine for the spectral projection itself.
        assert!((project_rank(&h, 3).unwrap() - &h).norm() < 1e-14);
        assert!((project_rank(&h, 2).unwrap() - diag(&[0.5, 0.3, 0.0])).norm() < 1e-14);
        assert!(project_rank(&h, 0).is_err());
        assert!(project_rank(&h, 4).is_err());
    }

    #[test]
    fn lr_pcs_examples() {
        let rho = lr_pcs(&diag(&[0.7, 0.2, 0.1, 0.0]), 2).unwrap();
        assert!((rho.matrix() - diag(&[0.75, 0.25, 0.0, 0.0])).norm() < 1e-12);

        let mut rng = RngStream::new(2);
        let truth = crate::states::random_lowrank_state(3, 2, &mut rng).unwrap();
        let again = lr_pcs(truth.matrix(), 2).unwrap();
        assert!((again.matrix() - truth.matrix()).norm() <= 1e-10);
    }

    #[test]
    fn lr_pcs_full_rank_is_simplex() {
        let mut rng = RngStream::new(5);
        let g = ComplexMatrix::from_fn(8, 8, |_, _| rng.complex_normal());
        let h = project_trace(&hermitize(&g).unwrap()).unwrap();
        let a = lr_pcs(&h, 8).unwrap();
        let b = project_simplex_state(&h).unwrap();
        assert!((a.matrix() - b.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn trace_projection_examples() {
        let rho = diag(&[0.25, 0.75]);
        assert!((project_trace(&rho).unwrap() - &rho).norm() < 1e-15);
        let zero = ComplexMatrix::zeros(2, 2);
        assert!((project_trace(&zero).unwrap() - diag(&[0.5, 0.5])).norm() < 1e-15);
        assert!((project_trace(&diag(&[2.0, 0.0])).unwrap() - diag(&[1.5, -0.5])).norm() < 1e-15);
    }

    #[test]
    fn hermitize_examples() {
        let b = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let half = Complex64::new(0.5, 0.0);
        let expected = ComplexMatrix::from_row_slice(2, 2, &[ZERO, half, half, ZERO]);
        assert_eq!(hermitize(&b).unwrap(), expected);
        assert_eq!(hermitize(&expected).unwrap(), expected);
    }

    #[test]
    fn mpo_pcs_fixed_point() {
        let mut rng = RngStream::new(9);
        let (_, m) = crate::states::random_mps_state(4, 2, &mut rng).unwrap();
        let truth = m.to_dense().unwrap();
        let out = mpo_pcs(&truth, 4, &MpoPcsOptions::new(BondControl::Cap(4))).unwrap();
        assert!((out.matrix() - &truth).norm() <= 1e-9);
        let mut flipped = MpoPcsOptions::new(BondControl::Cap(4));
        flipped.hermitize_first = true;
        let out = mpo_pcs(&truth, 4, &flipped).unwrap();
        assert!((out.matrix() - &truth).norm() <= 1e-9);
    }
}
