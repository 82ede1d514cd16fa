use crate::error::{PcsError, Result};

use super::{ComplexMatrix, ComplexVector, Complex64, RngStream, ONE, ZERO};

/// Dense Haar-random unitary: QR of a complex Ginibre matrix with the
/// diagonal phase correction `U = Q·diag(R_kk/|R_kk|)`.
pub fn haar_unitary(dim: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(PcsError::invalid("haar_unitary: dim must be >= 1"));
    }
    let ginibre = ComplexMatrix::from_fn(dim, dim, |_, _| rng.complex_normal());
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let norm = rkk.norm();
        let phase = if norm > 0.0 { rkk / norm } else { ONE };
        for x in q.column_mut(k).iter_mut() {
            *x *= phase;
        }
    }
    Ok(q)
}

/// Haar unitary held as Householder reflectors plus a diagonal phase,
/// `U = H_0 H_1 ⋯ H_{d-1} · diag(phase)`, where `H_k` acts on coordinates `k..d`.
///
/// Reflector `k` is built from a fresh complex Gaussian vector of length
/// `d - k`. After the first reflector of a Ginibre QR is applied, the trailing
/// columns are again i.i.d. Gaussian and independent of it, so this has the same
/// law as the dense Ginibre QR while costing O(d²) to sample and to apply.
#[derive(Debug, Clone)]
pub struct HaarFactors {
    dim: usize,
    /// Unit Householder vectors, concatenated; vector `k` has length `dim - k`.
    reflectors: Vec<Complex64>,
    offsets: Vec<usize>,
    phases: Vec<Complex64>,
}

impl HaarFactors {
    pub fn sample(dim: usize, rng: &mut RngStream) -> Result<Self> {
        if dim == 0 {
            return Err(PcsError::invalid("HaarFactors::sample: dim must be >= 1"));
        }
        let mut reflectors = Vec::with_capacity(dim * (dim + 1) / 2);
        let mut offsets = Vec::with_capacity(dim);
        let mut phases = Vec::with_capacity(dim);
        for k in 0..dim {
            let len = dim - k;
            let start = reflectors.len();
            offsets.push(start);
            for _ in 0..len {
                reflectors.push(rng.complex_normal());
            }
            let x = &mut reflectors[start..];
            let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let lead = x[0];
            let e = if lead.norm() > 0.0 { lead / lead.norm() } else { ONE };
            // v = x + e·‖x‖·e₀ maps x to −e‖x‖e₀, so R_kk = −e‖x‖.
            x[0] += e * alpha;
            let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if vnorm > 0.0 {
                for z in x.iter_mut() {
                    *z /= vnorm;
                }
            } else {
                x[0] = ONE;
            }
            phases.push(-e);
        }
        Ok(Self {
            dim,
            reflectors,
            offsets,
            phases,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn reflector(&self, k: usize) -> &[Complex64] {
        let start = self.offsets[k];
        &self.reflectors[start..start + self.dim - k]
    }

    fn reflect(w: &[Complex64], y: &mut [Complex64]) {
        let mut dot = ZERO;
        for (wi, yi) in w.iter().zip(y.iter()) {
            dot += wi.conj() * yi;
        }
        let s = dot * 2.0;
        for (wi, yi) in w.iter().zip(y.iter_mut()) {
            *yi -= wi * s;
        }
    }

    /// Overwrites `v` with `U† v`.
    pub fn apply_adjoint(&self, v: &mut [Complex64]) {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        for k in 0..self.dim {
            Self::reflect(self.reflector(k), &mut v[k..]);
        }
        for (x, p) in v.iter_mut().zip(&self.phases) {
            *x *= p.conj();
        }
    }

    /// Overwrites `v` with `U v`.
    pub fn apply(&self, v: &mut [Complex64]) {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        for (x, p) in v.iter_mut().zip(&self.phases) {
            *x *= p;
        }
        for k in (0..self.dim).rev() {
            Self::reflect(self.reflector(k), &mut v[k..]);
        }
    }

    /// Column `j` of `U`; only reflectors `0..=j` touch `e_j`.
    pub fn column(&self, j: usize) -> ComplexVector {
        let mut y = vec![ZERO; self.dim];
        y[j] = self.phases[j];
        for k in (0..=j).rev() {
            Self::reflect(self.reflector(k), &mut y[k..]);
        }
        ComplexVector::from_vec(y)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            u.set_column(j, &self.column(j));
        }
        u
    }
}
