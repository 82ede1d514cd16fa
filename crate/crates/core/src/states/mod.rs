//! Ground-truth states: random low-rank densities, random MPS-derived MPOs,
//! Ising thermal states and GHZ states.

pub mod index;
mod mpo;

pub use mpo::{mpo_to_dense, MpoState};

use crate::error::{PcsError, Result};
use crate::numerics::{
    hermitian_eig, hermiticity_defect, qubits_for_dim, ComplexMatrix, ComplexVector, Complex64,
    RngStream, TOLERANCES, ZERO,
};
use crate::projections::tt::{contract_train, tt_sweep, BondControl};

/// Hermitian, unit-trace, positive semidefinite `2^n × 2^n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and PSD (via the spectrum).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = dim_to_qubits(&matrix)?;
        let tol = TOLERANCES.density;
        let defect = hermiticity_defect(&matrix);
        if defect > tol {
            return Err(PcsError::invalid(format!(
                "density matrix not Hermitian (defect {defect:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(PcsError::invalid(format!(
                "density matrix trace {trace} differs from 1"
            )));
        }
        let min_eig = hermitian_eig(&matrix)?
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -tol {
            return Err(PcsError::invalid(format!(
                "density matrix not PSD (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Skips validation; for constructions whose invariants hold by design.
    pub(crate) fn from_trusted(n_qubits: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let u = &state.amplitudes;
        Self::from_trusted(state.n_qubits, u * u.adjoint())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `trace(ρ²) = ‖ρ‖_F²`.
    pub fn purity(&self) -> f64 {
        self.matrix.norm_squared()
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

pub(crate) fn dim_to_qubits(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(PcsError::invalid(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    match qubits_for_dim(m.nrows()) {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(PcsError::invalid(format!(
            "dimension {} is not 2^n with n >= 1",
            m.nrows()
        ))),
    }
}

/// Unit-norm state vector of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let n_qubits = match qubits_for_dim(amplitudes.len()) {
            Some(n) if n >= 1 => n,
            _ => return Err(PcsError::invalid("amplitude count must be 2^n with n >= 1")),
        };
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(PcsError::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(PcsError::invalid("qubit count must be >= 1"));
    }
    if n > TOLERANCES.dense_qubit_limit {
        return Err(PcsError::Capacity {
            what: "qubits for a dense state",
            requested: n,
            limit: TOLERANCES.dense_qubit_limit,
        });
    }
    Ok(())
}

/// `ρ = F F†` with `F = (A + iB)/‖A + iB‖_F`, `A`, `B` i.i.d. standard normal `2^n × r`.
pub fn random_lowrank_state(n: usize, rank: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    if rank == 0 || rank > dim {
        return Err(PcsError::invalid(format!(
            "rank {rank} outside 1..={dim}"
        )));
    }
    let mut f = ComplexMatrix::from_fn(dim, rank, |_, _| rng.complex_normal());
    let norm = f.norm();
    f /= Complex64::new(norm, 0.0);
    let mut rho = &f * f.adjoint();
    crate::numerics::symmetrize(&mut rho);
    Ok(DensityMatrix::from_trusted(n, rho))
}

/// Random matrix-product state with bond `d` and its density matrix as an
/// MPO of bond `d²`.
///
/// Draws `2^n` complex standard-normal amplitudes, truncates them with a
/// TT-SVD sweep to bond `d`, and normalises. The MPO cores are
/// `X_ℓ^{i,j} = U_ℓ^i ⊗ conj(U_ℓ^j)`.
pub fn random_mps_state(n: usize, d: usize, rng: &mut RngStream) -> Result<(PureState, MpoState)> {
    check_qubits(n)?;
    if d == 0 {
        return Err(PcsError::invalid("MPS bond dimension must be >= 1"));
    }
    let dim = 1usize << n;
    let amplitudes: Vec<Complex64> = (0..dim).map(|_| rng.complex_normal()).collect();
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let sweep = tt_sweep(amplitudes, 2, n, &BondControl::Cap(d), norm)?;
    let mut cores = sweep.cores;
    let vector = contract_train(&cores, 2);
    let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let last = cores.last_mut().expect("n >= 1");
    *last /= Complex64::new(norm, 0.0);
    let vector: Vec<Complex64> = vector.iter().map(|z| z / norm).collect();

    let mpo_cores = cores.iter().map(kron_conj_core).collect();
    let mpo = MpoState::from_train_cores(mpo_cores)?;
    let state = PureState::new(ComplexVector::from_vec(vector))?;
    Ok((state, mpo))
}

/// MPS core `((r·2) × r')` → MPO core `((r²·4) × r'²)` with entries
/// `U[a,i,b]·conj(U[a',j,b'])`, bond index `a·r + a'`.
fn kron_conj_core(u: &ComplexMatrix) -> ComplexMatrix {
    let r = u.nrows() / 2;
    let rp = u.ncols();
    let (dl, dr) = (r * r, rp * rp);
    let mut x = ComplexMatrix::zeros(dl * 4, dr);
    for a in 0..r {
        for a2 in 0..r {
            for i in 0..2 {
                for j in 0..2 {
                    for b in 0..rp {
                        for b2 in 0..rp {
                            let v = u[(a + r * i, b)] * u[(a2 + r * j, b2)].conj();
                            x[(a * r + a2 + dl * (i + 2 * j), b * rp + b2)] = v;
                        }
                    }
                }
            }
        }
    }
    x
}

/// `H = Σ_{j<n} Z_j Z_{j+1} + Σ_j X_j` on an open chain.
pub fn ising_hamiltonian(n: usize) -> Result<ComplexMatrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for b in 0..dim {
        let z = |q: usize| 1.0 - 2.0 * index::bit(b, q) as f64;
        let diag: f64 = (0..n.saturating_sub(1)).map(|q| z(q) * z(q + 1)).sum();
        h[(b, b)] = Complex64::new(diag, 0.0);
        for q in 0..n {
            h[(b ^ (1 << q), b)] += Complex64::new(1.0, 0.0);
        }
    }
    Ok(h)
}

/// Gibbs state `e^{-H/T}/trace(e^{-H/T})` of [`ising_hamiltonian`].
/// Exponents are shifted by the ground energy so small `T` cannot overflow.
pub fn thermal_state(n: usize, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(PcsError::invalid(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    let h = ising_hamiltonian(n)?;
    let eig = hermitian_eig(&h)?;
    let ground = eig.eigenvalues.last().copied().unwrap_or(0.0);
    let mut weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|l| (-(l - ground) / temperature).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= z;
    }
    Ok(DensityMatrix::from_trusted(n, eig.reassemble(&weights)))
}

/// `ρ = g g†` with `g = (e_first + e_last)/√2`.
pub fn ghz_state(n: usize) -> Result<DensityMatrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut g = ComplexVector::from_element(dim, ZERO);
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    g[0] = a;
    g[dim - 1] = a;
    Ok(DensityMatrix::from_pure(&PureState::new(g)?))
}
