//! Dense complex linear algebra and random-matrix sampling.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; the eigen- and singular-value
//! decompositions delegate to nalgebra and add the ordering and bookkeeping
//! the projections rely on (descending spectra, discarded tail energies).

mod haar;
mod linalg;
mod rng;

pub use haar::{haar_unitary, HaarFactors};
pub use linalg::{
    adjoint, expm_hermitian, symmetrize, hermitian_eig, hermiticity_defect, max_abs, outer, singular_values,
    svd_descending, truncated_svd, unitarity_defect, FullSvd, HermitianEig, TruncatedSvd,
};
pub use rng::{mix64, RngStream};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

/// Dense complex matrix. nalgebra stores column-major; file formats convert explicitly.
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Numerical tolerances shared across modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entrywise ‖U†U − I‖ for sampled unitaries.
    pub unitarity: f64,
    /// Relative Hermiticity defect (to ‖H‖_F) accepted by eigendecompositions.
    pub hermitian_input: f64,
    /// Relative reconstruction residual of eigendecompositions.
    pub eig_reconstruction: f64,
    /// Absolute Hermiticity, trace and PSD slack of a density matrix.
    pub density: f64,
    /// Negative probabilities above `-probability_floor` are rounding and clamp to zero.
    pub probability_floor: f64,
    /// Max |Σp − 1| before a measurement is rejected.
    pub probability_sum: f64,
    /// Largest exponent accepted by `expm_hermitian`.
    pub exp_limit: f64,
    /// Singular values below this fraction of ‖H‖_F are always dropped by TT-SVD.
    pub tt_noise_floor: f64,
    /// Largest qubit count materialised as a dense matrix.
    pub dense_qubit_limit: usize,
}

pub const TOLERANCES: Tolerances = Tolerances {
    unitarity: 1e-12,
    hermitian_input: 1e-8,
    eig_reconstruction: 1e-10,
    density: 1e-10,
    probability_floor: 1e-9,
    probability_sum: 1e-6,
    exp_limit: 700.0,
    tt_noise_floor: 1e-14,
    dense_qubit_limit: 12,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOLERANCES
    }
}

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Returns `Some(n)` when `dim == 2^n`.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}
