//! Single-shot Haar-random projective measurements and the classical-shadow estimator.
//!
//! Each shot draws a fresh Haar unitary `U`, samples outcome `j` with
//! probability `p_j = φ_j† ρ φ_j` (`φ_j = U e_j`) by inverse-CDF on one uniform
//! draw, and keeps only `φ_j`. The snapshot is `(2^n + 1) φ_j φ_j† − I` and the
//! estimate is the mean snapshot; [`ShadowAccumulator`] keeps `Σ φφ†` so no
//! snapshot is stored.

mod log;

pub use log::{read_snapshot_log, write_snapshot_log, SnapshotLogEntry};

use rayon::prelude::*;

use crate::error::{PcsError, Result};
use crate::numerics::{
    haar_unitary, hermitian_eig, ComplexMatrix, ComplexVector, Complex64, HaarFactors, RngStream,
    ONE, TOLERANCES,
};
use crate::states::{DensityMatrix, PureState};

/// Shots simulated per independent RNG block.
pub const BLOCK_SHOTS: usize = 256;

/// Outcome of one shot: the observed basis vector `φ = U e_j` and `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub basis_column: ComplexVector,
    pub outcome_index: usize,
}

/// Clamps rounding-level negatives, checks the total and renormalises.
pub fn normalize_probabilities(mut p: Vec<f64>) -> Result<Vec<f64>> {
    for x in p.iter_mut() {
        if !x.is_finite() {
            return Err(PcsError::NumericIntegrity("non-finite outcome probability".into()));
        }
        if *x < 0.0 {
            if *x < -TOLERANCES.probability_floor {
                return Err(PcsError::NumericIntegrity(format!(
                    "outcome probability {x:.3e} is negative beyond rounding"
                )));
            }
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > TOLERANCES.probability_sum {
        return Err(PcsError::NumericIntegrity(format!(
            "outcome probabilities sum to {total}; state is non-physical or U is not unitary"
        )));
    }
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok(p)
}

/// Inverse-CDF sampling with cumulative sums in index order.
pub fn sample_index(p: &[f64], uniform: f64) -> usize {
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        acc += pk;
        if uniform < acc {
            return k;
        }
    }
    // uniform landed in the rounding gap at the top; take the last non-zero outcome.
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}

/// `p_k = e_k† (U† ρ U) e_k`, clamped and renormalised.
pub fn outcome_probabilities(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<Vec<f64>> {
    let dim = rho.dim();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(PcsError::invalid(format!(
            "unitary is {}x{}, state has dimension {dim}",
            u.nrows(),
            u.ncols()
        )));
    }
    let rho_u = rho.matrix() * u;
    let raw = (0..dim)
        .map(|k| u.column(k).dotc(&rho_u.column(k)).re)
        .collect();
    normalize_probabilities(raw)
}

/// Measures `rho` in the basis of a given unitary using `uniform` for the outcome.
pub fn measure_with_unitary(
    rho: &DensityMatrix,
    u: &ComplexMatrix,
    uniform: f64,
) -> Result<MeasurementRecord> {
    let p = outcome_probabilities(rho, u)?;
    let j = sample_index(&p, uniform);
    Ok(MeasurementRecord {
        basis_column: u.column(j).into_owned(),
        outcome_index: j,
    })
}

/// One shot with a freshly sampled dense Haar unitary.
pub fn measure_once(rho: &DensityMatrix, rng: &mut RngStream) -> Result<MeasurementRecord> {
    let u = haar_unitary(rho.dim(), rng)?;
    let uniform = rng.uniform();
    measure_with_unitary(rho, &u, uniform)
}

/// `(2^n + 1) φφ† − I`.
pub fn snapshot_matrix(rec: &MeasurementRecord) -> ComplexMatrix {
    let dim = rec.basis_column.len();
    let phi = &rec.basis_column;
    let mut s = phi * phi.adjoint() * Complex64::new((dim + 1) as f64, 0.0);
    for i in 0..dim {
        s[(i, i)] -= ONE;
    }
    s
}

/// Running `Σ φ_m φ_m†` and shot count.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowAccumulator {
    n_qubits: usize,
    count: usize,
    sum_outer: ComplexMatrix,
}

impl ShadowAccumulator {
    pub fn new(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            count: 0,
            sum_outer: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sum_outer(&self) -> &ComplexMatrix {
        &self.sum_outer
    }

    pub fn accumulate(&mut self, rec: &MeasurementRecord) -> Result<()> {
        if rec.basis_column.len() != self.sum_outer.nrows() {
            return Err(PcsError::invalid(format!(
                "record has dimension {}, accumulator {}",
                rec.basis_column.len(),
                self.sum_outer.nrows()
            )));
        }
        let phi = &rec.basis_column;
        self.sum_outer.gerc(ONE, phi, phi, ONE);
        self.count += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ShadowAccumulator) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(PcsError::invalid(format!(
                "cannot merge {}-qubit and {}-qubit accumulators",
                self.n_qubits, other.n_qubits
            )));
        }
        self.sum_outer += &other.sum_outer;
        self.count += other.count;
        Ok(())
    }

    /// `ρ_CS = ((2^n + 1)/M) Σ φφ† − I`.
    pub fn cs_estimate(&self) -> Result<ComplexMatrix> {
        if self.count == 0 {
            return Err(PcsError::EmptyAccumulator);
        }
        let dim = self.sum_outer.nrows();
        let scale = (dim + 1) as f64 / self.count as f64;
        let mut out = &self.sum_outer * Complex64::new(scale, 0.0);
        for i in 0..dim {
            out[(i, i)] -= ONE;
        }
        Ok(out)
    }
}

/// Merges accumulators pairwise, level by level, in index order.
pub fn merge_tree(mut parts: Vec<ShadowAccumulator>) -> Result<Option<ShadowAccumulator>> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.merge(&b)?;
            }
            next.push(a);
        }
        parts = next;
    }
    Ok(parts.pop())
}

/// Bulk shot simulator for a fixed state.
///
/// `ρ = Σ_i λ_i v_i v_i†` is measured as the ensemble `{λ_i, v_i}`: the uniform
/// draw first picks component `i` by inverse-CDF over `λ`, is rescaled to the
/// chosen bucket, then picks `j` by inverse-CDF over `|(U† v_i)_j|²`. The joint
/// law of `(U, j)` is that of `p_j = φ_j† ρ φ_j`; for pure states this is exactly
/// inverse-CDF on the outcome probabilities. `U` is held in factored form.
#[derive(Debug, Clone)]
pub struct ShadowSampler {
    n_qubits: usize,
    weights: Vec<f64>,
    components: Vec<ComplexVector>,
}

impl ShadowSampler {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let eig = hermitian_eig(rho.matrix())?;
        let mut weights = Vec::new();
        let mut components = Vec::new();
        // Eigenvalues at rounding level are solver noise, not ensemble members.
        let floor = eig.eigenvalues.first().copied().unwrap_or(0.0)
            * f64::EPSILON
            * rho.dim() as f64;
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l < -TOLERANCES.density {
                return Err(PcsError::NumericIntegrity(format!(
                    "state has eigenvalue {l:.3e}"
                )));
            }
            if l > floor {
                weights.push(l);
                components.push(eig.eigenvectors.column(k).into_owned());
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TOLERANCES.probability_sum {
            return Err(PcsError::NumericIntegrity(format!(
                "state spectrum sums to {total}"
            )));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(Self {
            n_qubits: rho.n_qubits(),
            weights,
            components,
        })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            n_qubits: state.n_qubits(),
            weights: vec![1.0],
            components: vec![state.amplitudes().clone()],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// One shot; also returns the uniform draw used for the outcome.
    pub fn measure(&self, rng: &mut RngStream) -> Result<(MeasurementRecord, f64)> {
        let dim = 1usize << self.n_qubits;
        let haar = HaarFactors::sample(dim, rng)?;
        let uniform = rng.uniform();
        let i = sample_index(&self.weights, uniform);
        let below: f64 = self.weights[..i].iter().sum();
        let rescaled = ((uniform - below) / self.weights[i]).clamp(0.0, 1.0 - f64::EPSILON);
        let mut amps = self.components[i].as_slice().to_vec();
        haar.apply_adjoint(&mut amps);
        let p = normalize_probabilities(amps.iter().map(|z| z.norm_sqr()).collect())?;
        let j = sample_index(&p, rescaled);
        let rec = MeasurementRecord {
            basis_column: haar.column(j),
            outcome_index: j,
        };
        Ok((rec, uniform))
    }

    fn run_block(&self, shots: usize, mut rng: RngStream) -> Result<ShadowAccumulator> {
        let mut acc = ShadowAccumulator::new(self.n_qubits);
        for _ in 0..shots {
            let (rec, _) = self.measure(&mut rng)?;
            acc.accumulate(&rec)?;
        }
        Ok(acc)
    }

    /// Simulates `shots` measurements. Shots are grouped in blocks of
    /// [`BLOCK_SHOTS`], block `b` drawing from `stream.split(b)`; blocks run on
    /// the current rayon pool and merge in a fixed tree, so the result does not
    /// depend on the number of worker threads.
    pub fn simulate(&self, shots: usize, stream: &RngStream) -> Result<ShadowAccumulator> {
        let blocks = shots.div_ceil(BLOCK_SHOTS);
        let parts = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let len = BLOCK_SHOTS.min(shots - b * BLOCK_SHOTS);
                self.run_block(len, stream.split(b as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(merge_tree(parts)?.unwrap_or_else(|| ShadowAccumulator::new(self.n_qubits)))
    }

    /// Sequential variant of [`ShadowSampler::simulate`] that also returns the
    /// per-shot log; it consumes the same block streams and yields the same records.
    pub fn simulate_logged(
        &self,
        shots: usize,
        stream: &RngStream,
    ) -> Result<(ShadowAccumulator, Vec<SnapshotLogEntry>)> {
        let blocks = shots.div_ceil(BLOCK_SHOTS);
        let mut parts = Vec::with_capacity(blocks);
        let mut log = Vec::with_capacity(shots);
        for b in 0..blocks {
            let len = BLOCK_SHOTS.min(shots - b * BLOCK_SHOTS);
            let mut rng = stream.split(b as u64);
            let mut acc = ShadowAccumulator::new(self.n_qubits);
            for s in 0..len {
                let (rec, uniform) = self.measure(&mut rng)?;
                log.push(SnapshotLogEntry {
                    m: b * BLOCK_SHOTS + s,
                    outcome_index: rec.outcome_index,
                    uniform_draw: uniform,
                });
                acc.accumulate(&rec)?;
            }
            parts.push(acc);
        }
        let acc = merge_tree(parts)?.unwrap_or_else(|| ShadowAccumulator::new(self.n_qubits));
        Ok((acc, log))
    }

    /// Re-simulates with `stream` and checks every logged record.
    pub fn verify_replay(&self, log: &[SnapshotLogEntry], stream: &RngStream) -> Result<()> {
        let (_, again) = self.simulate_logged(log.len(), stream)?;
        match log.iter().zip(&again).find(|(a, b)| a != b) {
            None => Ok(()),
            Some((a, b)) => Err(PcsError::NumericIntegrity(format!(
                "replay diverged at shot {}: logged {:?}, replayed {:?}",
                a.m, a, b
            ))),
        }
    }
}
