//! Tensor-train (TT-SVD) sweeps shared by MPS and MPO construction.
//!
//! A train core is stored as a `(r_{k-1}·m) × r_k` matrix with row
//! `a + r_{k-1}·q`, where `m` is the mode size (2 for MPS, 4 for MPO) and
//! `q` the physical index. Column-major storage makes every reshape in the
//! sweep a reinterpretation of the same buffer.

use std::io::Write;
use std::path::Path;

use crate::error::{PcsError, Result};
use crate::numerics::{svd_descending, ComplexMatrix, Complex64, TOLERANCES};
use crate::states::index::matrix_to_tensor;
use crate::states::{dim_to_qubits, MpoState};

/// How a TT-SVD sweep chooses each bond.
#[derive(Debug, Clone, PartialEq)]
pub enum BondControl {
    /// Same cap on every bond.
    Cap(usize),
    /// Per-bond caps `D₁ … D_{n-1}`.
    Caps(Vec<usize>),
    /// Adaptive: each step discards at most `(tol·‖H‖_F)²/(n-1)` energy.
    Tolerance(f64),
}

impl BondControl {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            BondControl::Cap(0) => Err(PcsError::invalid("bond cap must be >= 1")),
            BondControl::Caps(caps) if caps.len() != n.saturating_sub(1) => Err(
                PcsError::invalid(format!("expected {} bond caps, got {}", n - 1, caps.len())),
            ),
            BondControl::Caps(caps) if caps.contains(&0) => {
                Err(PcsError::invalid("bond caps must be >= 1"))
            }
            BondControl::Tolerance(t) if !(*t >= 0.0) => {
                Err(PcsError::invalid("tolerance must be non-negative"))
            }
            _ => Ok(()),
        }
    }
}

/// Per-step discarded energies `ε_k²` and the bond kept at each step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruncationReport {
    pub discarded_energy: Vec<f64>,
    pub kept_dims: Vec<usize>,
}

impl TruncationReport {
    pub fn total_discarded(&self) -> f64 {
        self.discarded_energy.iter().sum()
    }

    /// `√(Σ ε_k²)`, the TT-SVD reconstruction error.
    pub fn error_bound(&self) -> f64 {
        self.total_discarded().sqrt()
    }

    /// CSV with columns `step,discarded_energy,kept_dim`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e| PcsError::Csv {
            path: "<report>".into(),
            source: e,
        };
        w.write_record(["step", "discarded_energy", "kept_dim"]).map_err(wrap)?;
        for (k, (e, d)) in self.discarded_energy.iter().zip(&self.kept_dims).enumerate() {
            w.write_record([(k + 1).to_string(), e.to_string(), d.to_string()])
                .map_err(wrap)?;
        }
        w.flush().map_err(|e| PcsError::io("<report>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| PcsError::io(path, e))?;
        self.write_csv(file)
    }
}

pub(crate) struct Sweep {
    pub cores: Vec<ComplexMatrix>,
    pub report: TruncationReport,
}

/// Left-to-right truncated-SVD sweep over `n` modes of size `mode`.
/// `data` holds the tensor with mode 1 fastest; `norm` is its Frobenius norm.
pub(crate) fn tt_sweep(
    data: Vec<Complex64>,
    mode: usize,
    n: usize,
    control: &BondControl,
    norm: f64,
) -> Result<Sweep> {
    control.validate(n)?;
    let mut report = TruncationReport::default();
    let mut cores = Vec::with_capacity(n);
    let mut left = 1usize;
    let mut rest = data.len() / mode;
    let mut buf = data;
    let floor = TOLERANCES.tt_noise_floor * norm;
    let step_budget = match control {
        BondControl::Tolerance(tol) if n > 1 => {
            let delta = tol * norm / ((n - 1) as f64).sqrt();
            delta * delta
        }
        _ => 0.0,
    };
    for step in 0..n.saturating_sub(1) {
        let unfolding = ComplexMatrix::from_vec(left * mode, rest, buf);
        let svd = svd_descending(&unfolding)?;
        let sv = &svd.singular_values;
        let keep = match control {
            BondControl::Tolerance(_) => {
                let tail = svd.tail_energies();
                (1..=sv.len()).find(|&k| tail[k] <= step_budget).unwrap_or(sv.len())
            }
            BondControl::Cap(cap) => cap_keep(sv, *cap, floor),
            BondControl::Caps(caps) => cap_keep(sv, caps[step], floor),
        };
        let t = svd.truncate(keep);
        report.discarded_energy.push(t.discarded_energy);
        report.kept_dims.push(keep);
        let mut remainder = t.v_adjoint;
        for (r, s) in t.singular_values.iter().enumerate() {
            for x in remainder.row_mut(r).iter_mut() {
                *x *= *s;
            }
        }
        cores.push(t.u);
        left = keep;
        rest /= mode;
        // (keep × mode·rest) column-major is (keep·mode × rest) column-major.
        buf = remainder.as_slice().to_vec();
    }
    cores.push(ComplexMatrix::from_vec(left * mode, 1, buf));
    Ok(Sweep { cores, report })
}

fn cap_keep(sv: &[f64], cap: usize, floor: f64) -> usize {
    let above = sv.iter().filter(|&&s| s > floor).count();
    cap.min(above).min(sv.len()).max(1)
}

/// Contracts train cores into the full tensor (mode 1 fastest).
pub(crate) fn contract_train(cores: &[ComplexMatrix], mode: usize) -> Vec<Complex64> {
    let mut acc = ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for core in cores {
        let left = core.nrows() / mode;
        let right = core.ncols();
        let reshaped = ComplexMatrix::from_column_slice(left, mode * right, core.as_slice());
        let prod = &acc * reshaped;
        let rows = acc.nrows() * mode;
        acc = ComplexMatrix::from_vec(rows, right, prod.as_slice().to_vec());
    }
    acc.as_slice().to_vec()
}

/// TT-SVD of a `2^n × 2^n` matrix into an MPO.
///
/// The reconstruction error equals `√(Σ ε_k²)` from the returned report.
/// In capped mode singular values below `10⁻¹⁴·‖H‖_F` are dropped even under the cap.
pub fn tt_svd(
    h: &ComplexMatrix,
    n: usize,
    control: &BondControl,
) -> Result<(MpoState, TruncationReport)> {
    let actual = dim_to_qubits(h).map_err(|_| {
        PcsError::invalid(format!(
            "tt_svd: {}x{} matrix has no power-of-4 entry count",
            h.nrows(),
            h.ncols()
        ))
    })?;
    if actual != n {
        return Err(PcsError::invalid(format!(
            "tt_svd: matrix spans {actual} qubits, caller said {n}"
        )));
    }
    let norm = h.norm();
    let sweep = tt_sweep(matrix_to_tensor(h, n), 4, n, control, norm)?;
    Ok((MpoState::from_train_cores(sweep.cores)?, sweep.report))
}
