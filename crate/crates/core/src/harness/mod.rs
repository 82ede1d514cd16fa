//! Monte Carlo experiment orchestration.
//!
//! Every `(M, trial)` cell draws its own shadow from a seed derived from
//! `(master_seed, experiment_id, M, trial)`; all configured methods are applied
//! to that same estimate. Ground truths depend only on the trial index (or are
//! shared), so the output is fixed by the config regardless of worker count.

mod config;
mod presets;

pub use config::{ExperimentConfig, MethodSpec, MpoBonds, StateSpec};
pub use presets::{preset_configs, Preset};

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PcsError, Result};
use crate::measurement::ShadowSampler;
use crate::metrics::{summarize, ErrorRecord};
use crate::numerics::{mix64, ComplexMatrix, RngStream};
use crate::projections::{
    lr_pcs, mpo_pcs, project_simplex_state, tt_svd, BondControl, MpoPcsOptions,
};
use crate::states::{ghz_state, random_lowrank_state, random_mps_state, thermal_state, DensityMatrix};

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of the measurement stream for one `(M, trial)` cell.
pub fn trial_seed(cfg: &ExperimentConfig, m: usize, trial: usize) -> u64 {
    let base = mix64(cfg.master_seed, fnv1a(cfg.experiment_id.as_bytes()));
    mix64(mix64(base, m as u64), trial as u64)
}

/// Seed of the ground truth used by `trial` (index 0 when shared).
pub fn state_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    let idx = if cfg.fresh_state_per_trial { trial } else { 0 };
    let base = mix64(cfg.master_seed, fnv1a(cfg.experiment_id.as_bytes()));
    mix64(mix64(base, fnv1a(b"state")), idx as u64)
}

/// A ground truth plus what the methods need from it.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub rho: DensityMatrix,
    sampler: ShadowSampler,
    truth_caps: Vec<(u64, Vec<usize>)>,
}

impl GroundTruth {
    pub fn generate(cfg: &ExperimentConfig, trial: usize) -> Result<Self> {
        let n = cfg.n_qubits;
        let mut rng = RngStream::new(state_seed(cfg, trial));
        let (rho, sampler) = match cfg.state {
            StateSpec::Lowrank { rank } => {
                let rho = random_lowrank_state(n, rank, &mut rng)?;
                let s = ShadowSampler::new(&rho)?;
                (rho, s)
            }
            StateSpec::Mps { bond } => {
                let (pure, _) = random_mps_state(n, bond, &mut rng)?;
                (pure.to_density(), ShadowSampler::from_pure(&pure))
            }
            StateSpec::Thermal { temperature } => {
                let rho = thermal_state(n, temperature)?;
                let s = ShadowSampler::new(&rho)?;
                (rho, s)
            }
            StateSpec::Ghz => {
                let rho = ghz_state(n)?;
                let s = ShadowSampler::new(&rho)?;
                (rho, s)
            }
        };
        let mut truth_caps: Vec<(u64, Vec<usize>)> = Vec::new();
        for m in &cfg.methods {
            if let Ok(MpoBonds::TruthTolerance(tol)) = m.mpo_bonds() {
                if truth_caps.iter().all(|(t, _)| *t != tol.to_bits()) {
                    let (_, report) = tt_svd(rho.matrix(), n, &BondControl::Tolerance(tol))?;
                    truth_caps.push((tol.to_bits(), report.kept_dims));
                }
            }
        }
        Ok(Self {
            rho,
            sampler,
            truth_caps,
        })
    }

    pub fn sampler(&self) -> &ShadowSampler {
        &self.sampler
    }

    /// Bond dimensions of the truth's TT-SVD at `tol`, if a method asked for them.
    pub fn truth_bonds(&self, tol: f64) -> Option<&[usize]> {
        self.truth_caps
            .iter()
            .find(|(t, _)| *t == tol.to_bits())
            .map(|(_, caps)| caps.as_slice())
    }
}

/// Applies one reconstruction method to a shadow estimate.
pub fn apply_method(
    method: &MethodSpec,
    cs: &ComplexMatrix,
    n: usize,
    truth: &GroundTruth,
) -> Result<ComplexMatrix> {
    Ok(match method {
        MethodSpec::Cs => cs.clone(),
        MethodSpec::SimplexPcs => project_simplex_state(cs)?.into_matrix(),
        MethodSpec::LrPcs { rank } => lr_pcs(cs, *rank)?.into_matrix(),
        MethodSpec::MpoPcs { hermitize_first, .. } => {
            let bonds = match method.mpo_bonds()? {
                MpoBonds::TruthTolerance(tol) => BondControl::Caps(
                    truth
                        .truth_bonds(tol)
                        .ok_or_else(|| PcsError::invalid("truth bonds were not prepared"))?
                        .to_vec(),
                ),
                direct => direct.direct().expect("non-truth bond control"),
            };
            let options = MpoPcsOptions {
                bonds,
                hermitize_first: *hermitize_first,
            };
            mpo_pcs(cs, n, &options)?.into_matrix()
        }
    })
}

/// One row per `(method, M, trial)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub experiment_id: String,
    pub method: String,
    pub method_param: String,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub frob_err_sq: f64,
    pub trace_err: f64,
    /// Shared sampling time plus this method's reconstruction time.
    pub wall_ms: f64,
}

fn annotate(cfg: &ExperimentConfig, m: usize, trial: usize) -> impl FnOnce(PcsError) -> PcsError + '_ {
    move |e| PcsError::Trial {
        experiment_id: cfg.experiment_id.clone(),
        m,
        trial,
        source: Box::new(e),
    }
}

fn round_ms(ms: f64) -> f64 {
    (ms * 1000.0).round() / 1000.0
}

/// Runs one cell against a prepared ground truth.
pub fn run_trial_with(
    cfg: &ExperimentConfig,
    truth: &GroundTruth,
    m: usize,
    trial: usize,
) -> Result<Vec<TrialResult>> {
    let seed = trial_seed(cfg, m, trial);
    let inner = || -> Result<Vec<TrialResult>> {
        let start = Instant::now();
        let acc = truth.sampler().simulate(m, &RngStream::new(seed))?;
        let cs = acc.cs_estimate()?;
        let sampling_ms = start.elapsed().as_secs_f64() * 1e3;
        cfg.methods
            .iter()
            .map(|method| {
                let t = Instant::now();
                let est = apply_method(method, &cs, cfg.n_qubits, truth)?;
                let err = ErrorRecord::between(&est, truth.rho.matrix())?;
                Ok(TrialResult {
                    experiment_id: cfg.experiment_id.clone(),
                    method: method.name().to_string(),
                    method_param: method.param(),
                    n: cfg.n_qubits,
                    m,
                    trial,
                    seed,
                    frob_err_sq: err.frob_err_sq,
                    trace_err: err.trace_err,
                    wall_ms: round_ms(sampling_ms + t.elapsed().as_secs_f64() * 1e3),
                })
            })
            .collect()
    };
    inner().map_err(annotate(cfg, m, trial))
}

/// Runs one cell, generating its ground truth.
pub fn run_trial(cfg: &ExperimentConfig, m: usize, trial: usize) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let truth = GroundTruth::generate(cfg, trial).map_err(annotate(cfg, m, trial))?;
    run_trial_with(cfg, &truth, m, trial)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<TrialResult>,
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(PcsError::Config("workers must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PcsError::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every cell on a pool of `workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ResultTable> {
    cfg.validate()?;
    with_workers(workers, || {
        let n_truths = if cfg.fresh_state_per_trial { cfg.trials } else { 1 };
        let truths = (0..n_truths)
            .into_par_iter()
            .map(|t| GroundTruth::generate(cfg, t).map_err(annotate(cfg, 0, t)))
            .collect::<Result<Vec<_>>>()?;
        let cells: Vec<(usize, usize)> = cfg
            .m_grid
            .iter()
            .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
            .collect();
        let per_cell = cells
            .par_iter()
            .map(|&(m, t)| {
                let truth = &truths[if cfg.fresh_state_per_trial { t } else { 0 }];
                run_trial_with(cfg, truth, m, t)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows: Vec<TrialResult> = per_cell.into_iter().flatten().collect();
        let method_index = |r: &TrialResult| {
            cfg.methods
                .iter()
                .position(|m| m.name() == r.method && m.param() == r.method_param)
                .unwrap_or(usize::MAX)
        };
        rows.sort_by_key(|r| (method_index(r), r.m, r.trial));
        Ok(ResultTable { rows })
    })?
}

pub const TRIAL_HEADER: &str =
    "experiment_id,method,method_param,n,M,trial,seed,frob_err_sq,trace_err,wall_ms";
pub const SUMMARY_HEADER: &str =
    "experiment_id,method,method_param,n,M,trials,mean_mse,stderr_mse,mean_trace_err";

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> PcsError + '_ {
    move |e| PcsError::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_rows_to<T: Serialize, W: Write>(out: W, path: &Path, header: &str, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header.split(',')).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| PcsError::io(path, e))
}

fn write_rows<T: Serialize>(path: &Path, header: &str, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| PcsError::io(path, e))?;
    write_rows_to(std::io::BufWriter::new(file), path, header, rows)
}

/// Writes trial rows; floats use shortest round-trip formatting.
pub fn write_trials_csv(path: &Path, rows: &[TrialResult]) -> Result<()> {
    write_rows(path, TRIAL_HEADER, rows)
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialResult>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.iter().collect::<Vec<_>>().join(",");
    if header != TRIAL_HEADER {
        return Err(PcsError::Format {
            path: path.to_path_buf(),
            reason: format!("unexpected header {header:?}"),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(csv_err(path)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment_id: String,
    pub method: String,
    pub method_param: String,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub mean_mse: f64,
    pub stderr_mse: f64,
    pub mean_trace_err: f64,
}

/// Aggregates rows per `(experiment, method, param, n, M)`, in first-seen order.
pub fn summarize_rows(rows: &[TrialResult]) -> Result<Vec<SummaryRow>> {
    type Key<'a> = (&'a str, &'a str, &'a str, usize, usize);
    let mut groups: Vec<(Key, Vec<&TrialResult>)> = Vec::new();
    for r in rows {
        let key = (
            r.experiment_id.as_str(),
            r.method.as_str(),
            r.method_param.as_str(),
            r.n,
            r.m,
        );
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|((id, method, param, n, m), g)| {
            let mse = summarize(&g.iter().map(|r| r.frob_err_sq).collect::<Vec<_>>())?;
            let tr = summarize(&g.iter().map(|r| r.trace_err).collect::<Vec<_>>())?;
            Ok(SummaryRow {
                experiment_id: id.to_string(),
                method: method.to_string(),
                method_param: param.to_string(),
                n,
                m,
                trials: mse.count,
                mean_mse: mse.mean,
                stderr_mse: mse.stderr,
                mean_trace_err: tr.mean,
            })
        })
        .collect()
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(path, SUMMARY_HEADER, rows)
}

/// Writes summary CSV to any sink (`label` names it in errors).
pub fn write_summary_to<W: Write>(out: W, label: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows_to(out, label, SUMMARY_HEADER, rows)
}

/// Writes `<id>_trials.csv` and `<id>_summary.csv` under `dir`.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    table: &ResultTable,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| PcsError::io(dir, e))?;
    let trials = dir.join(format!("{}_trials.csv", cfg.experiment_id));
    let summary = dir.join(format!("{}_summary.csv", cfg.experiment_id));
    write_trials_csv(&trials, &table.rows)?;
    write_summary_csv(&summary, &summarize_rows(&table.rows)?)?;
    Ok((trials, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(methods: Vec<MethodSpec>) -> ExperimentConfig {
        ExperimentConfig {
            experiment_id: "unit".into(),
            n_qubits: 3,
            state: StateSpec::Lowrank { rank: 2 },
            methods,
            m_grid: vec![200],
            trials: 2,
            master_seed: 5,
            fresh_state_per_trial: true,
        }
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn seeds_separate_cells() {
        let cfg = small(vec![MethodSpec::Cs]);
        assert_ne!(trial_seed(&cfg, 200, 0), trial_seed(&cfg, 200, 1));
        assert_ne!(trial_seed(&cfg, 200, 0), trial_seed(&cfg, 400, 0));
        let mut other = cfg.clone();
        other.experiment_id = "other".into();
        assert_ne!(trial_seed(&cfg, 200, 0), trial_seed(&other, 200, 0));
        assert_ne!(state_seed(&cfg, 0), state_seed(&cfg, 1));
        other = cfg.clone();
        other.fresh_state_per_trial = false;
        assert_eq!(state_seed(&other, 0), state_seed(&other, 3));
    }

    #[test]
    fn cs_row_is_raw_estimate_error() {
        let cfg = small(vec![MethodSpec::Cs]);
        let rows = run_trial(&cfg, 200, 0).unwrap();
        let truth = GroundTruth::generate(&cfg, 0).unwrap();
        let acc = truth.sampler().simulate(200, &RngStream::new(rows[0].seed)).unwrap();
        let direct = ErrorRecord::between(&acc.cs_estimate().unwrap(), truth.rho.matrix()).unwrap();
        assert_eq!(rows[0].frob_err_sq, direct.frob_err_sq);
    }

    #[test]
    fn full_rank_lr_equals_simplex() {
        let cfg = small(vec![MethodSpec::SimplexPcs, MethodSpec::LrPcs { rank: 8 }]);
        for t in 0..2 {
            let rows = run_trial(&cfg, 200, t).unwrap();
            assert!((rows[0].frob_err_sq - rows[1].frob_err_sq).abs() < 1e-12);
        }
    }

    #[test]
    fn trials_are_repeatable() {
        let cfg = small(vec![MethodSpec::Cs, MethodSpec::SimplexPcs]);
        let strip = |mut v: Vec<TrialResult>| {
            v.iter_mut().for_each(|r| r.wall_ms = 0.0);
            v
        };
        assert_eq!(strip(run_trial(&cfg, 200, 1).unwrap()), strip(run_trial(&cfg, 200, 1).unwrap()));
    }

    #[test]
    fn truth_caps_follow_ground_truth() {
        let mut cfg = small(vec![MethodSpec::MpoPcs {
            cap: None,
            tol: None,
            truth_tol: Some(1e-14),
            hermitize_first: false,
        }]);
        cfg.state = StateSpec::Ghz;
        let truth = GroundTruth::generate(&cfg, 0).unwrap();
        assert_eq!(truth.truth_bonds(1e-14), Some(&[4usize, 4][..]));
        assert_eq!(truth.truth_bonds(1e-3), None);
        let rows = run_trial(&cfg, 500, 0).unwrap();
        assert!(rows[0].frob_err_sq.is_finite());
    }

    #[test]
    fn experiment_rows_are_sorted_and_summarised() {
        let mut cfg = small(vec![MethodSpec::SimplexPcs, MethodSpec::Cs]);
        cfg.m_grid = vec![400, 100];
        let table = run_experiment(&cfg, 2).unwrap();
        assert_eq!(table.rows.len(), 8);
        let keys: Vec<_> = table.rows.iter().map(|r| (r.method.as_str(), r.m, r.trial)).collect();
        assert_eq!(keys[0], ("simplex-pcs", 100, 0));
        assert_eq!(keys[3], ("simplex-pcs", 400, 1));
        assert_eq!(keys[4], ("cs", 100, 0));
        let summary = summarize_rows(&table.rows).unwrap();
        assert_eq!(summary.len(), 4);
        assert_eq!(summary[0].trials, 2);
        let direct = (table.rows[0].frob_err_sq + table.rows[1].frob_err_sq) / 2.0;
        assert!((summary[0].mean_mse - direct).abs() < 1e-15);
        assert!(run_experiment(&cfg, 0).unwrap_err().is_config_error());
    }

    #[test]
    fn csv_round_trip_and_headers() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(vec![MethodSpec::Cs]);
        let empty = dir.path().join("empty.csv");
        write_trials_csv(&empty, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&empty).unwrap(), format!("{TRIAL_HEADER}\n"));

        let table = run_experiment(&cfg, 1).unwrap();
        let (trials, summary) = write_outputs(dir.path(), &cfg, &table).unwrap();
        let text = std::fs::read_to_string(&trials).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRIAL_HEADER);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(read_trials_csv(&trials).unwrap(), table.rows);
        let text = std::fs::read_to_string(&summary).unwrap();
        assert_eq!(text.lines().next().unwrap(), SUMMARY_HEADER);
    }

    #[test]
    fn identical_rows_have_zero_stderr() {
        let row = TrialResult {
            experiment_id: "x".into(),
            method: "cs".into(),
            method_param: String::new(),
            n: 1,
            m: 1,
            trial: 0,
            seed: 0,
            frob_err_sq: 0.25,
            trace_err: 0.5,
            wall_ms: 0.0,
        };
        let s = summarize_rows(&vec![row; 10]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean_mse, s[0].stderr_mse, s[0].trials), (0.25, 0.0, 10));
    }
}
