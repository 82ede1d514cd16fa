use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pcs_core::harness::{
    preset_configs, read_trials_csv, run_experiment, summarize_rows, with_workers, write_outputs,
    write_summary_csv, write_summary_to, ExperimentConfig, Preset,
};
use pcs_core::io::{read_rho, write_mpo, write_rho};
use pcs_core::measurement::{write_snapshot_log, ShadowSampler};
use pcs_core::metrics::ErrorRecord;
use pcs_core::numerics::{ComplexMatrix, RngStream};
use pcs_core::projections::{
    lr_pcs, mpo_pcs, project_simplex_state, tt_svd, BondControl, MpoPcsOptions,
};
use pcs_core::states::{
    ghz_state, random_lowrank_state, random_mps_state, thermal_state, DensityMatrix,
};
use pcs_core::{PcsError, Result};

#[derive(Parser)]
#[command(name = "pcs", version, about = "Projected classical shadow tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-truth states.
    #[command(subcommand)]
    State(StateCmd),
    /// Simulate M Haar-random single-shot measurements and write the shadow estimate.
    Measure(MeasureArgs),
    /// Project a shadow estimate onto a physical state set.
    Reconstruct(ReconstructArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Post-process result files.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum StateCmd {
    /// Generate a state and write it as a RHO1 file (and optionally MPO1).
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Lowrank,
    Mps,
    Thermal,
    Ghz,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Rank for `lowrank`.
    #[arg(long)]
    rank: Option<usize>,
    /// MPS bond dimension for `mps`.
    #[arg(long)]
    bond: Option<usize>,
    /// Temperature for `thermal`.
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the state as an MPO (exact for `mps`, TT-SVD at tol 1e-14 otherwise).
    #[arg(long)]
    mpo_out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    /// RHO1 ground-truth file.
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RHO1 output for the shadow estimate.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-shot CSV log (m, outcome_index, uniform_draw).
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Cs,
    SimplexPcs,
    LrPcs,
    MpoPcs,
}

#[derive(Args)]
struct ReconstructArgs {
    /// RHO1 file holding the shadow estimate.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Rank for `lr-pcs`.
    #[arg(long)]
    rank: Option<usize>,
    /// Bond cap for `mpo-pcs`.
    #[arg(long, conflicts_with = "tol")]
    cap: Option<usize>,
    /// Adaptive TT-SVD tolerance for `mpo-pcs`.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    hermitize_first: bool,
    #[arg(long)]
    out: PathBuf,
    /// Ground truth (RHO1); when given, errors are printed.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a built-in experiment (fig2, fig3, fig4 or fig5).
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Longer M grids.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Aggregate a trial CSV into per-(method, M) means; prints CSV.
    Summarize {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn need<T>(v: Option<T>, flag: &str, what: &str) -> Result<T> {
    v.ok_or_else(|| PcsError::Config(format!("--{flag} is required for {what}")))
}

fn gen_state(a: GenArgs) -> Result<()> {
    let mut rng = RngStream::new(a.seed);
    let (rho, mpo) = match a.family {
        Family::Lowrank => (
            random_lowrank_state(a.n, need(a.rank, "rank", "lowrank")?, &mut rng)?,
            None,
        ),
        Family::Mps => {
            let (pure, mpo) = random_mps_state(a.n, need(a.bond, "bond", "mps")?, &mut rng)?;
            (pure.to_density(), Some(mpo))
        }
        Family::Thermal => (
            thermal_state(a.n, need(a.temperature, "temperature", "thermal")?)?,
            None,
        ),
        Family::Ghz => (ghz_state(a.n)?, None),
    };
    write_rho(&a.out, rho.matrix())?;
    eprintln!("wrote {}", a.out.display());
    if let Some(path) = a.mpo_out {
        let mpo = match mpo {
            Some(m) => m,
            None => tt_svd(rho.matrix(), a.n, &BondControl::Tolerance(1e-14))?.0,
        };
        write_mpo(&path, &mpo)?;
        eprintln!("wrote {} (bonds {:?})", path.display(), mpo.bond_dims());
    }
    Ok(())
}

fn load_state(path: &Path) -> Result<DensityMatrix> {
    DensityMatrix::new(read_rho(path)?).map_err(|e| match e {
        PcsError::InvalidArgument(msg) => {
            PcsError::NumericIntegrity(format!("{} is not a physical state: {msg}", path.display()))
        }
        other => other,
    })
}

fn measure(a: MeasureArgs) -> Result<()> {
    if a.shots == 0 {
        return Err(PcsError::Config("--shots must be >= 1".into()));
    }
    let rho = load_state(&a.state)?;
    let sampler = ShadowSampler::new(&rho)?;
    let stream = RngStream::new(a.seed);
    let acc = match &a.log {
        Some(path) => {
            let (acc, log) = sampler.simulate_logged(a.shots, &stream)?;
            write_snapshot_log(path, &log)?;
            acc
        }
        None => with_workers(a.workers, || sampler.simulate(a.shots, &stream))??,
    };
    let cs = acc.cs_estimate()?;
    write_rho(&a.out, &cs)?;
    let err = ErrorRecord::between(&cs, rho.matrix())?;
    eprintln!(
        "{} shots; wrote {}; frob_err_sq {:.6e}",
        acc.count(),
        a.out.display(),
        err.frob_err_sq
    );
    Ok(())
}

fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let cs = read_rho(&a.input)?;
    let n = cs.nrows().trailing_zeros() as usize;
    let est: ComplexMatrix = match a.method {
        Method::Cs => cs,
        Method::SimplexPcs => project_simplex_state(&cs)?.into_matrix(),
        Method::LrPcs => lr_pcs(&cs, need(a.rank, "rank", "lr-pcs")?)?.into_matrix(),
        Method::MpoPcs => {
            let bonds = match (a.cap, a.tol) {
                (Some(c), None) => BondControl::Cap(c),
                (None, Some(t)) => BondControl::Tolerance(t),
                _ => return Err(PcsError::Config("mpo-pcs needs --cap or --tol".into())),
            };
            let options = MpoPcsOptions {
                bonds,
                hermitize_first: a.hermitize_first,
            };
            mpo_pcs(&cs, n, &options)?.into_matrix()
        }
    };
    write_rho(&a.out, &est)?;
    eprintln!("wrote {}", a.out.display());
    if let Some(path) = a.truth {
        let truth = read_rho(&path)?;
        let err = ErrorRecord::between(&est, &truth)?;
        println!(
            "frob_err_sq,trace_err\n{},{}",
            err.frob_err_sq, err.trace_err
        );
    }
    Ok(())
}

fn run_configs(configs: &[ExperimentConfig], out: &Path, workers: usize) -> Result<()> {
    for cfg in configs {
        let start = std::time::Instant::now();
        let table = run_experiment(cfg, workers)?;
        let (trials, summary) = write_outputs(out, cfg, &table)?;
        eprintln!(
            "{}: {} rows in {:.1}s -> {}, {}",
            cfg.experiment_id,
            table.rows.len(),
            start.elapsed().as_secs_f64(),
            trials.display(),
            summary.display()
        );
    }
    Ok(())
}

fn experiment(cmd: ExperimentCmd) -> Result<()> {
    match cmd {
        ExperimentCmd::Run {
            config,
            out,
            workers,
            seed,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            run_configs(&[cfg], &out, workers)
        }
        ExperimentCmd::Preset {
            name,
            out,
            full,
            workers,
        } => {
            let preset: Preset = name.parse()?;
            run_configs(&preset_configs(preset, full), &out, workers)
        }
    }
}

fn report(cmd: ReportCmd) -> Result<()> {
    match cmd {
        ReportCmd::Summarize { csv, out } => {
            let rows = summarize_rows(&read_trials_csv(&csv)?)?;
            match out {
                Some(path) => write_summary_csv(&path, &rows),
                None => write_summary_to(std::io::stdout().lock(), Path::new("<stdout>"), &rows),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::State(StateCmd::Gen(a)) => gen_state(a),
        Command::Measure(a) => measure(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Experiment(c) => experiment(c),
        Command::Report(c) => report(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else if e.is_numeric_error() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
