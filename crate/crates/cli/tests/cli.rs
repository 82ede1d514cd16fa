use std::path::Path;
use std::process::{Command, Output};

fn pcs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcs"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = pcs(args, dir);
    assert!(
        out.status.success(),
        "pcs {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn errors(stdout: &str) -> (f64, f64) {
    let line = stdout.lines().nth(1).unwrap();
    let (f, t) = line.split_once(',').unwrap();
    (f.parse().unwrap(), t.parse().unwrap())
}

#[test]
fn gen_measure_reconstruct_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "state", "gen", "--family", "lowrank", "--n", "3", "--rank", "1", "--seed", "5",
            "--out", "rho.bin", "--mpo-out", "rho.mpo",
        ],
        d,
    );
    assert!(d.join("rho.mpo").exists());
    ok(
        &["measure", "--state", "rho.bin", "--shots", "4000", "--seed", "1", "--out", "cs.bin"],
        d,
    );

    let cs = errors(&ok(
        &["reconstruct", "--input", "cs.bin", "--method", "cs", "--out", "a.bin", "--truth", "rho.bin"],
        d,
    ));
    let simplex = errors(&ok(
        &[
            "reconstruct", "--input", "cs.bin", "--method", "simplex-pcs", "--out", "b.bin",
            "--truth", "rho.bin",
        ],
        d,
    ));
    let lr = errors(&ok(
        &[
            "reconstruct", "--input", "cs.bin", "--method", "lr-pcs", "--rank", "1", "--out",
            "c.bin", "--truth", "rho.bin",
        ],
        d,
    ));
    let mpo = errors(&ok(
        &[
            "reconstruct", "--input", "cs.bin", "--method", "mpo-pcs", "--cap", "4", "--out",
            "d.bin", "--truth", "rho.bin",
        ],
        d,
    ));
    assert!(simplex.0 <= cs.0, "{simplex:?} vs {cs:?}");
    assert!(lr.0 <= simplex.0, "{lr:?} vs {simplex:?}");
    assert!(mpo.0.is_finite() && mpo.1 >= 0.0);
}

#[test]
fn invalid_state_file_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &["state", "gen", "--family", "ghz", "--n", "2", "--out", "g.bin"],
        d,
    );
    ok(
        &["measure", "--state", "g.bin", "--shots", "3", "--seed", "0", "--out", "cs.bin"],
        d,
    );
    // A three-shot shadow estimate has negative eigenvalues.
    let out = pcs(&["measure", "--state", "cs.bin", "--shots", "10", "--out", "x.bin"], d);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["state", "gen", "--family", "ghz", "--n", "2", "--out", "g.bin"], d);
    let out = pcs(&["measure", "--state", "g.bin", "--shots", "0", "--out", "x.bin"], d);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(d.join("bad.toml"), "experiment_id = \"x\"\nbogus = 1\n").unwrap();
    let out = pcs(&["experiment", "run", "--config", "bad.toml", "--out", "o"], d);
    assert_eq!(out.status.code(), Some(2));

    let out = pcs(&["experiment", "preset", "fig9", "--out", "o"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn snapshot_log_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &["state", "gen", "--family", "mps", "--n", "3", "--bond", "2", "--seed", "8", "--out", "m.bin"],
        d,
    );
    for tag in ["a", "b"] {
        ok(
            &[
                "measure", "--state", "m.bin", "--shots", "600", "--seed", "31", "--out",
                &format!("cs_{tag}.bin"), "--log", &format!("log_{tag}.csv"),
            ],
            d,
        );
    }
    let a = std::fs::read(d.join("log_a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("log_b.csv")).unwrap());
    assert_eq!(String::from_utf8_lossy(&a).lines().count(), 601);
    assert_eq!(
        std::fs::read(d.join("cs_a.bin")).unwrap(),
        std::fs::read(d.join("cs_b.bin")).unwrap()
    );
}

#[test]
fn experiment_run_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("small.toml"),
        r#"experiment_id = "small"
n_qubits = 3
m_grid = [200, 800]
trials = 3
master_seed = 12
fresh_state_per_trial = false

[state]
family = "thermal"
temperature = 1.0

[[methods]]
kind = "cs"

[[methods]]
kind = "lr-pcs"
rank = 2
"#,
    )
    .unwrap();
    ok(&["experiment", "run", "--config", "small.toml", "--out", "res"], d);
    let trials = std::fs::read_to_string(d.join("res/small_trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 3);
    assert!(d.join("res/small_summary.csv").exists());

    let summary = ok(&["report", "summarize", "res/small_trials.csv"], d);
    let lines: Vec<_> = summary.lines().collect();
    assert_eq!(lines.len(), 1 + 4);
    assert_eq!(
        summary,
        std::fs::read_to_string(d.join("res/small_summary.csv")).unwrap()
    );
}
