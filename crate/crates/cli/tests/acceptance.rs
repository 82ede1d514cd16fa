//! Desk-scale acceptance gate. Prints one PASS/FAIL line per criterion; run with
//! `cargo test -p pcs-cli --test acceptance -- --nocapture` to see them.

use std::path::Path;
use std::process::Command;

use nalgebra::SymmetricEigen;
use pcs_core::harness::{
    preset_configs, run_experiment, summarize_rows, ExperimentConfig, MethodSpec, Preset,
    StateSpec, SummaryRow,
};
use pcs_core::measurement::ShadowSampler;
use pcs_core::metrics::{fit_power_law, frobenius_distance, predicted_mse};
use pcs_core::numerics::{
    haar_unitary, unitarity_defect, ComplexMatrix, Complex64, HaarFactors, RngStream,
};
use pcs_core::projections::{project_simplex_state, tt_svd, BondControl};
use pcs_core::states::{ghz_state, random_lowrank_state, DensityMatrix, MpoState};

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    let line = format!(
        "[{}] criterion {id} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    Outcome { id, name, pass, detail }
}

fn summaries(preset: Preset) -> Vec<(ExperimentConfig, Vec<SummaryRow>)> {
    preset_configs(preset, false)
        .into_iter()
        .map(|cfg| {
            let table = run_experiment(&cfg, 1).unwrap();
            let rows = summarize_rows(&table.rows).unwrap();
            (cfg, rows)
        })
        .collect()
}

fn mean_of(rows: &[SummaryRow], method: &str, m: usize) -> f64 {
    rows.iter()
        .find(|r| r.method == method && r.m == m)
        .unwrap_or_else(|| panic!("no {method} row at M={m}"))
        .mean_mse
}

fn maximally_mixed(n: usize) -> DensityMatrix {
    let d = 1 << n;
    DensityMatrix::new(ComplexMatrix::identity(d, d) / Complex64::new(d as f64, 0.0)).unwrap()
}

fn empirical_mse(rho: &DensityMatrix, m: usize, reps: u64, seed: u64) -> f64 {
    let sampler = ShadowSampler::new(rho).unwrap();
    let master = RngStream::new(seed);
    (0..reps)
        .map(|r| {
            let cs = sampler.simulate(m, &master.split(r)).unwrap().cs_estimate().unwrap();
            frobenius_distance(&cs, rho.matrix()).unwrap().powi(2)
        })
        .sum::<f64>()
        / reps as f64
}

fn criterion_1() -> Outcome {
    let pure = random_lowrank_state(2, 1, &mut RngStream::new(101)).unwrap();
    let a = empirical_mse(&pure, 50, 2000, 102);
    let pa = predicted_mse(&pure, 50).unwrap();
    let mixed = maximally_mixed(3);
    let b = empirical_mse(&mixed, 100, 2000, 103);
    let pb = predicted_mse(&mixed, 100).unwrap();
    let (ea, eb) = ((a / pa - 1.0).abs(), (b / pb - 1.0).abs());
    outcome(
        1,
        "MSE identity",
        ea < 0.05 && eb < 0.05 && (pa - 0.36).abs() < 1e-12 && (pb - 0.70875).abs() < 1e-12,
        format!(
            "n=2 pure: {a:.4} vs {pa} ({:.1}% off); n=3 I/8: {b:.4} vs {pb} ({:.1}% off)",
            100.0 * ea,
            100.0 * eb
        ),
    )
}

fn criterion_2(fig2: &[(ExperimentConfig, Vec<SummaryRow>)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (cfg, rows) in fig2 {
        let ms: Vec<f64> = cfg.m_grid.iter().map(|&m| m as f64).collect();
        let mse: Vec<f64> = cfg.m_grid.iter().map(|&m| mean_of(rows, "cs", m)).collect();
        let fit = fit_power_law(&ms, &mse).unwrap();
        let ratio = fit.prefactor / 4f64.powi(cfg.n_qubits as i32);
        pass &= (fit.exponent + 1.0).abs() <= 0.1 && (1.0 / 1.5..=1.5).contains(&ratio);
        parts.push(format!(
            "{} slope {:.3} prefactor/4^n {:.3}",
            cfg.experiment_id, fit.exponent, ratio
        ));
    }
    outcome(2, "CS scaling slope", pass, parts.join("; "))
}

fn criterion_3(sets: &[&[(ExperimentConfig, Vec<SummaryRow>)]]) -> Outcome {
    let mut checked = 0;
    let mut violations = Vec::new();
    for set in sets {
        for (cfg, rows) in set.iter() {
            for &m in &cfg.m_grid {
                let cs = mean_of(rows, "cs", m);
                for r in rows.iter().filter(|r| r.m == m && r.method != "cs") {
                    checked += 1;
                    if r.mean_mse > cs {
                        violations.push(format!(
                            "{} {} M={m}: {:.4} > cs {:.4}",
                            cfg.experiment_id, r.method, r.mean_mse, cs
                        ));
                    }
                }
            }
        }
    }
    outcome(
        3,
        "projection dominance",
        violations.is_empty() && checked > 0,
        if violations.is_empty() {
            format!("{checked} (method, cell) pairs at or below CS")
        } else {
            violations.join("; ")
        },
    )
}

fn criterion_4() -> Outcome {
    let run = |rank: usize| {
        let cfg = ExperimentConfig {
            experiment_id: format!("rank-scaling-r{rank}"),
            n_qubits: 4,
            state: StateSpec::Lowrank { rank },
            methods: vec![MethodSpec::LrPcs { rank }],
            m_grid: vec![4000],
            trials: 20,
            master_seed: 404,
            fresh_state_per_trial: true,
        };
        summarize_rows(&run_experiment(&cfg, 1).unwrap().rows).unwrap()[0].mean_mse
    };
    let (r1, r4) = (run(1), run(4));
    let ratio = r1 / r4;
    outcome(
        4,
        "rank scaling",
        (0.125..=0.5).contains(&ratio),
        format!("MSE(r=1) {r1:.4e} / MSE(r=4) {r4:.4e} = {ratio:.3}, window [0.125, 0.5]"),
    )
}

fn criterion_5(fig3: &[(ExperimentConfig, Vec<SummaryRow>)]) -> Outcome {
    let (d1, d2) = (&fig3[0], &fig3[1]);
    let mut pass = true;
    let mut parts = Vec::new();
    for &m in &d1.0.m_grid {
        let (a, b) = (mean_of(&d1.1, "mpo-pcs", m), mean_of(&d2.1, "mpo-pcs", m));
        let (ca, cb) = (mean_of(&d1.1, "cs", m), mean_of(&d2.1, "cs", m));
        pass &= a < b && a < ca && b < cb;
        parts.push(format!("M={m}: D=1 {a:.3e} < D=4 {b:.3e}; cs {ca:.3e}/{cb:.3e}"));
    }
    outcome(5, "bond-dimension ordering", pass, parts.join("; "))
}

/// Projection by enumerating every support set of the spectrum and keeping the
/// one that satisfies the KKT conditions.
fn kkt_oracle(h: &ComplexMatrix) -> ComplexMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let d = lam.len();
    let mut best: Option<Vec<f64>> = None;
    for mask in 1u32..(1 << d) {
        let support: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let tau = (support.iter().map(|&i| lam[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let ok = (0..d).all(|i| {
            if mask >> i & 1 == 1 {
                lam[i] - tau >= -1e-14
            } else {
                lam[i] - tau <= 1e-14
            }
        });
        if ok {
            best = Some((0..d).map(|i| if mask >> i & 1 == 1 { lam[i] - tau } else { 0.0 }).collect());
            break;
        }
    }
    let w = best.expect("KKT conditions always have a solution");
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, wk) in w.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * Complex64::new(*wk, 0.0);
    }
    out
}

fn criterion_6() -> Outcome {
    let mut rng = RngStream::new(606);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 0..1000 {
        let d = [2, 4, 8][k % 3];
        let scale = [0.05, 0.3, 1.0][(k / 3) % 3];
        let g = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal() * scale);
        let mut h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        let shift = (1.0 - h.trace().re) / d as f64;
        for i in 0..d {
            h[(i, i)] += Complex64::new(shift, 0.0);
        }
        let ours = project_simplex_state(&h).unwrap();
        worst = worst.max(frobenius_distance(ours.matrix(), &kkt_oracle(&h)).unwrap());
        count += 1;
    }
    outcome(
        6,
        "simplex oracle equivalence",
        worst <= 1e-10,
        format!("{count} matrices, max Frobenius gap {worst:.2e}"),
    )
}

fn random_mpo(n: usize, bond: usize, rng: &mut RngStream) -> MpoState {
    let mut bonds = vec![bond; n + 1];
    bonds[0] = 1;
    bonds[n] = 1;
    let entries: Vec<Vec<Complex64>> = (0..n)
        .map(|l| (0..bonds[l] * 4 * bonds[l + 1]).map(|_| rng.complex_normal()).collect())
        .collect();
    MpoState::from_lexicographic(&bonds, &entries).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = RngStream::new(707);
    let mut worst_exact: f64 = 0.0;
    for n in 2..=7 {
        for bond in 1..=3 {
            let dense = random_mpo(n, bond, &mut rng).to_dense().unwrap();
            let dense = &dense / Complex64::new(dense.norm(), 0.0);
            let (mpo, _) = tt_svd(&dense, n, &BondControl::Cap(bond)).unwrap();
            worst_exact = worst_exact.max((mpo.to_dense().unwrap() - &dense).norm());
        }
    }
    let mut worst_bound: f64 = 0.0;
    for k in 0..100 {
        let n = 2 + k % 4;
        let d = 1 << n;
        let h = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
        let (mpo, report) = tt_svd(&h, n, &BondControl::Cap(2)).unwrap();
        let err = (&h - mpo.to_dense().unwrap()).norm();
        worst_bound = worst_bound.max(err / report.error_bound() - 1.0);
    }
    let (ghz, _) = tt_svd(ghz_state(3).unwrap().matrix(), 3, &BondControl::Tolerance(1e-14)).unwrap();
    let ghz_bonds = ghz.bond_dims().to_vec();
    outcome(
        7,
        "TT-SVD contracts",
        worst_exact <= 1e-10 && worst_bound <= 1e-8 && ghz_bonds == [4, 4],
        format!(
            "exact recovery max err {worst_exact:.2e}; error/bound - 1 at most {worst_bound:.2e}; GHZ(3) bonds {ghz_bonds:?}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = RngStream::new(808);
    let mut worst_unitarity: f64 = 0.0;
    for dim in [1, 2, 3, 4, 8, 16, 64, 128] {
        for _ in 0..20 {
            worst_unitarity = worst_unitarity.max(unitarity_defect(&haar_unitary(dim, &mut rng).unwrap()));
            worst_unitarity =
                worst_unitarity.max(unitarity_defect(&HaarFactors::sample(dim, &mut rng).unwrap().to_dense()));
        }
    }
    let n = 100_000;
    let mut worst_z: f64 = 0.0;
    for dim in [2usize, 4, 8] {
        let mut mean = ComplexMatrix::zeros(dim, dim);
        for _ in 0..n {
            let u = haar_unitary(dim, &mut rng).unwrap();
            let c = u.column(0);
            mean += c * c.adjoint();
        }
        mean /= Complex64::new(n as f64, 0.0);
        let d = dim as f64;
        let sd_diag = ((d - 1.0) / (d * d * (d + 1.0)) / n as f64).sqrt();
        let sd_off = (1.0 / (2.0 * d * (d + 1.0)) / n as f64).sqrt();
        for i in 0..dim {
            for j in 0..dim {
                let z = mean[(i, j)];
                let score = if i == j {
                    (z.re - 1.0 / d).abs() / sd_diag
                } else {
                    z.re.abs().max(z.im.abs()) / sd_off
                };
                worst_z = worst_z.max(score);
            }
        }
    }
    outcome(
        8,
        "Haar sampler statistics",
        worst_unitarity <= 1e-12 && worst_z < 3.0,
        format!("max unitarity defect {worst_unitarity:.2e}; max first-moment deviation {worst_z:.2} sigma"),
    )
}

fn strip_wall_ms(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("determinism.toml");
    std::fs::write(
        &config,
        r#"experiment_id = "determinism"
n_qubits = 4
m_grid = [300, 1200]
trials = 4
master_seed = 909
fresh_state_per_trial = true

[state]
family = "lowrank"
rank = 3

[[methods]]
kind = "cs"

[[methods]]
kind = "simplex-pcs"

[[methods]]
kind = "lr-pcs"
rank = 3

[[methods]]
kind = "mpo-pcs"
cap = 4
"#,
    )
    .unwrap();
    let run = |workers: &str| {
        let out = dir.path().join(format!("w{workers}"));
        let status = Command::new(env!("CARGO_BIN_EXE_pcs"))
            .args(["experiment", "run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers])
            .status()
            .unwrap();
        assert!(status.success());
        strip_wall_ms(&out.join("determinism_trials.csv"))
    };
    let (one, eight) = (run("1"), run("8"));
    let rows = one.lines().count() - 1;
    outcome(
        9,
        "determinism",
        one == eight && rows == 32,
        format!("{rows} rows; workers 1 vs 8 identical: {}", one == eight),
    )
}

#[test]
fn acceptance_criteria() {
    let fig2 = summaries(Preset::Fig2);
    let fig3 = summaries(Preset::Fig3);
    let fig4 = summaries(Preset::Fig4);
    let results = vec![
        criterion_1(),
        criterion_2(&fig2),
        criterion_3(&[&fig2, &fig3, &fig4]),
        criterion_4(),
        criterion_5(&fig3),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    let failed: Vec<String> = results
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{} {} ({})", o.id, o.name, o.detail))
        .collect();
    println!(
        "acceptance: {}/{} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
