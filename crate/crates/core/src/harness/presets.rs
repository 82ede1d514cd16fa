use std::fmt;
use std::str::FromStr;

use super::config::{ExperimentConfig, MethodSpec, StateSpec};
use crate::error::PcsError;

/// Master seed shared by all presets.
pub const PRESET_SEED: u64 = 0x5eed_2024;
const TRIALS: usize = 10;
const TT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// n = 4 random low-rank states, r ∈ {1, 4, 16}: CS vs simplex and LR projection.
    Fig2,
    /// n = 7 random MPS with d ∈ {1, 2} (MPO bond 1 and 4): CS vs MPO projection.
    Fig3,
    /// n = 7 thermal (T = 0.2, 2) and GHZ states, all methods over M.
    Fig4,
    /// Qubit sweep n = 3..7 at M = 3000 for the same three states.
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = PcsError;

    fn from_str(s: &str) -> Result<Self, PcsError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| PcsError::Config(format!("unknown preset {s:?}; expected fig2..fig5")))
    }
}

fn truth_tol_mpo() -> MethodSpec {
    MethodSpec::MpoPcs {
        cap: None,
        tol: None,
        truth_tol: Some(TT_TOL),
        hermitize_first: false,
    }
}

fn config(
    id: String,
    n: usize,
    state: StateSpec,
    methods: Vec<MethodSpec>,
    m_grid: &[usize],
    fresh: bool,
) -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: id,
        n_qubits: n,
        state,
        methods,
        m_grid: m_grid.to_vec(),
        trials: TRIALS,
        master_seed: PRESET_SEED,
        fresh_state_per_trial: fresh,
    }
}

/// The three tailored states and their LR-PCS rank at `n` qubits.
fn tailored(n: usize) -> [(String, StateSpec, usize); 3] {
    [
        ("thermal-t0.2".into(), StateSpec::Thermal { temperature: 0.2 }, 4),
        (
            "thermal-t2".into(),
            StateSpec::Thermal { temperature: 2.0 },
            if n == 7 { 24 } else { 4 * (n - 1) },
        ),
        ("ghz".into(), StateSpec::Ghz, 1),
    ]
}

/// Configs for a preset. `full` selects the longer M grids.
pub fn preset_configs(preset: Preset, full: bool) -> Vec<ExperimentConfig> {
    match preset {
        Preset::Fig2 => {
            let grid: &[usize] = if full {
                &[250, 500, 1000, 2500, 5000, 10000]
            } else {
                &[250, 1000, 4000]
            };
            [1, 4, 16]
                .into_iter()
                .map(|r| {
                    config(
                        format!("fig2-r{r}"),
                        4,
                        StateSpec::Lowrank { rank: r },
                        vec![MethodSpec::Cs, MethodSpec::SimplexPcs, MethodSpec::LrPcs { rank: r }],
                        grid,
                        true,
                    )
                })
                .collect()
        }
        Preset::Fig3 => {
            let grid: &[usize] = if full {
                &[500, 1000, 2000, 4000, 8000, 10000]
            } else {
                &[2000, 8000]
            };
            [1, 2]
                .into_iter()
                .map(|d| {
                    let cap = d * d;
                    config(
                        format!("fig3-d{d}"),
                        7,
                        StateSpec::Mps { bond: d },
                        vec![
                            MethodSpec::Cs,
                            MethodSpec::MpoPcs {
                                cap: Some(cap),
                                tol: None,
                                truth_tol: None,
                                hermitize_first: false,
                            },
                        ],
                        grid,
                        true,
                    )
                })
                .collect()
        }
        Preset::Fig4 => {
            let grid: &[usize] = if full {
                &[100, 316, 1000, 3162, 10000]
            } else {
                &[100, 400, 1600]
            };
            tailored(7)
                .into_iter()
                .map(|(name, state, r)| {
                    config(
                        format!("fig4-{name}"),
                        7,
                        state,
                        vec![
                            MethodSpec::Cs,
                            MethodSpec::SimplexPcs,
                            MethodSpec::LrPcs { rank: r },
                            truth_tol_mpo(),
                        ],
                        grid,
                        false,
                    )
                })
                .collect()
        }
        Preset::Fig5 => (3..=7)
            .flat_map(|n| {
                tailored(n).into_iter().map(move |(name, state, r)| {
                    config(
                        format!("fig5-{name}-n{n}"),
                        n,
                        state,
                        vec![MethodSpec::Cs, MethodSpec::LrPcs { rank: r }, truth_tol_mpo()],
                        &[3000],
                        false,
                    )
                })
            })
            .collect(),
    }
}
