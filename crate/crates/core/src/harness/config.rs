use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PcsError, Result};
use crate::numerics::TOLERANCES;
use crate::projections::BondControl;

/// Ground-truth family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Lowrank { rank: usize },
    Mps { bond: usize },
    Thermal { temperature: f64 },
    Ghz,
}

/// Reconstruction applied to the shared shadow estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MethodSpec {
    Cs,
    SimplexPcs,
    LrPcs {
        rank: usize,
    },
    /// Exactly one of `cap`, `tol`, `truth_tol`. `truth_tol` runs TT-SVD on the
    /// ground truth at that tolerance and caps each bond of the estimate at the
    /// dimension found there.
    MpoPcs {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truth_tol: Option<f64>,
        #[serde(default)]
        hermitize_first: bool,
    },
}

/// How an MPO method picks bonds, once validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MpoBonds {
    Cap(usize),
    Tolerance(f64),
    TruthTolerance(f64),
}

impl MpoBonds {
    pub fn direct(self) -> Option<BondControl> {
        match self {
            MpoBonds::Cap(c) => Some(BondControl::Cap(c)),
            MpoBonds::Tolerance(t) => Some(BondControl::Tolerance(t)),
            MpoBonds::TruthTolerance(_) => None,
        }
    }
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Cs => "cs",
            MethodSpec::SimplexPcs => "simplex-pcs",
            MethodSpec::LrPcs { .. } => "lr-pcs",
            MethodSpec::MpoPcs { .. } => "mpo-pcs",
        }
    }

    /// Parameter label written to the `method_param` column.
    pub fn param(&self) -> String {
        match self {
            MethodSpec::Cs | MethodSpec::SimplexPcs => String::new(),
            MethodSpec::LrPcs { rank } => format!("r={rank}"),
            MethodSpec::MpoPcs { hermitize_first, .. } => {
                let base = match self.mpo_bonds() {
                    Ok(MpoBonds::Cap(c)) => format!("D={c}"),
                    Ok(MpoBonds::Tolerance(t)) => format!("tol={t:e}"),
                    Ok(MpoBonds::TruthTolerance(t)) => format!("truth-tol={t:e}"),
                    Err(_) => "invalid".into(),
                };
                if *hermitize_first {
                    format!("{base};hermitize-first")
                } else {
                    base
                }
            }
        }
    }

    pub fn mpo_bonds(&self) -> Result<MpoBonds> {
        match self {
            MethodSpec::MpoPcs { cap, tol, truth_tol, .. } => match (cap, tol, truth_tol) {
                (Some(c), None, None) => Ok(MpoBonds::Cap(*c)),
                (None, Some(t), None) => Ok(MpoBonds::Tolerance(*t)),
                (None, None, Some(t)) => Ok(MpoBonds::TruthTolerance(*t)),
                _ => Err(PcsError::Config(
                    "mpo-pcs needs exactly one of cap, tol, truth_tol".into(),
                )),
            },
            _ => Err(PcsError::invalid(format!("{} has no bond control", self.name()))),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.param();
        if p.is_empty() {
            f.write_str(self.name())
        } else {
            write!(f, "{}({p})", self.name())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub n_qubits: usize,
    pub state: StateSpec,
    pub methods: Vec<MethodSpec>,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// New ground truth for each trial index; otherwise one truth is shared.
    pub fresh_state_per_trial: bool,
}

fn config_err(msg: impl Into<String>) -> PcsError {
    PcsError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PcsError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            PcsError::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if self.experiment_id.trim().is_empty() {
            return Err(config_err("experiment_id is empty"));
        }
        if n == 0 || n > TOLERANCES.dense_qubit_limit {
            return Err(config_err(format!(
                "n_qubits must be in 1..={}, got {n}",
                TOLERANCES.dense_qubit_limit
            )));
        }
        let dim = self.dim();
        match self.state {
            StateSpec::Lowrank { rank } if rank == 0 || rank > dim => {
                return Err(config_err(format!("lowrank rank must be in 1..={dim}")))
            }
            StateSpec::Mps { bond: 0 } => return Err(config_err("mps bond must be >= 1")),
            StateSpec::Thermal { temperature } if !(temperature > 0.0 && temperature.is_finite()) => {
                return Err(config_err("thermal temperature must be positive and finite"))
            }
            _ => {}
        }
        if self.methods.is_empty() {
            return Err(config_err("no methods configured"));
        }
        for (k, m) in self.methods.iter().enumerate() {
            match m {
                MethodSpec::LrPcs { rank } if *rank == 0 || *rank > dim => {
                    return Err(config_err(format!("lr-pcs rank must be in 1..={dim}")))
                }
                MethodSpec::MpoPcs { .. } => match m.mpo_bonds()? {
                    MpoBonds::Cap(0) => return Err(config_err("mpo-pcs cap must be >= 1")),
                    MpoBonds::Tolerance(t) | MpoBonds::TruthTolerance(t)
                        if !(t >= 0.0 && t.is_finite()) =>
                    {
                        return Err(config_err("mpo-pcs tolerance must be finite and >= 0"))
                    }
                    _ => {}
                },
                _ => {}
            }
            if self.methods[..k].contains(m) {
                return Err(config_err(format!("method {m} listed twice")));
            }
        }
        if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return Err(config_err("m_grid must be non-empty with every M >= 1"));
        }
        let mut sorted = self.m_grid.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.m_grid.len() {
            return Err(config_err("m_grid has duplicate entries"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be >= 1"));
        }
        Ok(())
    }
}
