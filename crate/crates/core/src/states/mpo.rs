use crate::error::{PcsError, Result};
use crate::numerics::{ComplexMatrix, Complex64, TOLERANCES};
use crate::projections::tt::contract_train;

use super::index::tensor_to_matrix;

/// Density matrix in matrix-product form,
/// `ρ(i₁⋯iₙ, j₁⋯jₙ) = X₁^{i₁,j₁} X₂^{i₂,j₂} ⋯ Xₙ^{iₙ,jₙ}`.
///
/// Core ℓ is held as a `(D_{ℓ-1}·4) × D_ℓ` matrix whose row is
/// `a + D_{ℓ-1}·(i + 2j)`; [`MpoState::entry`] gives the `(a, i, j, b)` view.
#[derive(Debug, Clone, PartialEq)]
pub struct MpoState {
    n_qubits: usize,
    /// `D₀ … Dₙ`, with `D₀ = Dₙ = 1`.
    bonds: Vec<usize>,
    cores: Vec<ComplexMatrix>,
}

impl MpoState {
    /// Builds from cores in train layout, checking shapes and boundary bonds.
    pub fn from_train_cores(cores: Vec<ComplexMatrix>) -> Result<Self> {
        if cores.is_empty() {
            return Err(PcsError::invalid("MPO needs at least one core"));
        }
        let mut bonds = Vec::with_capacity(cores.len() + 1);
        bonds.push(1);
        for (l, core) in cores.iter().enumerate() {
            let left = bonds[l];
            if core.nrows() != left * 4 {
                return Err(PcsError::invalid(format!(
                    "core {l} has {} rows, expected {}",
                    core.nrows(),
                    left * 4
                )));
            }
            if core.ncols() == 0 {
                return Err(PcsError::invalid(format!("core {l} has zero bond")));
            }
            bonds.push(core.ncols());
        }
        if *bonds.last().unwrap() != 1 {
            return Err(PcsError::invalid("last MPO bond must be 1"));
        }
        Ok(Self {
            n_qubits: cores.len(),
            bonds,
            cores,
        })
    }

    /// Builds from cores given as `(a, i, j, b)`-lexicographic entry lists.
    pub fn from_lexicographic(bonds: &[usize], entries: &[Vec<Complex64>]) -> Result<Self> {
        if bonds.len() != entries.len() + 1 {
            return Err(PcsError::invalid("bond list must have n + 1 entries"));
        }
        if bonds.first() != Some(&1) || bonds.last() != Some(&1) {
            return Err(PcsError::invalid("boundary bonds must equal 1"));
        }
        let mut cores = Vec::with_capacity(entries.len());
        for (l, data) in entries.iter().enumerate() {
            let (dl, dr) = (bonds[l], bonds[l + 1]);
            if data.len() != dl * 4 * dr {
                return Err(PcsError::invalid(format!(
                    "core {l} has {} entries, expected {}",
                    data.len(),
                    dl * 4 * dr
                )));
            }
            let mut core = ComplexMatrix::zeros(dl * 4, dr);
            for a in 0..dl {
                for i in 0..2 {
                    for j in 0..2 {
                        for b in 0..dr {
                            core[(a + dl * (i + 2 * j), b)] = data[((a * 2 + i) * 2 + j) * dr + b];
                        }
                    }
                }
            }
            cores.push(core);
        }
        Self::from_train_cores(cores)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Internal bonds `D₁ … D_{n-1}`.
    pub fn bond_dims(&self) -> &[usize] {
        &self.bonds[1..self.n_qubits]
    }

    /// All bonds including the two boundary ones.
    pub fn all_bonds(&self) -> &[usize] {
        &self.bonds
    }

    pub fn max_bond(&self) -> usize {
        self.bonds.iter().copied().max().unwrap_or(1)
    }

    pub fn train_cores(&self) -> &[ComplexMatrix] {
        &self.cores
    }

    pub fn entry(&self, core: usize, a: usize, i: usize, j: usize, b: usize) -> Complex64 {
        self.cores[core][(a + self.bonds[core] * (i + 2 * j), b)]
    }

    /// Core entries in `(a, i, j, b)` lexicographic order.
    pub fn lexicographic(&self, core: usize) -> Vec<Complex64> {
        let (dl, dr) = (self.bonds[core], self.bonds[core + 1]);
        let mut out = Vec::with_capacity(dl * 4 * dr);
        for a in 0..dl {
            for i in 0..2 {
                for j in 0..2 {
                    for b in 0..dr {
                        out.push(self.entry(core, a, i, j, b));
                    }
                }
            }
        }
        out
    }

    /// The `D_{ℓ-1} × D_ℓ` matrix `X_ℓ^{i,j}`.
    pub fn slice(&self, core: usize, i: usize, j: usize) -> ComplexMatrix {
        let (dl, dr) = (self.bonds[core], self.bonds[core + 1]);
        ComplexMatrix::from_fn(dl, dr, |a, b| self.entry(core, a, i, j, b))
    }

    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        mpo_to_dense(self)
    }
}

/// Contracts an MPO to its dense `2^n × 2^n` matrix.
pub fn mpo_to_dense(m: &MpoState) -> Result<ComplexMatrix> {
    let limit = TOLERANCES.dense_qubit_limit;
    if m.n_qubits > limit {
        return Err(PcsError::Capacity {
            what: "qubits for dense MPO contraction",
            requested: m.n_qubits,
            limit,
        });
    }
    let data = contract_train(&m.cores, 4);
    Ok(tensor_to_matrix(&data, m.n_qubits))
}
