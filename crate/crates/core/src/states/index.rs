//! Qubit index conventions.
//!
//! Qubit 1 is the least significant bit of a row/column index: row
//! `i₁ i₂ ⋯ iₙ` is `Σ_ℓ 2^(ℓ-1) i_ℓ` with `i_ℓ ∈ {0, 1}`. The n-mode tensor view
//! of a `2^n × 2^n` matrix has mode index `q_ℓ = i_ℓ + 2 j_ℓ` with mode 1
//! fastest. Every reshape between the two views goes through this module.

use crate::numerics::{ComplexMatrix, Complex64};

#[inline]
pub fn bit(index: usize, qubit: usize) -> usize {
    (index >> qubit) & 1
}

/// Flat tensor index of matrix entry `(row, col)`.
pub fn mode_index(row: usize, col: usize, n: usize) -> usize {
    let mut t = 0;
    for l in (0..n).rev() {
        t = 4 * t + bit(row, l) + 2 * bit(col, l);
    }
    t
}

/// Inverse of [`mode_index`].
pub fn split_mode_index(mut t: usize, n: usize) -> (usize, usize) {
    let (mut row, mut col) = (0, 0);
    for l in 0..n {
        let q = t & 3;
        row |= (q & 1) << l;
        col |= (q >> 1) << l;
        t >>= 2;
    }
    (row, col)
}

/// Tensor entries (mode 1 fastest) of a `2^n × 2^n` matrix.
pub fn matrix_to_tensor(h: &ComplexMatrix, n: usize) -> Vec<Complex64> {
    let len = 1usize << (2 * n);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (t, slot) in out.iter_mut().enumerate() {
        let (r, c) = split_mode_index(t, n);
        *slot = h[(r, c)];
    }
    out
}

pub fn tensor_to_matrix(data: &[Complex64], n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (t, z) in data.iter().enumerate() {
        let (r, c) = split_mode_index(t, n);
        out[(r, c)] = *z;
    }
    out
}
