//! Projected classical shadow tomography.
//!
//! Simulates single-shot Haar-random projective measurements, forms the
//! classical-shadow estimate, and projects it onto physical state sets
//! (all density matrices, rank-r states, or MPO states via TT-SVD).
//! The [`harness`] module runs seeded Monte Carlo error-scaling experiments.

pub mod error;
pub mod harness;
pub mod io;
pub mod measurement;
pub mod metrics;
pub mod numerics;
pub mod projections;
pub mod states;

pub use error::{PcsError, Result};
