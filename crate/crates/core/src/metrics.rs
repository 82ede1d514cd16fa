//! Error norms, the closed-form shadow MSE and small aggregation helpers.

use crate::error::{PcsError, Result};
use crate::numerics::{singular_values, ComplexMatrix};
use crate::states::DensityMatrix;

fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(PcsError::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    same_shape(a, b)?;
    Ok((a - b).norm())
}

/// Sum of singular values of `a − b`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    same_shape(a, b)?;
    if !a.is_square() {
        return Err(PcsError::invalid("trace distance needs square matrices"));
    }
    Ok(singular_values(&(a - b))?.iter().sum())
}

/// `E‖ρ_CS − ρ*‖_F² = (4^n + 2^n − 1 − ‖ρ*‖_F²) / M`.
pub fn predicted_mse(rho_star: &DensityMatrix, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(PcsError::invalid("M must be at least 1"));
    }
    let d = rho_star.dim() as f64;
    Ok((d * d + d - 1.0 - rho_star.purity()) / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecord {
    pub frob_err: f64,
    pub frob_err_sq: f64,
    pub trace_err: f64,
}

impl ErrorRecord {
    pub fn between(estimate: &ComplexMatrix, truth: &ComplexMatrix) -> Result<Self> {
        let frob_err = frobenius_distance(estimate, truth)?;
        Ok(Self {
            frob_err,
            frob_err_sq: frob_err * frob_err,
            trace_err: trace_distance(estimate, truth)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation over `√count`; zero for a single value.
    pub stderr: f64,
    pub count: usize,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(PcsError::invalid("cannot summarize an empty sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() == 1 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    Ok(Summary {
        mean,
        stderr,
        count: values.len(),
    })
}

/// Least-squares fit of `ln y = ln a + b ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(PcsError::invalid("power-law fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(PcsError::invalid("power-law fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(PcsError::invalid("power-law fit needs distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    Ok(PowerLawFit {
        exponent,
        prefactor: (my - exponent * mx).exp(),
    })
}
