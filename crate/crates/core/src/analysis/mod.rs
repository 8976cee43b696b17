//! Diagnostics built on top of the model: entropy budgets, Knudsen ordering,
//! prescribed-field evaluation, mechanical identities and dispersion.

pub mod dispersion;
pub mod entropy;
pub mod knudsen;
pub mod mechanics;
pub mod prescribed;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!("line fit needs 2 points, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Mismatch at each resolution plus the fitted order. The order is `None`
/// when the mismatch is already at round-off.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub resolutions: Vec<usize>,
    pub spacing: Vec<f64>,
    pub error: Vec<f64>,
    pub order: Option<f64>,
}

impl ConvergenceReport {
    pub fn new(resolutions: Vec<usize>, spacing: Vec<f64>, error: Vec<f64>) -> Self {
        let order = if error.iter().all(|e| *e > 1e-13) {
            convergence_order(&spacing, &error).ok()
        } else {
            None
        };
        Self {
            resolutions,
            spacing,
            error,
            order,
        }
    }
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0)) {
        return Err(Error::InsufficientData(format!("log-log fit needs positive data, got {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(least_squares(&lx, &ly)?.slope)
}

/// Observed order of accuracy from errors at mesh spacings `h`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> Result<f64> {
    loglog_slope(h, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
        let y: Vec<f64> = x.iter().map(|v: &f64| 4.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(least_squares(&[1.0], &[2.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        assert!(least_squares(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }
}
