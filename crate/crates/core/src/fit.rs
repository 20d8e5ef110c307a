//! Least-squares power-law fits in log-log coordinates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope; infinite with only two points.
    pub slope_ci95: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `log y = slope * log x + intercept`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "{} abscissae for {} ordinates",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("a fit needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Degenerate("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let ss_tot: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let slope_ci95 = if lx.len() > 2 {
        let dof = n - 2.0;
        let se = (ss_res / dof / sxx).sqrt();
        let q = StudentsT::new(0.0, 1.0, dof)
            .map_err(|e| Error::Degenerate(e.to_string()))?
            .inverse_cdf(0.975);
        (slope - q * se, slope + q * se)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    Ok(LogLogFit {
        slope,
        intercept,
        slope_ci95,
        r_squared,
        points: lx.len(),
    })
}
