use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_trace, EchoFit, EchoFitOptions};
use super::trace::EchoTrace;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub intercept_se: f64,
    pub rss: f64,
}

/// Ordinary least squares y = a + b x with standard errors.
pub fn ols_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a line fit with errors needs at least 3 points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all strain values are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = rss / (n - 2) as f64;
    let sum_x2: f64 = x.iter().map(|v| v * v).sum();
    Ok(LineFit {
        slope,
        slope_se: (s2 / sxx).sqrt(),
        intercept,
        intercept_se: (s2 * sum_x2 / (n as f64 * sxx)).sqrt(),
        rss,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftSeries {
    pub strains: Vec<f64>,
    pub detunings_hz: Vec<f64>,
    pub fits: Vec<EchoFit>,
    /// df/d eps_11 with intercept, Hz.
    pub line: LineFit,
}

/// Fits every trace (in parallel) and regresses detuning on strain.
pub fn extract_shift_series(traces: &[EchoTrace], strains: &[f64], opts: &EchoFitOptions) -> Result<ShiftSeries> {
    if traces.len() != strains.len() {
        return Err(Error::InvalidArgument(format!(
            "{} traces but {} strain values",
            traces.len(),
            strains.len()
        )));
    }
    if traces.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 strain points, got {}", traces.len())));
    }
    let fits = traces.par_iter().map(|t| fit_trace(t, opts)).collect::<Result<Vec<_>>>()?;
    let detunings: Vec<f64> = fits.iter().map(|f| f.detuning_hz).collect();
    let line = ols_line(strains, &detunings)?;
    Ok(ShiftSeries { strains: strains.to_vec(), detunings_hz: detunings, fits, line })
}
