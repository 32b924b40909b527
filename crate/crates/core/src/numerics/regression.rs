use serde::Serialize;

use crate::{Error, Result};

/// Least-squares line through `(ln x, ln y)` pairs, or through raw pairs for [`linear_fit`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: Vec<(f64, f64)>,
}

/// Unweighted least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<SlopeReport> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok(SlopeReport { slope, intercept, residual_rms: (ss / n).sqrt(), points: points.to_vec() })
}

/// Slope of `ln value` against `ln x`. `points` keeps the raw pairs.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<SlopeReport> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    for &(x, value) in points {
        if !(value > 0.0) || !(x > 0.0) {
            return Err(Error::NonPositiveValue { x, value });
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mut rep = linear_fit(&logs)?;
    rep.points = points.to_vec();
    Ok(rep)
}
