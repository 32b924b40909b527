//! Linear part of `U − B̄ᵢ` around a center, compared with the configuration force.

use serde::Serialize;

use super::field::AnsatzField;
use crate::numerics::linear_fit;
use crate::{Error, Result};

const SAMPLES: usize = 17;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub i: usize,
    pub sample_radius: f64,
    /// Fitted `∂₁(U − B̄ᵢ)` at `τ̄ᵢ`.
    pub slope_x1: f64,
    pub slope_x2: f64,
    pub fit_rms: f64,
    /// `a₀lτᵢ^{l−1} − (2/γ̄)Σ_{j≠i} 1/(τᵢ − τⱼ)`
    pub predicted: f64,
    /// `∂₁` of the smooth part of `U` at `τ̄ᵢ` from the closed-form gradients; uses the
    /// actual heights where `predicted` uses `γ̄` for every bubble.
    pub exact_gradient: f64,
    /// `0.1/(γ̄ d)`
    pub small_threshold: f64,
}

impl ExpansionReport {
    pub fn relative_mismatch(&self) -> f64 {
        (self.slope_x1 - self.predicted).abs() / self.predicted.abs()
    }
}

/// Force on center `i` at leading order.
pub fn predicted_slope(field: &AnsatzField, i: usize) -> f64 {
    let s = &field.schedule;
    let a0 = field.weak_limit.a0;
    let l = s.l as i32;
    let t = field.centers[i];
    let mut v = a0 * l as f64 * t.powi(l - 1);
    for (j, &tj) in field.centers.iter().enumerate() {
        if j != i {
            v -= 2.0 / s.gamma_bar / (t - tj);
        }
    }
    v
}

/// `∇(U − B̄ᵢ)` at `τ̄ᵢ`.
pub fn smooth_gradient(field: &AnsatzField, i: usize) -> [f64; 2] {
    let c = field.center(i);
    let mut g = field.weak_limit.sample(c).gradient;
    for j in 0..field.k() {
        // the inner branch of Bᵢ at its own center has only the A·∇H part
        let b = field.truncated_bubble_gradient(j, c);
        g[0] += (1.0 + field.thetas[j]) * b[0];
        g[1] += (1.0 + field.thetas[j]) * b[1];
    }
    g
}

/// Samples `U − B̄ᵢ` along both axes through `τ̄ᵢ` within `fraction·r` and fits slopes.
pub fn pointwise_expansion_check(field: &AnsatzField, i: usize, fraction: f64) -> Result<ExpansionReport> {
    if i >= field.k() {
        return Err(Error::InvalidInput(format!("center index {i} out of range")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!("sample fraction must lie in (0, 1), got {fraction}")));
    }
    let rho = fraction * field.truncation_radius();
    let c = field.center(i);
    let base = field.perturbation(i, c);
    let offsets: Vec<f64> =
        (0..SAMPLES).map(|m| rho * (2.0 * m as f64 / (SAMPLES - 1) as f64 - 1.0)).collect();
    let along = |e: [f64; 2]| -> Result<_> {
        let pts: Vec<(f64, f64)> = offsets
            .iter()
            .map(|&t| (t, field.perturbation(i, [c[0] + t * e[0], c[1] + t * e[1]]) - base))
            .collect();
        linear_fit(&pts)
    };
    let f1 = along([1.0, 0.0])?;
    let f2 = along([0.0, 1.0])?;
    let s = &field.schedule;
    Ok(ExpansionReport {
        i,
        sample_radius: rho,
        slope_x1: f1.slope,
        slope_x2: f2.slope,
        fit_rms: f1.residual_rms,
        predicted: predicted_slope(field, i),
        exact_gradient: smooth_gradient(field, i)[0],
        small_threshold: 0.1 / (s.gamma_bar * s.d),
    })
}
