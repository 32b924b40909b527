//! ε-indexed scales with γ̄ as the primary dial.
//!
//! All scales that underflow for moderate γ̄ (μ̄, r, δ_ε, the θ-box) are stored
//! by their logarithms next to the linear value.

use serde::Serialize;

use crate::{Error, Result};

/// Lower end of the admissible `δ₀` window.
pub fn delta0_lower() -> f64 {
    (3.0 - 5f64.sqrt()) / 4.0
}

/// Upper end of the admissible `δ₁` window for a given `δ₀`.
pub fn delta1_upper(delta0: f64) -> f64 {
    3.0 * delta0 - 2.0 * delta0 * delta0 - 0.5
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSchedule {
    pub gamma_bar: f64,
    /// `ln μ̄² = −γ̄²`
    pub mu_bar_sq_log: f64,
    /// `γ̄^{−1/l}`
    pub d: f64,
    pub r_trunc: f64,
    pub r_trunc_log: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub delta_eps_log: f64,
    pub theta_box: f64,
    pub theta_box_log: f64,
    pub w_center: f64,
    pub k: usize,
    pub l: usize,
}

pub fn build_schedule(
    gamma_bar: f64,
    k: usize,
    l: usize,
    delta0: f64,
    delta1: f64,
) -> Result<ParameterSchedule> {
    if !(gamma_bar.is_finite() && gamma_bar > 1.0) {
        return Err(Error::ConstraintViolation(format!("γ̄ > 1 required, got {gamma_bar}")));
    }
    if l < 2 || l % 2 != 0 {
        return Err(Error::ConstraintViolation(format!("l must be even and ≥ 2, got {l}")));
    }
    let lo = delta0_lower();
    if !(delta0 > lo && delta0 < 0.5) {
        return Err(Error::ConstraintViolation(format!(
            "(3−√5)/4 < δ₀ < 1/2 violated: δ₀ = {delta0} (lower bound {lo:.6})"
        )));
    }
    let hi = delta1_upper(delta0);
    if !(delta1 > 0.0 && delta1 < hi) {
        return Err(Error::ConstraintViolation(format!(
            "0 < δ₁ < 3δ₀ − 2δ₀² − 1/2 violated: δ₁ = {delta1}, upper bound {hi:.6}"
        )));
    }
    let ln_g = gamma_bar.ln();
    let mu_bar_log = -0.5 * gamma_bar * gamma_bar;
    let r_trunc_log = delta0 * mu_bar_log;
    let delta_eps_log = (delta1 + 0.5) * mu_bar_log;
    let theta_box_log = delta_eps_log + ln_g.ln() - 4.0 * ln_g;
    Ok(ParameterSchedule {
        gamma_bar,
        mu_bar_sq_log: 2.0 * mu_bar_log,
        d: gamma_bar.powf(-1.0 / l as f64),
        r_trunc: r_trunc_log.exp(),
        r_trunc_log,
        delta0,
        delta1,
        delta_eps_log,
        theta_box: theta_box_log.exp(),
        theta_box_log,
        w_center: -(2.0 * (k + l - 1) as f64 / l as f64) * ln_g / gamma_bar,
        k,
        l,
    })
}

impl ParameterSchedule {
    pub fn mu_bar_log(&self) -> f64 {
        0.5 * self.mu_bar_sq_log
    }

    /// Checks `−kd/δ < τ₁ < … < τ_k < kd/δ` with gaps above `δ·d`.
    pub fn check_tau(&self, tau: &[f64], delta: f64) -> Result<()> {
        if tau.len() != self.k {
            return Err(Error::ConstraintViolation(format!(
                "expected {} centers, got {}",
                self.k,
                tau.len()
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::ConstraintViolation(format!("δ > 0 required, got {delta}")));
        }
        let bound = self.k as f64 * self.d / delta;
        for (i, &t) in tau.iter().enumerate() {
            if !(t.abs() < bound) {
                return Err(Error::ConstraintViolation(format!(
                    "|τ_{i}| < k·d/δ violated: τ_{i} = {t}, bound {bound}"
                )));
            }
        }
        for (i, w) in tau.windows(2).enumerate() {
            if !(w[1] - w[0] > delta * self.d) {
                return Err(Error::ConstraintViolation(format!(
                    "τ_{} − τ_{} > δ·d violated: gap {}",
                    i + 1,
                    i,
                    w[1] - w[0]
                )));
            }
        }
        Ok(())
    }

    /// `τ = d·y`.
    pub fn centers_from_cluster(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| self.d * v).collect()
    }
}
