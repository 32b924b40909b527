//! Weighted Poincaré-Sobolev ratios for closed-form trial functions on `ℝ²`.
//!
//! Trials are finite combinations of a few radial and angular shapes with exact
//! gradients. Linear functionals (weighted means, bubble orthogonality) are
//! evaluated per shape and combined linearly, so the projections that use them
//! are linear maps up to rounding.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::numerics::{quad_radial, Tolerances};
use crate::profiles::{compute_bubble_to, liouville_weight, ln_mu, z0_bar, z0_bar_prime, BubbleProfile};
use crate::{Error, Result};

/// Angular samples for integrands that are not radial.
const ANGLES: usize = 128;
/// Shape used to restore bubble orthogonality: `(1 − s²/4)⁴₊`.
pub const PROJECTION_BUMP: Shape = Shape::Bump { radius: 2.0, power: 4 };
/// Smallest scaled truncation radius accepted as "`μ ≪ r`".
const MIN_SCALED_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Shape {
    Constant,
    /// `(1 − s²)/(1 + s²)`
    Z0Bar,
    /// `Re zᵐ/(1 + s²)ᵐ` or `Im zᵐ/(1 + s²)ᵐ`
    AngularMode { m: u32, parity: Parity },
    /// `(1 − s²/a²)ᵖ₊`
    Bump { radius: f64, power: u32 },
}

/// Value, `∂_s` and `s⁻¹∂_θ` of a shape.
type Jet = (f64, f64, f64);

impl Shape {
    fn jet(&self, s: f64, th: f64) -> Jet {
        match *self {
            Shape::Constant => (1.0, 0.0, 0.0),
            Shape::Z0Bar => (z0_bar(s), z0_bar_prime(s), 0.0),
            Shape::AngularMode { m, parity } => {
                let mf = m as f64;
                let q = 1.0 + s * s;
                let base = s.powi(m as i32 - 1) / q.powi(m as i32);
                let (c, d) = match parity {
                    Parity::Cos => ((mf * th).cos(), -(mf * th).sin()),
                    Parity::Sin => ((mf * th).sin(), (mf * th).cos()),
                };
                (s * base * c, mf * base * (1.0 - s * s) / q * c, mf * base * d)
            }
            Shape::Bump { radius, power } => {
                let u = 1.0 - (s / radius).powi(2);
                if u <= 0.0 {
                    return (0.0, 0.0, 0.0);
                }
                let pw = power as i32;
                (u.powi(pw), -2.0 * power as f64 * s / (radius * radius) * u.powi(pw - 1), 0.0)
            }
        }
    }

    /// Angular mean, exact for every shape.
    fn radial_mean(&self, s: f64) -> f64 {
        match self {
            Shape::AngularMode { .. } => 0.0,
            _ => self.jet(s, 0.0).0,
        }
    }

    fn support(&self) -> f64 {
        match *self {
            Shape::Bump { radius, .. } => radius,
            _ => f64::INFINITY,
        }
    }

    fn is_radial(&self) -> bool {
        !matches!(self, Shape::AngularMode { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFunction {
    pub id: String,
    pub terms: Vec<(f64, Shape)>,
}

impl TrialFunction {
    pub fn new(id: impl Into<String>, terms: Vec<(f64, Shape)>) -> Self {
        TrialFunction { id: id.into(), terms }
    }

    pub fn single(id: impl Into<String>, shape: Shape) -> Self {
        TrialFunction::new(id, vec![(1.0, shape)])
    }

    pub fn value(&self, s: f64, th: f64) -> f64 {
        self.terms.iter().map(|(c, b)| c * b.jet(s, th).0).sum()
    }

    /// `|∇φ|²` at polar point `(s, θ)`.
    pub fn gradient_sq(&self, s: f64, th: f64) -> f64 {
        let (mut gs, mut gt) = (0.0, 0.0);
        for (c, b) in &self.terms {
            let (_, a, t) = b.jet(s, th);
            gs += c * a;
            gt += c * t;
        }
        gs * gs + gt * gt
    }

    pub fn scaled(&self, c: f64) -> Self {
        TrialFunction::new(self.id.clone(), self.terms.iter().map(|&(a, b)| (c * a, b)).collect())
    }

    /// Rescaled so the largest coefficient has magnitude one. The quotients
    /// are invariant under scaling, but the absolute quadrature floor is not.
    fn unit_amplitude(&self) -> Self {
        let m = self.terms.iter().fold(0.0f64, |m, &(c, _)| m.max(c.abs()));
        if m > 0.0 && m.is_finite() { self.scaled(1.0 / m) } else { self.clone() }
    }

    fn is_radial(&self) -> bool {
        self.terms.iter().all(|(_, b)| b.is_radial())
    }

    fn has_gradient(&self) -> bool {
        self.terms.iter().any(|(c, b)| *c != 0.0 && *b != Shape::Constant)
    }

    /// Adds `c·shape`, merging with an existing term of the same shape.
    fn plus(&self, c: f64, shape: Shape) -> Self {
        let mut out = self.clone();
        match out.terms.iter_mut().find(|(_, b)| *b == shape) {
            Some(t) => t.0 += c,
            None => out.terms.push((c, shape)),
        }
        out
    }

    /// Combines per-shape values of a linear functional.
    fn apply(&self, functional: impl Fn(&Shape) -> Result<f64>) -> Result<f64> {
        let mut v = 0.0;
        for (c, b) in &self.terms {
            if *c != 0.0 {
                v += c * functional(b)?;
            }
        }
        Ok(v)
    }
}

fn quad_tol() -> Tolerances {
    // the absolute floor sits above the GK rounding floor 50ε∫|f| so that
    // integrals that cancel to zero still terminate
    Tolerances::default().with_rel(1e-12).with_abs(1e-13)
}

/// `2π∫₀^{s_max} g(s)·(angular mean of h(s,·)) s ds`, with `h` sampled only when not radial.
fn polar_integral(
    radial: bool,
    s_max: f64,
    g: impl Fn(f64) -> f64,
    h: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let mean = |s: f64| {
        if radial {
            return h(s, 0.0);
        }
        let mut acc = 0.0;
        for q in 0..ANGLES {
            acc += h(s, 2.0 * PI * (q as f64 + 0.5) / ANGLES as f64);
        }
        acc / ANGLES as f64
    };
    Ok(quad_radial(|s| g(s) * mean(s), s_max, &quad_tol())?.value)
}

/// `∫|∇φ|² dx` over `ℝ²`.
pub fn dirichlet_energy(trial: &TrialFunction) -> Result<f64> {
    let reach = trial.terms.iter().map(|(_, b)| b.support()).fold(0.0, f64::max);
    polar_integral(trial.is_radial(), reach, |_| 1.0, |s, th| trial.gradient_sq(s, th))
}

/// `π⁻¹∫φ e^{−2t} dx`, the mean under the Liouville weight (mass `π`).
pub fn weighted_mean(trial: &TrialFunction) -> Result<f64> {
    trial.apply(|b| match b {
        Shape::Constant => Ok(1.0),
        Shape::AngularMode { .. } => Ok(0.0),
        _ => Ok(quad_radial(|s| liouville_weight(s) * b.radial_mean(s), b.support(), &quad_tol())?.value / PI),
    })
}

/// `φ − mean(φ)`.
pub fn mean_zero_projection(trial: &TrialFunction) -> Result<TrialFunction> {
    Ok(trial.plus(-weighted_mean(trial)?, Shape::Constant))
}

/// `∫|φ − φ̄|ᵖ e^{−2t} dx / (∫|∇φ|²)^{p/2}`.
pub fn ps_ratio(trial: &TrialFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    if !trial.has_gradient() {
        return Err(Error::ZeroDirichletEnergy);
    }
    let trial = &trial.unit_amplitude();
    let d = dirichlet_energy(trial)?;
    if !(d > 0.0) {
        return Err(Error::ZeroDirichletEnergy);
    }
    let phi = mean_zero_projection(trial)?;
    let num = polar_integral(phi.is_radial(), f64::INFINITY, liouville_weight, |s, th| phi.value(s, th).abs().powf(p))?;
    Ok(num / d.powf(0.5 * p))
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::RangeViolation(format!("p ≥ 1 required, got {p}")))
    }
}

/// Bubble profile on the scaled ball `|y| ≤ S = r/μ` with `r = μ^{δ₀}`.
#[derive(Debug, Clone)]
pub struct BubbleWeight {
    pub gamma: f64,
    pub delta0: f64,
    pub s_trunc: f64,
    profile: BubbleProfile,
}

pub fn bubble_weight(gamma: f64, delta0: f64) -> Result<BubbleWeight> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::RangeViolation(format!("0 < δ₀ < 1 required, got {delta0}")));
    }
    let s_trunc = ((delta0 - 1.0) * ln_mu(gamma)).exp();
    if !(s_trunc >= MIN_SCALED_RADIUS) {
        return Err(Error::RangeViolation(format!(
            "μ ≪ r fails: r/μ = {s_trunc:.3} below {MIN_SCALED_RADIUS}"
        )));
    }
    let profile = compute_bubble_to(gamma, s_trunc, &Tolerances::tight())?;
    Ok(BubbleWeight { gamma, delta0, s_trunc, profile })
}

impl BubbleWeight {
    /// `μ²f(B̄)` at scaled radius `s`.
    pub fn source(&self, s: f64) -> f64 {
        self.profile.density_f(s)
    }

    /// `γ²μ²e^{B̄²}(1 + w)` at scaled radius `s`.
    pub fn ratio_weight(&self, s: f64) -> f64 {
        let w = self.profile.w_at(s).0;
        4.0 * self.profile.core_weight_at(s) * (1.0 + w)
    }

    /// `χ = e^{−2w + w²/γ²}/e^{−2t}`, the ratio of the bubble weight to its limit.
    pub fn chi(&self, s: f64) -> f64 {
        self.profile.core_weight_at(s) / liouville_weight(s)
    }

    fn shape_source(&self, b: &Shape) -> Result<f64> {
        match b {
            Shape::AngularMode { .. } => Ok(0.0),
            _ => Ok(quad_radial(
                |s| self.source(s) * b.radial_mean(s),
                b.support().min(self.s_trunc),
                &quad_tol(),
            )?
            .value),
        }
    }

    /// `∫_{B_S} μ²f(B̄)φ dy`.
    pub fn orthogonality_defect(&self, trial: &TrialFunction) -> Result<f64> {
        trial.apply(|b| self.shape_source(b))
    }

    /// `φ − c·(1 − s²/4)⁴₊` with `c` chosen so the defect vanishes.
    pub fn orthogonal_projection(&self, trial: &TrialFunction) -> Result<TrialFunction> {
        let c = self.orthogonality_defect(trial)? / self.shape_source(&PROJECTION_BUMP)?;
        Ok(trial.plus(-c, PROJECTION_BUMP))
    }

    /// `(∫_{B_S}|χ − 1|^q e^{−2t} dy)^{1/q}` with `q = 0.5/(1 − δ₀)`.
    pub fn chi_deviation(&self) -> Result<f64> {
        let q = 0.5 / (1.0 - self.delta0);
        let v = quad_radial(|s| (self.chi(s) - 1.0).abs().powf(q) * liouville_weight(s), self.s_trunc, &quad_tol())?.value;
        Ok(v.powf(1.0 / q))
    }

    /// `γ²∫_{B_r} e^{B̄²}(1 + w)|φ|ᵖ dx / (∫|∇φ|²)^{p/2}`, computed in scaled coordinates.
    pub fn ratio(&self, trial: &TrialFunction, p: f64) -> Result<f64> {
        check_p(p)?;
        if !trial.has_gradient() {
            return Err(Error::ZeroDirichletEnergy);
        }
        let trial = &trial.unit_amplitude();
        let defect = self.orthogonality_defect(trial)?;
        let scale = polar_integral(trial.is_radial(), self.s_trunc, |s| self.source(s), |s, th| trial.value(s, th).abs())?;
        if !(defect.abs() <= 1e-9 * scale) {
            return Err(Error::PreconditionViolated(format!(
                "∫ f(B̄)φ = {defect:e} is not zero; project the trial first"
            )));
        }
        let d = dirichlet_energy(trial)?;
        if !(d > 0.0) {
            return Err(Error::ZeroDirichletEnergy);
        }
        let num = polar_integral(trial.is_radial(), self.s_trunc, |s| self.ratio_weight(s), |s, th| {
            trial.value(s, th).abs().powf(p)
        })?;
        Ok(num / d.powf(0.5 * p))
    }
}

/// Ratio for a trial that already satisfies bubble orthogonality at `(γ, δ₀)`.
pub fn perturbed_orthogonality_ratio(gamma: f64, delta0: f64, trial: &TrialFunction, p: f64) -> Result<f64> {
    bubble_weight(gamma, delta0)?.ratio(trial, p)
}

/// The twelve shipped trials: `Z̄₀`, three bumps, four angular modes and four
/// random combinations drawn from `seed`.
pub fn trial_library(seed: u64) -> Vec<TrialFunction> {
    let mut lib = vec![TrialFunction::single("z0bar", Shape::Z0Bar)];
    for a in [0.5, 1.0, 3.0] {
        lib.push(TrialFunction::single(format!("bump_{a}"), Shape::Bump { radius: a, power: 3 }));
    }
    let modes = [(1, Parity::Cos), (1, Parity::Sin), (2, Parity::Cos), (3, Parity::Sin)];
    for (m, parity) in modes {
        let tag = if parity == Parity::Cos { "cos" } else { "sin" };
        lib.push(TrialFunction::single(format!("mode_{m}_{tag}"), Shape::AngularMode { m, parity }));
    }
    let shapes: Vec<Shape> = lib.iter().map(|t| t.terms[0].1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..4 {
        let terms = shapes.iter().map(|&b| (rng.gen_range(-1.0..1.0), b)).collect();
        lib.push(TrialFunction::new(format!("random_{n}"), terms));
    }
    lib
}
