//! Scaled bubble profiles and the universal correction profiles.
//!
//! The bubble `B̄_γ` solves `−ΔB̄ = B̄·exp(B̄²)` (positive Laplacian convention
//! moved to the right-hand side) with `B̄(0) = γ`. It is never stored directly:
//! with `μ_γ² = 4γ⁻²exp(−γ²)` and `s = r/μ_γ` we integrate
//!
//! ```text
//! w(s) = γ(γ − B̄(μ_γ s)),   w'' + w'/s = 4(1 − w/γ²)·exp(−2w + w²/γ²)
//! z(s) = ∂_γB̄(μ_γ s),       z'' + z'/s = −(4/γ²)(1 + 2B̄²)·exp(−2w + w²/γ²)·z
//! ```
//!
//! which keeps every stored quantity of order one.

use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::{integrate_radial_system, quad_radial, LogGrid, Tolerances};
use crate::{Error, Result};

/// Default cap on the stored radius of a profile built from a [`ProfileRequest`].
pub const PROFILE_CAP: f64 = 1e6;
pub const GAMMA_MIN: f64 = 2.0;
pub const GAMMA_MAX: f64 = 25.0;

/// `t(s) = ln(1 + s²)`.
#[inline]
pub fn t_of(s: f64) -> f64 {
    if s > 1e8 {
        2.0 * s.ln() + (1.0 / (s * s)).ln_1p()
    } else {
        (s * s).ln_1p()
    }
}

#[inline]
pub fn t_prime(s: f64) -> f64 {
    2.0 * s / (1.0 + s * s)
}

/// `Z̄₀(s) = (1 − s²)/(1 + s²)`.
#[inline]
pub fn z0_bar(s: f64) -> f64 {
    2.0 / (1.0 + s * s) - 1.0
}

#[inline]
pub fn z0_bar_prime(s: f64) -> f64 {
    -4.0 * s / (1.0 + s * s).powi(2)
}

/// `exp(−2t(s)) = (1 + s²)⁻²`.
#[inline]
pub fn liouville_weight(s: f64) -> f64 {
    (1.0 + s * s).powi(-2)
}

/// Closed-form limit profiles.
#[derive(Debug, Clone, Copy, Default)]
pub struct LimitProfiles;

impl LimitProfiles {
    pub fn t(&self, s: f64) -> f64 {
        t_of(s)
    }

    pub fn z0_bar(&self, s: f64) -> f64 {
        z0_bar(s)
    }
}

/// `ln μ_γ = ln 2 − ln γ − γ²/2`, formed without exponentiating.
pub fn ln_mu(gamma: f64) -> f64 {
    std::f64::consts::LN_2 - gamma.ln() - 0.5 * gamma * gamma
}

pub fn mu(gamma: f64) -> f64 {
    ln_mu(gamma).exp()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(GAMMA_MIN..=GAMMA_MAX).contains(&gamma) {
        return Err(Error::InvalidInput(format!(
            "gamma = {gamma} outside [{GAMMA_MIN}, {GAMMA_MAX}]"
        )));
    }
    Ok(())
}

/// Quintic Hermite interpolation on `[x0, x1]`; returns value and derivative.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn hermite5(
    x0: f64,
    x1: f64,
    y0: f64,
    d0: f64,
    c0: f64,
    y1: f64,
    d1: f64,
    c1: f64,
    x: f64,
) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
    let g00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let g10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let g20 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let g01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let g11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let g21 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let v = h00 * y0 + h * h10 * d0 + h * h * h20 * c0 + h01 * y1 + h * h11 * d1 + h * h * h21 * c1;
    let dv = (g00 * y0 + h * g10 * d0 + h * h * g20 * c0 + g01 * y1 + h * g11 * d1
        + h * h * g21 * c1)
        / h;
    (v, dv)
}

/// Radial samples with first and second derivatives, interpolated by quintic Hermite.
/// Beyond the last node a radial harmonic continuation `u(S) + S u'(S) ln(s/S)` is used.
#[derive(Debug, Clone, Serialize)]
pub struct Sampled {
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Sampled {
    fn eval(&self, grid: &LogGrid, s: f64) -> (f64, f64) {
        let nodes = grid.nodes();
        let n = nodes.len();
        let s_last = nodes[n - 1];
        if s > s_last {
            let (u, du) = (self.values[n - 1], self.d1[n - 1]);
            return (u + s_last * du * (s / s_last).ln(), s_last * du / s);
        }
        let j = grid.locate(s.max(0.0));
        hermite5(
            nodes[j],
            nodes[j + 1],
            self.values[j],
            self.d1[j],
            self.d2[j],
            self.values[j + 1],
            self.d1[j + 1],
            self.d2[j + 1],
            s.max(0.0),
        )
    }
}

/// Bubble request: height `gamma` and range exponent `delta` (`s_max = μ_γ^{δ−1}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRequest {
    pub gamma: f64,
    pub delta: f64,
    pub tol: Tolerances,
    /// Upper bound on the stored radius; `PROFILE_CAP` by default.
    pub cap: f64,
}

impl ProfileRequest {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        let req = ProfileRequest { gamma, delta, tol: Tolerances::tight(), cap: PROFILE_CAP };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if !(0.05..=0.95).contains(&self.delta) {
            return Err(Error::InvalidInput(format!("delta = {} outside [0.05, 0.95]", self.delta)));
        }
        if !(self.cap > 0.0) {
            return Err(Error::InvalidInput("cap must be positive".into()));
        }
        Ok(())
    }

    /// Uncapped range `μ_γ^{δ−1}`.
    pub fn natural_s_max(&self) -> f64 {
        ((self.delta - 1.0) * ln_mu(self.gamma)).exp()
    }
}

/// Scaled bubble `w`, its derivative and the γ-derivative profile `z`.
#[derive(Debug, Clone, Serialize)]
pub struct BubbleProfile {
    pub gamma: f64,
    pub mu: f64,
    pub ln_mu: f64,
    pub grid: LogGrid,
    pub w: Vec<f64>,
    pub w_prime: Vec<f64>,
    pub z: Vec<f64>,
    pub z_prime: Vec<f64>,
    pub s_max: f64,
    /// True when the natural range was cut at the request's cap.
    pub capped: bool,
    #[serde(skip)]
    w_s: Sampled,
    #[serde(skip)]
    z_s: Sampled,
}

/// `exp(−2w + w²/γ²)`: equals `μ_γ²·exp(B̄²)·γ²/4`.
#[inline]
pub fn core_weight(gamma: f64, w: f64) -> f64 {
    (-2.0 * w + w * w / (gamma * gamma)).exp()
}

#[inline]
fn w_source(gamma: f64, w: f64) -> f64 {
    4.0 * (1.0 - w / (gamma * gamma)) * core_weight(gamma, w)
}

#[inline]
fn z_source(gamma: f64, w: f64, z: f64) -> f64 {
    let b = gamma - w / gamma;
    -(4.0 / (gamma * gamma)) * (1.0 + 2.0 * b * b) * core_weight(gamma, w) * z
}

/// Builds a profile from a request (capped range).
pub fn compute_bubble(req: &ProfileRequest) -> Result<BubbleProfile> {
    req.validate()?;
    let natural = req.natural_s_max();
    let s_max = natural.min(req.cap);
    let mut p = compute_bubble_to(req.gamma, s_max, &req.tol)?;
    p.capped = natural > req.cap;
    Ok(p)
}

/// Builds a profile on `[0, s_max]` with no cap; used when a truncation radius
/// far beyond the default range is needed.
pub fn compute_bubble_to(gamma: f64, s_max: f64, tol: &Tolerances) -> Result<BubbleProfile> {
    check_gamma(gamma)?;
    let grid = LogGrid::standard(s_max)?;
    compute_bubble_on(gamma, grid, tol)
}

/// Builds a profile on an explicit grid.
pub fn compute_bubble_on(gamma: f64, grid: LogGrid, tol: &Tolerances) -> Result<BubbleProfile> {
    check_gamma(gamma)?;
    let sol = integrate_radial_system::<2, _>(
        |_, u, _| [w_source(gamma, u[0]), z_source(gamma, u[0], u[1])],
        [0.0, 1.0],
        &grid,
        tol,
    )?;
    let n = grid.len();
    let nodes = grid.nodes();
    let mut w = Vec::with_capacity(n);
    let mut wp = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut zp = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    let mut z2 = Vec::with_capacity(n);
    for i in 0..n {
        let (wi, zi) = (sol.u[i][0], sol.u[i][1]);
        let (wpi, zpi) = (sol.du[i][0], sol.du[i][1]);
        if ![wi, zi, wpi, zpi].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite(format!("bubble profile at s = {:e}", nodes[i])));
        }
        let (gw, gz) = (w_source(gamma, wi), z_source(gamma, wi, zi));
        let s = nodes[i];
        if s == 0.0 {
            w2.push(0.5 * gw);
            z2.push(0.5 * gz);
        } else {
            w2.push(gw - wpi / s);
            z2.push(gz - zpi / s);
        }
        w.push(wi);
        wp.push(wpi);
        z.push(zi);
        zp.push(zpi);
    }
    let lm = ln_mu(gamma);
    Ok(BubbleProfile {
        gamma,
        mu: lm.exp(),
        ln_mu: lm,
        s_max: grid.last(),
        capped: false,
        w_s: Sampled { values: w.clone(), d1: wp.clone(), d2: w2 },
        z_s: Sampled { values: z.clone(), d1: zp.clone(), d2: z2 },
        grid,
        w,
        w_prime: wp,
        z,
        z_prime: zp,
    })
}

impl BubbleProfile {
    /// `(w(s), w'(s))`.
    pub fn w_at(&self, s: f64) -> (f64, f64) {
        self.w_s.eval(&self.grid, s)
    }

    /// `(z(s), z'(s))`.
    pub fn z_at(&self, s: f64) -> (f64, f64) {
        self.z_s.eval(&self.grid, s)
    }

    /// `B̄_γ(μ_γ s) = γ − w/γ`.
    pub fn bubble_at(&self, s: f64) -> f64 {
        self.gamma - self.w_at(s).0 / self.gamma
    }

    /// `exp(−2w + w²/γ²)` at scaled radius `s`.
    pub fn core_weight_at(&self, s: f64) -> f64 {
        core_weight(self.gamma, self.w_at(s).0)
    }

    /// `μ²·exp(B̄²)` at scaled radius `s`.
    pub fn density_exp(&self, s: f64) -> f64 {
        4.0 / (self.gamma * self.gamma) * self.core_weight_at(s)
    }

    /// `μ²·f(B̄)` at scaled radius `s`.
    pub fn density_f(&self, s: f64) -> f64 {
        let w = self.w_at(s).0;
        let g = self.gamma;
        4.0 / g * (1.0 - w / (g * g)) * core_weight(g, w)
    }

    /// `μ²·f'(B̄)` at scaled radius `s`.
    pub fn density_fprime(&self, s: f64) -> f64 {
        let w = self.w_at(s).0;
        let g = self.gamma;
        let b = g - w / g;
        4.0 / (g * g) * (1.0 + 2.0 * b * b) * core_weight(g, w)
    }

    /// Residual of the w-equation at node `i`, from a centred difference of the stored `w'`.
    pub fn equation_residual(&self, i: usize) -> f64 {
        let nodes = self.grid.nodes();
        if i == 0 || i + 1 >= nodes.len() {
            return 0.0;
        }
        let (sm, s, sp) = (nodes[i - 1], nodes[i], nodes[i + 1]);
        // Second-order derivative of w' on a non-uniform stencil.
        let (hm, hp) = (s - sm, sp - s);
        let dwp = (self.w_prime[i + 1] * hm * hm - self.w_prime[i - 1] * hp * hp
            + self.w_prime[i] * (hp * hp - hm * hm))
            / (hm * hp * (hm + hp));
        dwp + self.w_prime[i] / s - w_source(self.gamma, self.w[i])
    }
}

/// Which universal correction profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionKind {
    Phi,
    Psi,
}

/// Correction profile with its measured far-field ratio to `t`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrectionProfile {
    pub kind: CorrectionKind,
    pub grid: LogGrid,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub measured_slope_vs_t: f64,
    /// `value'(s)/t'(s)` at the same probe; converges much faster than the value ratio.
    pub derivative_ratio_vs_t: f64,
    #[serde(skip)]
    sampled: Sampled,
}

impl CorrectionProfile {
    /// `(value, derivative)` at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        self.sampled.eval(&self.grid, s)
    }

    pub fn value_at(&self, s: f64) -> f64 {
        self.eval(s).0
    }

    pub fn s_max(&self) -> f64 {
        self.grid.last()
    }
}

pub const SLOPE_PROBE: f64 = 1e4;

fn phi_source(s: f64, phi: f64) -> f64 {
    let t = t_of(s);
    -4.0 * liouville_weight(s) * (t * t - t + 2.0 * phi)
}

fn psi_source(s: f64, phi: f64, psi: f64) -> f64 {
    let t = t_of(s);
    -4.0 * liouville_weight(s) * (z0_bar(s) * (1.0 - 4.0 * t + 2.0 * t * t + 4.0 * phi) + 2.0 * psi)
}

fn finish_correction(
    kind: CorrectionKind,
    grid: LogGrid,
    values: Vec<f64>,
    derivatives: Vec<f64>,
    source: impl Fn(f64, f64) -> f64,
) -> Result<CorrectionProfile> {
    let nodes = grid.nodes();
    let mut d2 = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        if !(values[i].is_finite() && derivatives[i].is_finite()) {
            return Err(Error::NonFinite(format!("correction profile at s = {:e}", nodes[i])));
        }
        let g = source(nodes[i], values[i]);
        d2.push(if nodes[i] == 0.0 { 0.5 * g } else { g - derivatives[i] / nodes[i] });
    }
    let sampled = Sampled { values: values.clone(), d1: derivatives.clone(), d2 };
    let (probe, dprobe) = sampled.eval(&grid, SLOPE_PROBE);
    Ok(CorrectionProfile {
        kind,
        measured_slope_vs_t: probe / t_of(SLOPE_PROBE),
        derivative_ratio_vs_t: dprobe / t_prime(SLOPE_PROBE),
        grid,
        values,
        derivatives,
        sampled,
    })
}

/// `φ'' + φ'/s = −4e^{−2t}(t² − t + 2φ)`, `φ(0) = φ'(0) = 0`.
pub fn compute_phi(tol: &Tolerances, s_max: f64) -> Result<CorrectionProfile> {
    if !(s_max >= SLOPE_PROBE) {
        return Err(Error::InvalidInput(format!("s_max = {s_max} below {SLOPE_PROBE}")));
    }
    let grid = LogGrid::standard(s_max)?;
    let sol = integrate_radial_system::<1, _>(|s, u, _| [phi_source(s, u[0])], [0.0], &grid, tol)?;
    let values = sol.u.iter().map(|x| x[0]).collect();
    let derivs = sol.du.iter().map(|x| x[0]).collect();
    finish_correction(CorrectionKind::Phi, grid, values, derivs, phi_source)
}

/// The four pieces of `β` and their sum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaReport {
    /// `∫Z̄₀²e^{−2t}`
    pub mass: f64,
    /// `∫Z̄₀²e^{−2t}·4t`
    pub linear: f64,
    /// `∫Z̄₀²e^{−2t}·2t²`
    pub quadratic: f64,
    /// `∫Z̄₀²e^{−2t}·4φ`
    pub phi_term: f64,
    /// `(2/π)(mass − linear + quadratic + phi_term)`
    pub beta: f64,
}

/// Quadratures making up `β = (2/π)∫Z̄₀e^{−2t}·Z̄₀(1 − 4t + 2t² + 4φ)`.
pub fn beta_components(phi: &CorrectionProfile, tol: &Tolerances) -> Result<BetaReport> {
    let base = |s: f64| z0_bar(s).powi(2) * liouville_weight(s);
    let mass = quad_radial(base, f64::INFINITY, tol)?.value;
    let linear = quad_radial(|s| base(s) * 4.0 * t_of(s), f64::INFINITY, tol)?.value;
    let quadratic = quad_radial(|s| base(s) * 2.0 * t_of(s).powi(2), f64::INFINITY, tol)?.value;
    let phi_term = quad_radial(|s| base(s) * 4.0 * phi.value_at(s), f64::INFINITY, tol)?.value;
    let beta = 2.0 / PI * (mass - linear + quadratic + phi_term);
    Ok(BetaReport { mass, linear, quadratic, phi_term, beta })
}

/// `ψ` together with the constant `β`.
#[derive(Debug, Clone, Serialize)]
pub struct PsiProfile {
    pub profile: CorrectionProfile,
    pub beta: BetaReport,
}

/// `ψ'' + ψ'/s = −4e^{−2t}(Z̄₀(1 − 4t + 2t² + 4φ) + 2ψ)`, `ψ(0) = ψ'(0) = 0`.
pub fn compute_psi(phi: &CorrectionProfile, tol: &Tolerances, s_max: f64) -> Result<PsiProfile> {
    if !(s_max >= SLOPE_PROBE) {
        return Err(Error::InvalidInput(format!("s_max = {s_max} below {SLOPE_PROBE}")));
    }
    if phi.kind != CorrectionKind::Phi || phi.s_max() < s_max {
        return Err(Error::InvalidInput("phi profile does not cover the psi range".into()));
    }
    let grid = LogGrid::standard(s_max)?;
    let sol = integrate_radial_system::<1, _>(
        |s, u, _| [psi_source(s, phi.value_at(s), u[0])],
        [0.0],
        &grid,
        tol,
    )?;
    let values = sol.u.iter().map(|x| x[0]).collect();
    let derivs = sol.du.iter().map(|x| x[0]).collect();
    let profile = finish_correction(CorrectionKind::Psi, grid, values, derivs, |s, v| {
        psi_source(s, phi.value_at(s), v)
    })?;
    let beta = beta_components(phi, tol)?;
    Ok(PsiProfile { profile, beta })
}

/// Both correction profiles on a common range.
#[derive(Debug, Clone)]
pub struct Corrections {
    pub phi: CorrectionProfile,
    pub psi: PsiProfile,
}

pub fn compute_corrections(tol: &Tolerances, s_max: f64) -> Result<Corrections> {
    let phi = compute_phi(tol, s_max)?;
    let psi = compute_psi(&phi, tol, s_max)?;
    Ok(Corrections { phi, psi })
}

/// `sup_s |z(s) − (B̄_{γ+h} − B̄_{γ−h})(μ_γ s)/(2h)|` over the grid of the γ-profile.
pub fn z0_finite_difference_check(gamma: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1e-3 * gamma) {
        return Err(Error::InvalidInput(format!("h = {h} must lie in (0, 1e-3·γ]")));
    }
    check_gamma(gamma - h)?;
    check_gamma(gamma + h)?;
    let tol = Tolerances { rel: 1e-13, abs: 1e-15, max_steps: 2_000_000 };
    let req = ProfileRequest::new(gamma, 0.5)?;
    let s_top = req.natural_s_max().min(req.cap);
    let base = compute_bubble_to(gamma, s_top, &tol)?;
    let stretch = |g: f64| (base.ln_mu - ln_mu(g)).exp();
    let plus = compute_bubble_to(gamma + h, s_top * stretch(gamma + h) * 1.01, &tol)?;
    let minus = compute_bubble_to(gamma - h, s_top * stretch(gamma - h) * 1.01, &tol)?;
    let (fp, fm) = (stretch(gamma + h), stretch(gamma - h));
    let mut dev: f64 = 0.0;
    for (i, &s) in base.grid.nodes().iter().enumerate() {
        let bp = plus.bubble_at(s * fp);
        let bm = minus.bubble_at(s * fm);
        dev = dev.max((base.z[i] - (bp - bm) / (2.0 * h)).abs());
    }
    Ok(dev)
}
