//! Remainder orders of the bubble expansions, integral identities over the
//! truncation ball and the truncation constants `A`, `C`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::{loglog_slope, quad_radial, SlopeReport, Tolerances};
use crate::profiles::{
    compute_bubble, compute_bubble_to, compute_corrections, ln_mu, t_of, z0_bar, BubbleProfile,
    Corrections, ProfileRequest, SLOPE_PROBE,
};
use crate::schedule::ParameterSchedule;
use crate::{Error, Result};

/// One computed quantity against its closed-form or asymptotic reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub gamma: f64,
    pub computed: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// `abs_err` times the claimed inverse power of γ.
    pub scaled_err: f64,
}

impl IdentityReport {
    pub fn new(name: &str, gamma: f64, computed: f64, reference: f64, power: f64) -> Self {
        let abs_err = (computed - reference).abs();
        IdentityReport {
            name: name.to_string(),
            gamma,
            computed,
            reference,
            abs_err,
            rel_err: abs_err / reference.abs(),
            scaled_err: abs_err * gamma.powf(power),
        }
    }
}

/// Which terms of the expansion are subtracted before measuring the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemainderVariant {
    Full,
    /// Drop the last correction term (`φ/γ³` resp. `ψ/γ²`) as a self-test.
    WithoutCorrection,
}

fn check_gammas(gammas: &[f64]) -> Result<()> {
    if gammas.len() < 3 {
        return Err(Error::InsufficientPoints(gammas.len()));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g >= 3.0 && **g <= 8.0)) {
        return Err(Error::InvalidInput(format!("γ = {g} outside [3, 8]")));
    }
    Ok(())
}

fn profiles_for(gammas: &[f64], delta: f64) -> Result<(Vec<BubbleProfile>, Corrections)> {
    let mut out = Vec::with_capacity(gammas.len());
    for &g in gammas {
        out.push(compute_bubble(&ProfileRequest::new(g, delta)?)?);
    }
    let reach = out.iter().map(|p| p.s_max).fold(SLOPE_PROBE, f64::max);
    let corr = compute_corrections(&Tolerances::tight(), reach)?;
    Ok((out, corr))
}

/// `sup_{s∈[1,s_max]} |D_γ(s)|/t(s)` with `D_γ = B̄_γ(μ_γ s) − (γ − t/γ + φ/γ³)`.
pub fn remainder_d_sup(p: &BubbleProfile, c: &Corrections, variant: RemainderVariant) -> f64 {
    let g = p.gamma;
    let mut m: f64 = 0.0;
    for (i, &s) in p.grid.nodes().iter().enumerate() {
        if s < 1.0 {
            continue;
        }
        let t = t_of(s);
        let mut d = t - p.w[i];
        if variant == RemainderVariant::Full {
            d -= c.phi.value_at(s) / (g * g);
        }
        m = m.max((d / g).abs() / t);
    }
    m
}

/// `sup_s |E_γ(s)|/(1+t(s))` with `E_γ = z − Z̄₀ − ψ/γ²`.
pub fn remainder_e_sup(p: &BubbleProfile, c: &Corrections, variant: RemainderVariant) -> f64 {
    let g = p.gamma;
    let mut m: f64 = 0.0;
    for (i, &s) in p.grid.nodes().iter().enumerate() {
        let mut e = p.z[i] - z0_bar(s);
        if variant == RemainderVariant::Full {
            e -= c.psi.profile.value_at(s) / (g * g);
        }
        m = m.max(e.abs() / (1.0 + t_of(s)));
    }
    m
}

/// `E_γ(0)`; zero up to rounding since all three terms are pinned at the origin.
pub fn remainder_e_at_origin(p: &BubbleProfile, c: &Corrections) -> f64 {
    p.z[0] - z0_bar(0.0) - c.psi.profile.values[0] / (p.gamma * p.gamma)
}

pub fn remainder_d(gammas: &[f64], delta: f64) -> Result<SlopeReport> {
    remainder_d_variant(gammas, delta, RemainderVariant::Full)
}

pub fn remainder_e(gammas: &[f64], delta: f64) -> Result<SlopeReport> {
    remainder_e_variant(gammas, delta, RemainderVariant::Full)
}

pub fn remainder_d_variant(
    gammas: &[f64],
    delta: f64,
    variant: RemainderVariant,
) -> Result<SlopeReport> {
    check_gammas(gammas)?;
    let (ps, c) = profiles_for(gammas, delta)?;
    let pts: Vec<(f64, f64)> = ps.iter().map(|p| (p.gamma, remainder_d_sup(p, &c, variant))).collect();
    loglog_slope(&pts)
}

pub fn remainder_e_variant(
    gammas: &[f64],
    delta: f64,
    variant: RemainderVariant,
) -> Result<SlopeReport> {
    check_gammas(gammas)?;
    let (ps, c) = profiles_for(gammas, delta)?;
    let pts: Vec<(f64, f64)> = ps.iter().map(|p| (p.gamma, remainder_e_sup(p, &c, variant))).collect();
    loglog_slope(&pts)
}

/// Guard `γμ_γ < r/10` for `r = μ_γ^{δ₀}`.
pub fn check_ball_range(gamma: f64, delta0: f64) -> Result<()> {
    let lm = ln_mu(gamma);
    if gamma.ln() + lm >= delta0 * lm - 10f64.ln() {
        return Err(Error::RangeViolation(format!(
            "γμ_γ ≥ r/10 at γ = {gamma}, δ₀ = {delta0}: the core is not small against r = μ^δ₀"
        )));
    }
    Ok(())
}

/// The reference names used by [`verify_integral_identities`].
pub mod names {
    pub const EXP_B0: &str = "exp_mass_b0";
    pub const EXP_B1: &str = "exp_mass_b1";
    pub const EXP_B2: &str = "exp_mass_b2";
    pub const FPRIME_MASS: &str = "fprime_mass";
    pub const FPRIME_Z0: &str = "fprime_z0";
    pub const FPRIME_QUADRATIC: &str = "fprime_quadratic";
    pub const LOG_MOMENT: &str = "log_first_moment";
}

/// Integrals over `B(0, r)`, `r = μ^{δ₀}`, evaluated in scaled coordinates.
pub fn verify_integral_identities(gamma: f64, delta0: f64) -> Result<Vec<IdentityReport>> {
    verify_integral_identities_with(gamma, delta0, &Tolerances::default().with_rel(1e-11))
}

pub fn verify_integral_identities_with(
    gamma: f64,
    delta0: f64,
    tol: &Tolerances,
) -> Result<Vec<IdentityReport>> {
    if !(3.0..=12.0).contains(&gamma) {
        return Err(Error::InvalidInput(format!("γ = {gamma} outside [3, 12]")));
    }
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::InvalidInput(format!("δ₀ = {delta0} outside (0, 1)")));
    }
    check_ball_range(gamma, delta0)?;
    let lm = ln_mu(gamma);
    let s_top = ((delta0 - 1.0) * lm).exp();
    let p = compute_bubble_to(gamma, s_top, &Tolerances::tight())?;
    let q = |g: &dyn Fn(f64) -> f64| quad_radial(g, s_top, tol).map(|r| r.value);
    let g = gamma;
    let mut out = Vec::new();
    for (b, name) in [(0, names::EXP_B0), (1, names::EXP_B1), (2, names::EXP_B2)] {
        let v = q(&|s| p.density_exp(s) * p.bubble_at(s).powi(b))?;
        out.push(IdentityReport::new(name, g, v, 4.0 * PI * g.powi(b - 2), (4 - b) as f64));
    }
    let v = q(&|s| p.density_fprime(s))?;
    out.push(IdentityReport::new(names::FPRIME_MASS, g, v, 8.0 * PI, 2.0));
    let v = q(&|s| p.density_fprime(s) * p.z_at(s).0)?;
    out.push(IdentityReport::new(names::FPRIME_Z0, g, v, -4.0 * PI / (g * g), 4.0));
    let v = q(&|s| p.density_fprime(s) * s * s / (1.0 + s * s))?;
    out.push(IdentityReport::new(names::FPRIME_QUADRATIC, g, v, 4.0 * PI, 2.0));
    let v = q(&|s| p.density_exp(s) * s)?;
    let ln_i = lm + v.ln();
    out.push(IdentityReport::new(
        names::LOG_MOMENT,
        g,
        ln_i,
        (3.0 * delta0 - 2.0 * delta0 * delta0) * lm,
        0.0,
    ));
    Ok(out)
}

/// Slope of `ln ∫_{B_r} e^{B̄²}|x| dx` against `ln μ_γ` across `gammas`, and the
/// predicted exponent `3δ₀ − 2δ₀²`.
pub fn first_moment_scaling(gammas: &[f64], delta0: f64) -> Result<(f64, f64)> {
    let mut pts = Vec::new();
    for &g in gammas {
        let rep = verify_integral_identities(g, delta0)?;
        let r = rep.iter().find(|r| r.name == names::LOG_MOMENT).expect("moment row");
        pts.push((ln_mu(g), r.computed));
    }
    let fit = crate::numerics::linear_fit(&pts)?;
    Ok((fit.slope, 3.0 * delta0 - 2.0 * delta0 * delta0))
}

/// `A`, `C` and their γ-derivatives for one bubble truncated at `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationConstants {
    pub gamma: f64,
    pub ln_r: f64,
    pub lambda_h: f64,
    /// Scaled truncation radius `√(λh)·r/μ_γ`.
    pub s_trunc: f64,
    /// Flux route `−2π r B̄'(r)`.
    pub a: f64,
    pub c: f64,
    pub da: f64,
    pub dc: f64,
    /// `B̄_γ(√(λh)·r)`.
    pub bubble_at_r: f64,
}

/// Truncation constants from the flux route, together with the profile they came from.
pub fn truncation_constants(
    gamma: f64,
    ln_r: f64,
    lambda_h: f64,
    tol: &Tolerances,
) -> Result<(TruncationConstants, BubbleProfile)> {
    if !(lambda_h > 0.0 && lambda_h.is_finite()) {
        return Err(Error::InvalidInput(format!("λh = {lambda_h} must be positive")));
    }
    let ln_s = ln_r + 0.5 * lambda_h.ln() - ln_mu(gamma);
    if !(ln_s > 0.0 && ln_s < 700.0) {
        return Err(Error::RangeViolation(format!(
            "scaled truncation radius e^{ln_s:.3} out of range at γ = {gamma}"
        )));
    }
    let s = ln_s.exp();
    let p = compute_bubble_to(gamma, s, tol)?;
    let (w, wp) = p.w_at(s);
    let (z, zp) = p.z_at(s);
    let a = 2.0 * PI * s * wp / gamma;
    let bubble = gamma - w / gamma;
    let c = bubble + a / (2.0 * PI) * ln_r;
    let da = -2.0 * PI * s * zp;
    let dc = z + da / (2.0 * PI) * ln_r;
    Ok((
        TruncationConstants {
            gamma,
            ln_r,
            lambda_h,
            s_trunc: s,
            a,
            c,
            da,
            dc,
            bubble_at_r: bubble,
        },
        p,
    ))
}

/// Mass route `A = ∫_{B(0, √(λh) r)} f(B̄_γ)`.
pub fn truncation_mass(tc: &TruncationConstants, p: &BubbleProfile, tol: &Tolerances) -> Result<f64> {
    Ok(quad_radial(|s| p.density_f(s), tc.s_trunc, tol)?.value)
}

/// Central differences of `A` and `C` in γ at fixed `r`.
pub fn truncation_derivatives_fd(
    gamma: f64,
    ln_r: f64,
    lambda_h: f64,
    h: f64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let (p, _) = truncation_constants(gamma + h, ln_r, lambda_h, tol)?;
    let (m, _) = truncation_constants(gamma - h, ln_r, lambda_h, tol)?;
    Ok(((p.a - m.a) / (2.0 * h), (p.c - m.c) / (2.0 * h)))
}

pub mod truncation_names {
    pub const ROUTES: &str = "a_flux_vs_mass";
    pub const A: &str = "a_leading";
    pub const C: &str = "c_leading";
    pub const DA: &str = "da_leading";
    pub const DC: &str = "dc_leading";
    pub const DA_FD: &str = "da_fd_vs_analytic";
    pub const DC_FD: &str = "dc_fd_vs_analytic";
}

/// Both routes for `A`, the leading-order laws for `A`, `C`, `∂A`, `∂C`, and the
/// finite-difference derivatives against the variational ones. `λh = 1`.
pub fn verify_truncation_constants(
    gamma: f64,
    schedule: &ParameterSchedule,
) -> Result<Vec<IdentityReport>> {
    use truncation_names as n;
    let tol = Tolerances::tight();
    let (tc, p) = truncation_constants(gamma, schedule.r_trunc_log, 1.0, &tol)?;
    let mass = truncation_mass(&tc, &p, &Tolerances::default().with_rel(1e-12))?;
    let lg = schedule.gamma_bar.ln();
    let g = gamma;
    let h = 1e-4 * g;
    let (da_fd, dc_fd) = truncation_derivatives_fd(g, schedule.r_trunc_log, 1.0, h, &tol)?;
    Ok(vec![
        IdentityReport::new(n::ROUTES, g, tc.a, mass, 0.0),
        IdentityReport::new(n::A, g, tc.a, 4.0 * PI / g, 3.0),
        IdentityReport::new(n::C, g, tc.c, -2.0 * lg / g, 1.0),
        IdentityReport::new(n::DA, g, tc.da, -4.0 * PI / (g * g), 4.0),
        IdentityReport::new(n::DC, g, tc.dc, 2.0 * lg / (g * g), 2.0),
        IdentityReport::new(n::DA_FD, g, da_fd, tc.da, 0.0),
        IdentityReport::new(n::DC_FD, g, dc_fd, tc.dc, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::build_schedule;

    fn find<'a>(r: &'a [IdentityReport], name: &str) -> &'a IdentityReport {
        r.iter().find(|x| x.name == name).unwrap()
    }

    #[test]
    fn fprime_mass_at_six() {
        let r = verify_integral_identities(6.0, 0.4).unwrap();
        let m = find(&r, names::FPRIME_MASS);
        assert!(m.abs_err * 36.0 <= 8.0 * PI, "{m:?}");
        let d = find(&r, names::FPRIME_QUADRATIC);
        assert!((0.95..=1.05).contains(&(d.computed / (4.0 * PI))), "{d:?}");
        let a0 = find(&r, names::EXP_B0);
        let ratio = a0.computed * 36.0 / (4.0 * PI);
        assert!((0.97..=1.03).contains(&ratio), "{ratio}");
    }

    #[test]
    fn fprime_z0_at_six() {
        let r = verify_integral_identities(6.0, 0.4).unwrap();
        let z = find(&r, names::FPRIME_Z0);
        let ratio = z.computed * 36.0 / (-4.0 * PI);
        assert!((0.9..=1.1).contains(&ratio), "γ²∫f'(B̄)Z₀/(−4π) = {ratio}");
    }

    #[test]
    fn fprime_z0_is_the_mass_derivative() {
        // ∫_{B_r} f'(B̄)Z₀ = ∂_γ ∫_{B_r} f(B̄) at fixed r, i.e. the variational ∂A.
        let g = 6.0;
        let r = verify_integral_identities(g, 0.4).unwrap();
        let z = find(&r, names::FPRIME_Z0).computed;
        let (tc, _) = truncation_constants(g, 0.4 * ln_mu(g), 1.0, &Tolerances::tight()).unwrap();
        assert!((z / tc.da - 1.0).abs() < 1e-8, "{z} vs {}", tc.da);
    }

    #[test]
    fn scaled_errors_do_not_blow_up() {
        let mut prev: Option<Vec<IdentityReport>> = None;
        for g in [3.0, 4.0, 5.0, 6.0] {
            let r = verify_integral_identities(g, 0.3).unwrap();
            if let Some(p) = &prev {
                // The log moment is a scaling law, checked by first_moment_scaling.
                for (a, b) in p.iter().zip(&r).filter(|(a, _)| a.name != names::LOG_MOMENT) {
                    assert!(b.scaled_err.is_finite());
                    assert!(b.scaled_err <= 10.0 * a.scaled_err, "{} at γ = {g}", b.name);
                }
            }
            prev = Some(r);
        }
    }

    #[test]
    fn range_guard() {
        assert!(matches!(verify_integral_identities(3.0, 0.4), Err(Error::RangeViolation(_))));
        assert!(verify_integral_identities(3.0, 0.3).is_ok());
    }

    #[test]
    fn tolerance_stability() {
        let a = verify_integral_identities_with(5.0, 0.4, &Tolerances::default().with_rel(1e-11))
            .unwrap();
        let b = verify_integral_identities_with(5.0, 0.4, &Tolerances::default().with_rel(1e-10))
            .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.computed - y.computed).abs() <= 10.0 * 1e-10 * x.computed.abs(), "{}", x.name);
        }
    }

    #[test]
    fn truncation_routes_and_laws() {
        use truncation_names as n;
        for g in [4.0, 5.0, 6.0] {
            let sched = build_schedule(g, 1, 2, 0.4, 0.1).unwrap();
            let r = verify_truncation_constants(g, &sched).unwrap();
            assert!(find(&r, n::ROUTES).rel_err <= 1e-8, "{:?}", find(&r, n::ROUTES));
            let c = find(&r, n::C);
            assert!(((c.computed + 2.0 * g.ln() / g) * g).abs() <= 5.0, "{c:?}");
            assert!(find(&r, n::DA_FD).rel_err < 1e-6);
            // ∂C is a small difference of O(1) terms; compare absolutely.
            assert!(find(&r, n::DC_FD).abs_err < 1e-6);
            if g == 6.0 {
                let a = find(&r, n::A);
                assert!((0.95..=1.05).contains(&(a.computed * g / (4.0 * PI))), "{a:?}");
            }
        }
    }

    #[test]
    fn e_vanishes_at_origin() {
        let (ps, c) = profiles_for(&[3.0, 4.0, 5.0], 0.5).unwrap();
        for p in &ps {
            assert!(remainder_e_at_origin(p, &c).abs() < 10.0 / p.gamma.powi(4));
        }
    }

    #[test]
    fn remainder_monotone_in_gamma() {
        let (ps, c) = profiles_for(&[3.0, 4.0, 5.0, 6.0], 0.5).unwrap();
        let m: Vec<f64> = ps.iter().map(|p| remainder_d_sup(p, &c, RemainderVariant::Full)).collect();
        assert!(m.iter().all(|&x| x > 0.0));
        assert!(m.windows(2).all(|w| w[1] < w[0]), "{m:?}");
    }

    #[test]
    fn remainder_d_order() {
        let r = remainder_d(&[3.0, 4.0, 5.0, 6.0], 0.5).unwrap();
        assert!((-5.5..=-4.5).contains(&r.slope), "D slope {}", r.slope);
    }

    #[test]
    fn remainder_d_without_phi() {
        let r = remainder_d_variant(&[3.0, 4.0, 5.0, 6.0], 0.5, RemainderVariant::WithoutCorrection)
            .unwrap();
        assert!((-3.5..=-2.5).contains(&r.slope), "D slope without φ {}", r.slope);
    }

    #[test]
    fn remainder_e_order() {
        let r = remainder_e(&[3.0, 4.0, 5.0, 6.0], 0.5).unwrap();
        assert!((-4.5..=-3.5).contains(&r.slope), "E slope {}", r.slope);
    }

    #[test]
    fn remainder_e_without_psi() {
        let r = remainder_e_variant(&[3.0, 4.0, 5.0, 6.0], 0.5, RemainderVariant::WithoutCorrection)
            .unwrap();
        assert!((-2.5..=-1.5).contains(&r.slope), "E slope without ψ {}", r.slope);
    }
}
