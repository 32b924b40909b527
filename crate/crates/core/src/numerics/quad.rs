//! Adaptive Gauss-Kronrod quadrature and the radial `t = ln(1 + s²)` integrator.

use std::f64::consts::PI;

use serde::Serialize;

use super::Tolerances;
use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration. `converged == false` means the error
/// target was not met; `value` is still the best available estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut rabs = rk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = hl * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        fv1[j] = f1;
        fv2[j] = f2;
        rk += WGK[j] * (f1 + f2);
        rabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    if !rk.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a:e}, {b:e}]")));
    }
    let mean = 0.5 * rk;
    let mut rasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        rasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let ah = hl.abs();
    let result = rk * hl;
    rabs *= ah;
    rasc *= ah;
    let mut err = ((rk - rg) * hl).abs();
    if rasc != 0.0 && err != 0.0 {
        err = rasc * (200.0 * err / rasc).powf(1.5).min(1.0);
    }
    if rabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * rabs);
    }
    Ok((result, err))
}

/// Globally adaptive integration over the panels delimited by `breaks`.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    tol: &Tolerances,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::InvalidInput("need at least one panel".into()));
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(breaks.len() * 4);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&f, w[0], w[1])?;
            panels.push((w[0], w[1], v, e));
        }
    }
    let mut evals = 15 * panels.len();
    let limit = tol.max_steps.min(50_000);
    let mut splits = 0usize;
    loop {
        // Fixed summation order keeps results reproducible.
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(QuadResult { value, error, converged: true, evaluations: evals });
        }
        let (imax, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.3 > be { (i, p.3) } else { (bi, be) });
        let (a, b, _, _) = panels[imax];
        let m = 0.5 * (a + b);
        if splits >= limit || !(m > a && m < b) {
            return Ok(QuadResult { value, error, converged: false, evaluations: evals });
        }
        let (v1, e1) = gk15(&f, a, m)?;
        let (v2, e2) = gk15(&f, m, b)?;
        evals += 30;
        splits += 1;
        panels[imax] = (a, m, v1, e1);
        panels.push((m, b, v2, e2));
    }
}

/// Adaptive integral of `f` over `[a, b]` starting from `n0` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n0: usize, tol: &Tolerances) -> Result<QuadResult> {
    let n0 = n0.max(1);
    let breaks: Vec<f64> = (0..=n0).map(|i| a + (b - a) * i as f64 / n0 as f64).collect();
    integrate_panels(f, &breaks, tol)
}

#[inline]
fn t_of_s(s: f64) -> f64 {
    if s > 1e8 {
        2.0 * s.ln() + (1.0 / (s * s)).ln_1p()
    } else {
        (s * s).ln_1p()
    }
}

fn t_breaks(t_lo: f64, t_hi: f64) -> Vec<f64> {
    let mut b = vec![t_lo];
    let mut x = t_lo;
    let width = |x: f64| if x < 4.0 { 0.5 } else { 2.0 };
    while x + width(x) < t_hi - 1e-9 {
        x += width(x);
        b.push(x);
    }
    b.push(t_hi);
    b
}

/// `2π ∫_{s_lo}^{s_hi} g(s) s ds`, evaluated in `t = ln(1 + s²)` where `s ds = e^t dt / 2`.
pub fn quad_radial_between<F: Fn(f64) -> f64>(
    g: F,
    s_lo: f64,
    s_hi: f64,
    tol: &Tolerances,
) -> Result<QuadResult> {
    if !(s_hi >= s_lo && s_lo >= 0.0) || !s_hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad radial range [{s_lo}, {s_hi}]")));
    }
    let t_lo = t_of_s(s_lo);
    let t_hi = t_of_s(s_hi);
    if t_hi > 1400.0 {
        return Err(Error::InvalidInput(format!("radius {s_hi:e} beyond representable range")));
    }
    let map = |t: f64| {
        let s2 = t.exp_m1();
        PI * g(s2.sqrt()) * (1.0 + s2)
    };
    integrate_panels(map, &t_breaks(t_lo, t_hi), tol)
}

/// `2π ∫_0^{s_max} g(s) s ds`; `s_max = ∞` truncates the tail once successive
/// chunks fall below `1e-3` of the error target.
pub fn quad_radial<F: Fn(f64) -> f64>(g: F, s_max: f64, tol: &Tolerances) -> Result<QuadResult> {
    if s_max.is_finite() {
        return quad_radial_between(g, 0.0, s_max, tol);
    }
    if !(s_max > 0.0) {
        return Err(Error::InvalidInput("s_max must be positive".into()));
    }
    let map = |t: f64| {
        let s2 = t.exp_m1();
        PI * g(s2.sqrt()) * (1.0 + s2)
    };
    let mut total = integrate_panels(&map, &t_breaks(0.0, 8.0), tol)?;
    let mut t = 8.0;
    let mut quiet = 0;
    while t < 700.0 {
        let chunk = integrate_panels(&map, &t_breaks(t, t + 4.0), tol)?;
        total.value += chunk.value;
        total.error += chunk.error;
        total.converged &= chunk.converged;
        total.evaluations += chunk.evaluations;
        t += 4.0;
        let target = tol.abs.max(tol.rel * total.value.abs());
        if chunk.value.abs() + chunk.error <= 1e-3 * target {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
    }
    total.converged = false;
    Ok(total)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
