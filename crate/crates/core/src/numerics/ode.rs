//! Dormand-Prince 5(4) for radial second-order systems `u'' + u'/s = rhs(s, u, u')`.

use super::{LogGrid, Tolerances};
use crate::{Error, Result};

/// Starting radius; the solution on `[0, TAYLOR_START]` comes from the Taylor expansion.
pub const TAYLOR_START: f64 = 1e-8;

/// Samples `(u, u')` at every grid node.
#[derive(Debug, Clone)]
pub struct RadialSolution<const N: usize> {
    pub s: Vec<f64>,
    pub u: Vec<[f64; N]>,
    pub du: Vec<[f64; N]>,
    pub steps: usize,
    pub rejected: usize,
}

#[derive(Clone, Copy)]
struct State<const N: usize> {
    u: [f64; N],
    v: [f64; N],
}

impl<const N: usize> State<N> {
    fn combine(&self, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
        let mut out = *self;
        for &(c, k) in terms {
            if c == 0.0 {
                continue;
            }
            for i in 0..N {
                out.u[i] += h * c * k.u[i];
                out.v[i] += h * c * k.v[i];
            }
        }
        out
    }

    fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Scalar convenience wrapper around [`integrate_radial_system`].
pub fn integrate_radial_ivp<F>(
    rhs: F,
    u0: f64,
    grid: &LogGrid,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let sol = integrate_radial_system::<1, _>(|s, u, du| [rhs(s, u[0], du[0])], [u0], grid, tol)?;
    Ok((sol.u.iter().map(|x| x[0]).collect(), sol.du.iter().map(|x| x[0]).collect()))
}

/// Integrates `u'' + u'/s = rhs(s, u, u')` with `u(0) = u0`, `u'(0) = 0` and
/// returns the solution at every node of `grid`.
///
/// Steps are clipped so that every grid node is hit exactly.
pub fn integrate_radial_system<const N: usize, F>(
    rhs: F,
    u0: [f64; N],
    grid: &LogGrid,
    tol: &Tolerances,
) -> Result<RadialSolution<N>>
where
    F: Fn(f64, &[f64; N], &[f64; N]) -> [f64; N],
{
    let nodes = grid.nodes();
    let deriv = |s: f64, y: &State<N>| -> State<N> {
        let g = rhs(s, &y.u, &y.v);
        let mut v = [0.0; N];
        for i in 0..N {
            v[i] = g[i] - y.v[i] / s;
        }
        State { u: y.v, v }
    };

    let g0 = rhs(0.0, &u0, &[0.0; N]);
    if g0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("source at s = 0".into()));
    }
    let taylor = |s: f64| -> State<N> {
        let mut y = State { u: u0, v: [0.0; N] };
        for i in 0..N {
            y.u[i] += 0.25 * g0[i] * s * s;
            y.v[i] = 0.5 * g0[i] * s;
        }
        y
    };

    let mut out = RadialSolution {
        s: nodes.to_vec(),
        u: Vec::with_capacity(nodes.len()),
        du: Vec::with_capacity(nodes.len()),
        steps: 0,
        rejected: 0,
    };
    let mut idx = 0;
    while idx < nodes.len() && nodes[idx] <= TAYLOR_START {
        let y = taylor(nodes[idx]);
        out.u.push(y.u);
        out.du.push(y.v);
        idx += 1;
    }
    if idx == nodes.len() {
        return Ok(out);
    }

    let mut s = TAYLOR_START;
    let mut y = taylor(s);
    let mut k1 = deriv(s, &y);
    let mut h = (1e-3 * (nodes[idx] - s)).max(1e-6).min(nodes[idx] - s);
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;

    while idx < nodes.len() {
        let target = nodes[idx];
        let mut clipped = false;
        let h_prop = h;
        let mut h_try = h;
        if s + h_try >= target * (1.0 - 4.0 * f64::EPSILON) {
            h_try = target - s;
            clipped = true;
        }
        if h_try <= 1e-15 * s.max(f64::MIN_POSITIVE) {
            return Err(Error::StepSizeUnderflow(s));
        }
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::StepLimitExceeded(tol.max_steps));
        }

        let y2 = y.combine(h_try, &[(A21, &k1)]);
        let k2 = deriv(s + C2 * h_try, &y2);
        let y3 = y.combine(h_try, &[(A31, &k1), (A32, &k2)]);
        let k3 = deriv(s + C3 * h_try, &y3);
        let y4 = y.combine(h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = deriv(s + C4 * h_try, &y4);
        let y5 = y.combine(h_try, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = deriv(s + C5 * h_try, &y5);
        let y6 = y.combine(h_try, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let s_new = if clipped { target } else { s + h_try };
        let k6 = deriv(s + h_try, &y6);
        let y_new =
            y.combine(h_try, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        if !y_new.is_finite() {
            // Shrink and retry; a genuine blow-up ends in step-size underflow.
            out.rejected += 1;
            h = 0.25 * h_try;
            continue;
        }
        let k7 = deriv(s_new, &y_new);

        let mut acc = 0.0;
        for i in 0..N {
            let eu = h_try
                * (E1 * k1.u[i] + E3 * k3.u[i] + E4 * k4.u[i] + E5 * k5.u[i] + E6 * k6.u[i]
                    + E7 * k7.u[i]);
            let ev = h_try
                * (E1 * k1.v[i] + E3 * k3.v[i] + E4 * k4.v[i] + E5 * k5.v[i] + E6 * k6.v[i]
                    + E7 * k7.v[i]);
            let su = tol.abs + tol.rel * y.u[i].abs().max(y_new.u[i].abs());
            let sv = tol.abs + tol.rel * y.v[i].abs().max(y_new.v[i].abs());
            acc += (eu / su).powi(2) + (ev / sv).powi(2);
        }
        let err = (acc / (2 * N) as f64).sqrt();
        if !err.is_finite() {
            out.rejected += 1;
            h = 0.25 * h_try;
            continue;
        }

        if err <= 1.0 {
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
            };
            err_prev = err.max(1e-4);
            s = s_new;
            y = y_new;
            k1 = k7;
            let h_next = h_try * fac;
            // A clipped step should not drag the proposal down.
            h = if clipped { h_next.max(h_prop) } else { h_next };
            if clipped {
                out.u.push(y.u);
                out.du.push(y.v);
                idx += 1;
            }
        } else {
            out.rejected += 1;
            h = h_try * (SAFETY * err.powf(-0.2)).max(FAC_MIN);
        }
    }
    out.steps = steps;
    Ok(out)
}
