//! Analytic stand-in for the weak limit: `(w_center + a₀ Re zˡ)·q(|x|)`.

use serde::Serialize;

use super::green::{norm, Point};
use crate::{Error, Result};

pub const DEFAULT_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelWeakLimit {
    pub a0: f64,
    pub l: usize,
    pub w_center: f64,
    pub cutoff_radius: f64,
    pub radius: f64,
}

/// Value, gradient and positive Laplacian `−∂²w` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLimitSample {
    pub value: f64,
    pub gradient: Point,
    pub laplacian: f64,
}

/// `(Re zⁿ, Im zⁿ)`.
fn cpow(x: Point, n: usize) -> Point {
    let mut acc = [1.0, 0.0];
    for _ in 0..n {
        acc = [acc[0] * x[0] - acc[1] * x[1], acc[0] * x[1] + acc[1] * x[0]];
    }
    acc
}

impl ModelWeakLimit {
    pub fn new(a0: f64, l: usize, w_center: f64, cutoff_radius: f64, radius: f64) -> Result<Self> {
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(Error::ConstraintViolation(format!("a₀ > 0 required, got {a0}")));
        }
        if l < 2 || l % 2 != 0 {
            return Err(Error::ConstraintViolation(format!("l must be even and ≥ 2, got {l}")));
        }
        if !(cutoff_radius > 0.0 && cutoff_radius < radius) {
            return Err(Error::ConstraintViolation(format!(
                "cutoff radius {cutoff_radius} must lie in (0, R = {radius})"
            )));
        }
        if !w_center.is_finite() {
            return Err(Error::InvalidInput("w_center must be finite".into()));
        }
        Ok(ModelWeakLimit { a0, l, w_center, cutoff_radius, radius })
    }

    /// `(q, q', q'')` of the quintic smoothstep cutoff.
    pub fn cutoff(&self, rho: f64) -> (f64, f64, f64) {
        let (c, r) = (self.cutoff_radius, self.radius);
        if rho <= c {
            return (1.0, 0.0, 0.0);
        }
        if rho >= r {
            return (0.0, 0.0, 0.0);
        }
        let w = r - c;
        let u = (rho - c) / w;
        let s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
        let s1 = 30.0 * u * u * (1.0 - u) * (1.0 - u);
        let s2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
        (1.0 - s, -s1 / w, -s2 / (w * w))
    }

    /// The harmonic part `w_center + a₀ Re zˡ`.
    pub fn harmonic(&self, x: Point) -> f64 {
        self.w_center + self.a0 * cpow(x, self.l)[0]
    }

    pub fn value(&self, x: Point) -> f64 {
        self.harmonic(x) * self.cutoff(norm(x)).0
    }

    pub fn sample(&self, x: Point) -> WeakLimitSample {
        let rho = norm(x);
        let (q, q1, q2) = self.cutoff(rho);
        let h = self.harmonic(x);
        let zl1 = cpow(x, self.l - 1);
        let lf = self.l as f64;
        let gh = [self.a0 * lf * zl1[0], -self.a0 * lf * zl1[1]];
        if q1 == 0.0 && q2 == 0.0 {
            return WeakLimitSample { value: h * q, gradient: [q * gh[0], q * gh[1]], laplacian: 0.0 };
        }
        let radial = [x[0] / rho, x[1] / rho];
        let dh_drho = gh[0] * radial[0] + gh[1] * radial[1];
        let flat = 2.0 * q1 * dh_drho + h * (q2 + q1 / rho);
        WeakLimitSample {
            value: h * q,
            gradient: [q * gh[0] + h * q1 * radial[0], q * gh[1] + h * q1 * radial[1]],
            laplacian: -flat,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ModelWeakLimit {
        ModelWeakLimit::new(1.3, 2, -0.4, 0.5, 1.0).unwrap()
    }

    #[test]
    fn axis_behaviour() {
        let m = model();
        for x1 in [0.0, 0.1, 0.3, 0.49] {
            assert!((m.value([x1, 0.0]) - (-0.4 + 1.3 * x1 * x1)).abs() < 1e-15);
        }
        assert_eq!(m.value([1.0, 0.0]), 0.0);
        assert_eq!(m.value([0.0, 1.2]), 0.0);
    }

    #[test]
    fn derivatives_match_differences() {
        let m = ModelWeakLimit::new(0.7, 4, -0.3, 0.5, 1.0).unwrap();
        let h = 1e-4;
        for x in [[0.62, 0.21], [-0.3, 0.71], [0.2, 0.1]] {
            let s = m.sample(x);
            let f = |p: Point| m.value(p);
            let e = 1e-6;
            let gx = (f([x[0] + e, x[1]]) - f([x[0] - e, x[1]])) / (2.0 * e);
            let gy = (f([x[0], x[1] + e]) - f([x[0], x[1] - e])) / (2.0 * e);
            let lap = (f([x[0] + h, x[1]]) + f([x[0] - h, x[1]]) + f([x[0], x[1] + h])
                + f([x[0], x[1] - h])
                - 4.0 * f(x))
                / (h * h);
            assert!((gx - s.gradient[0]).abs() < 1e-8);
            assert!((gy - s.gradient[1]).abs() < 1e-8);
            assert!((lap + s.laplacian).abs() < 1e-5, "{lap} {}", s.laplacian);
        }
    }

    #[test]
    fn even_in_second_coordinate() {
        let m = model();
        for x in [[0.3, 0.2], [-0.7, 0.4], [0.55, 0.6]] {
            assert_eq!(m.value(x), m.value([x[0], -x[1]]));
        }
    }
}
