//! Dirichlet Green function of the disk `B(0, R)` by the method of images.

use std::f64::consts::PI;

use serde::Serialize;

use crate::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskGeometry {
    pub radius: f64,
}

impl Default for DiskGeometry {
    fn default() -> Self {
        DiskGeometry { radius: 1.0 }
    }
}

impl DiskGeometry {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("disk radius {radius} must be positive")));
        }
        Ok(DiskGeometry { radius })
    }

    pub fn contains(&self, x: Point) -> bool {
        norm(x) < self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

#[inline]
pub fn norm(x: Point) -> f64 {
    x[0].hypot(x[1])
}

#[inline]
fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// `R² − x·ȳ` as a complex number.
#[inline]
fn image_factor(x: Point, y: Point, r: f64) -> Point {
    // x·ȳ = (x1 + i x2)(y1 − i y2)
    let re = x[0] * y[0] + x[1] * y[1];
    let im = x[1] * y[0] - x[0] * y[1];
    [r * r - re, -im]
}

/// Regular part `H(x, y) = (1/2π) ln(|R² − xȳ|/R)`; defined also for `x = y`.
pub fn regular_part(x: Point, y: Point, r: f64) -> f64 {
    let f = image_factor(x, y, r);
    (norm(f) / r).ln() / (2.0 * PI)
}

/// `∇ₓH(x, y)`.
pub fn regular_part_gradient(x: Point, y: Point, r: f64) -> Point {
    // ∇ Re log F for holomorphic F = R² − xȳ is (Re F'/F, −Im F'/F), F' = −ȳ.
    let f = image_factor(x, y, r);
    let (fr, fi) = (f[0], f[1]);
    let d = fr * fr + fi * fi;
    let (pr, pi) = (-y[0], y[1]);
    let qr = (pr * fr + pi * fi) / d;
    let qi = (pi * fr - pr * fi) / d;
    [qr / (2.0 * PI), -qi / (2.0 * PI)]
}

/// `(G(x, y), H(x, y))` with `G = (1/2π) ln(1/|x−y|) + H`.
pub fn green_disk(x: Point, y: Point, r: f64) -> Result<(f64, f64)> {
    if !(norm(x) < r && norm(y) < r) || x == y {
        return Err(Error::BoundaryOrCoincident);
    }
    let h = regular_part(x, y, r);
    Ok((h - norm(sub(x, y)).ln() / (2.0 * PI), h))
}

/// `G` without the domain checks; callers guarantee `x ≠ y` inside the disk.
#[inline]
pub(crate) fn green_unchecked(x: Point, y: Point, r: f64) -> f64 {
    regular_part(x, y, r) - norm(sub(x, y)).ln() / (2.0 * PI)
}

/// `∇ₓG(x, y)`.
pub fn green_gradient(x: Point, y: Point, r: f64) -> Point {
    let h = regular_part_gradient(x, y, r);
    let d = sub(x, y);
    let n2 = d[0] * d[0] + d[1] * d[1];
    [h[0] - d[0] / (2.0 * PI * n2), h[1] - d[1] / (2.0 * PI * n2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, r: f64) -> Point {
        let rho = r * rng.gen_range(0.0f64..0.999).sqrt();
        let th = rng.gen_range(0.0..2.0 * PI);
        [rho * th.cos(), rho * th.sin()]
    }

    #[test]
    fn symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in [1.0, 2.5] {
            for _ in 0..100 {
                let (x, y) = (random_point(&mut rng, r), random_point(&mut rng, r));
                let (g1, _) = green_disk(x, y, r).unwrap();
                let (g2, _) = green_disk(y, x, r).unwrap();
                assert!((g1 - g2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pole_at_origin() {
        let (g, h) = green_disk([0.3, 0.4], [0.0, 0.0], 1.0).unwrap();
        assert!((g - (1.0f64 / 0.5).ln() / (2.0 * PI)).abs() < 1e-15);
        assert!(h.abs() < 1e-15);
        assert!((regular_part([0.0, 0.0], [0.0, 0.0], 2.0) - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn boundary_decay() {
        let y = [0.2, -0.1];
        for k in 0..16 {
            let th = k as f64 * PI / 8.0;
            let rho = 1.0 - 1e-9;
            let (g, _) = green_disk([rho * th.cos(), rho * th.sin()], y, 1.0).unwrap();
            assert!(g.abs() <= 1e-8);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(green_disk([0.1, 0.0], [0.1, 0.0], 1.0), Err(Error::BoundaryOrCoincident));
        assert_eq!(green_disk([1.0, 0.0], [0.1, 0.0], 1.0), Err(Error::BoundaryOrCoincident));
    }

    #[test]
    fn gradient_matches_differences() {
        let (x, y) = ([0.31, -0.22], [-0.4, 0.1]);
        let h = 1e-6;
        let g = green_gradient(x, y, 1.0);
        let gh = regular_part_gradient(x, y, 1.0);
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let fd = (green_unchecked(xp, y, 1.0) - green_unchecked(xm, y, 1.0)) / (2.0 * h);
            let fdh = (regular_part(xp, y, 1.0) - regular_part(xm, y, 1.0)) / (2.0 * h);
            assert!((fd - g[a]).abs() < 1e-8);
            assert!((fdh - gh[a]).abs() < 1e-8);
        }
    }
}
