//! `U = w_model + Σ(1+θᵢ)Bᵢ` with truncated bubbles `Bᵢ`.

use serde::Serialize;

use super::green::{green_gradient, green_unchecked, norm, regular_part, regular_part_gradient, DiskGeometry, Point};
use super::weak_limit::{ModelWeakLimit, DEFAULT_CUTOFF};
use crate::asymptotics::{truncation_constants, TruncationConstants};
use crate::cluster::ClusterSolution;
use crate::heights::HeightSolution;
use crate::numerics::Tolerances;
use crate::profiles::BubbleProfile;
use crate::schedule::ParameterSchedule;
use crate::{Error, Result};

/// Parameters of the model weak limit that are not fixed by the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakLimitParams {
    pub a0: f64,
    pub cutoff_radius: f64,
}

impl WeakLimitParams {
    pub fn new(a0: f64) -> Self {
        WeakLimitParams { a0, cutoff_radius: DEFAULT_CUTOFF }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnsatzField {
    pub geometry: DiskGeometry,
    pub schedule: ParameterSchedule,
    pub centers: Vec<f64>,
    pub heights: Vec<f64>,
    pub thetas: Vec<f64>,
    pub constants: Vec<TruncationConstants>,
    pub weak_limit: ModelWeakLimit,
    pub lambda_h: f64,
    #[serde(skip)]
    pub(crate) profiles: Vec<BubbleProfile>,
    r: f64,
}

/// Centers from a cluster solution, heights from the height system.
pub fn assemble(
    schedule: &ParameterSchedule,
    cluster: &ClusterSolution,
    heights: &HeightSolution,
    thetas: &[f64],
    params: WeakLimitParams,
) -> Result<AnsatzField> {
    let tau = schedule.centers_from_cluster(&cluster.y);
    assemble_at(schedule, &tau, &heights.gammas, thetas, params, DiskGeometry::default(), 1.0)
}

/// General builder: explicit centers and heights.
pub fn assemble_at(
    schedule: &ParameterSchedule,
    tau: &[f64],
    heights: &[f64],
    thetas: &[f64],
    params: WeakLimitParams,
    geometry: DiskGeometry,
    lambda_h: f64,
) -> Result<AnsatzField> {
    let k = tau.len();
    if heights.len() != k || thetas.len() != k || schedule.k != k {
        return Err(Error::ConstraintViolation(format!(
            "{} centers, {} heights, {} thetas for a schedule with k = {}",
            k,
            heights.len(),
            thetas.len(),
            schedule.k
        )));
    }
    let r = schedule.r_trunc;
    if !(r > 0.0) {
        return Err(Error::RangeViolation("truncation radius underflows".into()));
    }
    for (i, th) in thetas.iter().enumerate() {
        if !(th.abs() <= schedule.theta_box) {
            return Err(Error::ConstraintViolation(format!(
                "|θ_{i}| ≤ δ_ε ln γ̄/γ̄⁴ = {:e} violated: θ_{i} = {th:e}",
                schedule.theta_box
            )));
        }
    }
    for i in 0..k {
        if !(tau[i].abs() + r < geometry.radius) {
            return Err(Error::ConstraintViolation(format!("ball around τ_{i} = {} leaves the disk", tau[i])));
        }
        for j in 0..i {
            if !((tau[i] - tau[j]).abs() > 2.0 * r) {
                return Err(Error::ConstraintViolation(format!("balls around τ_{j} and τ_{i} overlap")));
            }
        }
    }
    let weak_limit = ModelWeakLimit::new(
        params.a0,
        schedule.l,
        schedule.w_center,
        params.cutoff_radius,
        geometry.radius,
    )?;
    let tol = Tolerances::tight();
    let mut constants = Vec::with_capacity(k);
    let mut profiles = Vec::with_capacity(k);
    for &g in heights {
        let (c, p) = truncation_constants(g, schedule.r_trunc_log, lambda_h, &tol)?;
        constants.push(c);
        profiles.push(p);
    }
    Ok(AnsatzField {
        geometry,
        schedule: schedule.clone(),
        centers: tau.to_vec(),
        heights: heights.to_vec(),
        thetas: thetas.to_vec(),
        constants,
        weak_limit,
        lambda_h,
        profiles,
        r,
    })
}

impl AnsatzField {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn truncation_radius(&self) -> f64 {
        self.r
    }

    pub fn center(&self, i: usize) -> Point {
        [self.centers[i], 0.0]
    }

    pub fn profile(&self, i: usize) -> &BubbleProfile {
        &self.profiles[i]
    }

    /// Scaled radius `√(λh)ρ/μᵢ`.
    pub fn scaled_radius(&self, i: usize, rho: f64) -> f64 {
        self.lambda_h.sqrt() * rho / self.profiles[i].mu
    }

    /// `B̄ᵢ(√(λh)ρ)`.
    pub fn inner_bubble(&self, i: usize, rho: f64) -> f64 {
        self.profiles[i].bubble_at(self.scaled_radius(i, rho))
    }

    /// `d/dρ B̄ᵢ(√(λh)ρ)`.
    pub fn inner_bubble_slope(&self, i: usize, rho: f64) -> f64 {
        let p = &self.profiles[i];
        let s = self.scaled_radius(i, rho);
        -p.w_at(s).1 / p.gamma * self.lambda_h.sqrt() / p.mu
    }

    fn offset(&self, i: usize, x: Point) -> (Point, f64) {
        let d = [x[0] - self.centers[i], x[1]];
        (d, norm(d))
    }

    fn inner_regular(&self, i: usize, x: Point) -> f64 {
        let c = &self.constants[i];
        -c.c + c.a * regular_part(x, self.center(i), self.geometry.radius)
    }

    pub fn truncated_bubble(&self, i: usize, x: Point) -> f64 {
        let (_, rho) = self.offset(i, x);
        if rho < self.r {
            self.inner_bubble(i, rho) + self.inner_regular(i, x)
        } else {
            self.constants[i].a * green_unchecked(x, self.center(i), self.geometry.radius)
        }
    }

    pub fn truncated_bubble_gradient(&self, i: usize, x: Point) -> Point {
        let (d, rho) = self.offset(i, x);
        let a = self.constants[i].a;
        let rr = self.geometry.radius;
        if rho < self.r {
            let gh = regular_part_gradient(x, self.center(i), rr);
            let b = if rho > 0.0 { self.inner_bubble_slope(i, rho) / rho } else { 0.0 };
            [b * d[0] + a * gh[0], b * d[1] + a * gh[1]]
        } else {
            let g = green_gradient(x, self.center(i), rr);
            [a * g[0], a * g[1]]
        }
    }

    pub fn value(&self, x: Point) -> f64 {
        let mut u = self.weak_limit.value(x);
        for i in 0..self.k() {
            u += (1.0 + self.thetas[i]) * self.truncated_bubble(i, x);
        }
        u
    }

    pub fn gradient(&self, x: Point) -> Point {
        let mut g = self.weak_limit.sample(x).gradient;
        for i in 0..self.k() {
            let b = self.truncated_bubble_gradient(i, x);
            g[0] += (1.0 + self.thetas[i]) * b[0];
            g[1] += (1.0 + self.thetas[i]) * b[1];
        }
        g
    }

    /// `U − B̄ᵢ` inside ball `i`, formed without the large `B̄ᵢ` term.
    pub fn perturbation(&self, i: usize, x: Point) -> f64 {
        let (_, rho) = self.offset(i, x);
        let mut v = self.thetas[i] * self.inner_bubble(i, rho)
            + (1.0 + self.thetas[i]) * self.inner_regular(i, x)
            + self.weak_limit.value(x);
        for j in 0..self.k() {
            if j != i {
                v += (1.0 + self.thetas[j]) * self.truncated_bubble(j, x);
            }
        }
        v
    }

    /// `U(τ̄ᵢ) − γᵢ`.
    pub fn center_excess(&self, i: usize) -> f64 {
        self.perturbation(i, self.center(i)) + (self.inner_bubble(i, 0.0) - self.heights[i])
    }

    /// Value and radial-derivative jumps of `Bᵢ` across `|x − τ̄ᵢ| = r` along direction `angle`.
    ///
    /// The singular part of `G` is taken at the exact radius `r`: a sample point
    /// `τ̄ᵢ + r·e` is only representable to `ε|τ̄ᵢ|`, which can exceed `1e−9·r`.
    pub fn matching_jumps(&self, i: usize, angle: f64) -> (f64, f64) {
        let e = [angle.cos(), angle.sin()];
        let x = [self.centers[i] + self.r * e[0], self.r * e[1]];
        let rr = self.geometry.radius;
        let c = &self.constants[i];
        let h = regular_part(x, self.center(i), rr);
        let gh = regular_part_gradient(x, self.center(i), rr);
        let dh = gh[0] * e[0] + gh[1] * e[1];
        let two_pi = 2.0 * std::f64::consts::PI;
        let inner = self.inner_bubble(i, self.r) - c.c + c.a * h;
        let outer = c.a * (-self.schedule.r_trunc_log / two_pi + h);
        let d_inner = self.inner_bubble_slope(i, self.r) + c.a * dh;
        let d_outer = c.a * (-1.0 / (two_pi * self.r) + dh);
        (inner - outer, d_inner - d_outer)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{cluster, pair};
    use super::*;
    use crate::heights::{solve_heights, HeightProblem};
    use crate::schedule::build_schedule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn c1_matching() {
        for g in [6.0, 8.0, 10.0] {
            let f = pair(g, 0.4);
            let r = f.truncation_radius();
            for i in 0..2 {
                for m in 0..8 {
                    let (dv, dd) = f.matching_jumps(i, m as f64 * 0.7);
                    // local scales: the value B(r) and the slope |B̄'(r)| ~ 2/(γr)
                    let scale_v = f.inner_bubble(i, r).abs();
                    let scale_d = f.inner_bubble_slope(i, r).abs();
                    assert!(dv.abs() / scale_v < 1e-9, "γ̄ = {g}: value jump {dv:e}");
                    assert!(dd.abs() / scale_d < 1e-9, "γ̄ = {g}: slope jump {dd:e}");
                }
            }
        }
    }

    #[test]
    fn far_field_is_the_green_branch() {
        let f = pair(8.0, 0.4);
        let r = f.truncation_radius();
        for i in 0..2 {
            let x = [f.centers[i] + 10.0 * r, 0.0];
            let g = green_unchecked(x, f.center(i), 1.0);
            assert_eq!(f.truncated_bubble(i, x), f.constants[i].a * g);
        }
    }

    #[test]
    fn magnitude_at_the_truncation_radius() {
        let f = pair(8.0, 0.4);
        let r = f.truncation_radius();
        for i in 0..2 {
            let b = f.truncated_bubble(i, [f.centers[i] + r, 0.0]);
            let ratio = b * f.heights[i] / (2.0 * (1.0 / r).ln());
            assert!((ratio - 1.0).abs() <= 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn no_bubbles_is_the_weak_limit() {
        let s = build_schedule(8.0, 0, 2, 0.4, 0.1).unwrap();
        let f = assemble_at(&s, &[], &[], &[], WeakLimitParams::new(1.0), DiskGeometry::default(), 1.0).unwrap();
        for x in [[0.1, 0.2], [-0.7, 0.3], [0.0, 0.0]] {
            assert_eq!(f.value(x), f.weak_limit.value(x));
        }
    }

    #[test]
    fn center_value_is_the_height() {
        let s = build_schedule(8.0, 2, 2, 0.4, 0.1).unwrap();
        let cs = cluster(2, 2);
        let tau = s.centers_from_cluster(&cs.y);
        let hs = solve_heights(&HeightProblem::new(s.clone(), 1.0, tau, DiskGeometry::default()).unwrap()).unwrap();
        let f = assemble(&s, &cs, &hs, &[0.0, 0.0], WeakLimitParams::new(1.0)).unwrap();
        for i in 0..2 {
            assert!(f.center_excess(i).abs() <= 1e-10, "excess {:e}", f.center_excess(i));
        }
    }

    #[test]
    fn even_in_x2() {
        let f = pair(8.0, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (rho, th): (f64, f64) = (rng.gen_range(0.0..0.99), rng.gen_range(0.0..std::f64::consts::PI));
            let x = [rho * th.cos(), rho * th.sin()];
            let (a, b) = (f.value(x), f.value([x[0], -x[1]]));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn constraints() {
        let s = build_schedule(8.0, 2, 2, 0.4, 0.1).unwrap();
        let p = WeakLimitParams::new(1.0);
        let geo = DiskGeometry::default();
        let big = 2.0 * s.theta_box;
        assert!(matches!(
            assemble_at(&s, &[-0.25, 0.25], &[7.0, 7.0], &[big, 0.0], p, geo, 1.0),
            Err(Error::ConstraintViolation(_))
        ));
        assert!(assemble_at(&s, &[-0.25, 0.25], &[7.0, 7.0], &[0.5 * s.theta_box, 0.0], p, geo, 1.0).is_ok());
        assert!(assemble_at(&s, &[0.25], &[7.0], &[0.0], p, geo, 1.0).is_err());
        assert!(assemble_at(&s, &[-0.25, 1.0], &[7.0, 7.0], &[0.0, 0.0], p, geo, 1.0).is_err());
    }
}
