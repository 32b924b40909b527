//! Height system `E⁽ⁱ⁾(γ) = 0` fixing the bubble amplitudes, and its limiting form.

use std::cell::RefCell;

use serde::Serialize;

use crate::ansatz::green::{green_unchecked, regular_part, DiskGeometry, Point};
use crate::asymptotics::{truncation_constants, TruncationConstants};
use crate::numerics::linalg::Matrix;
use crate::numerics::{newton_solve, newton_solve_in, Tolerances};
use crate::profiles::{GAMMA_MAX, GAMMA_MIN};
use crate::schedule::ParameterSchedule;
use crate::{Error, Result};

/// Default separation parameter `δ` for the admissible center set.
pub const DEFAULT_TAU_DELTA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightProblem {
    pub schedule: ParameterSchedule,
    pub a0: f64,
    pub tau: Vec<f64>,
    pub geometry: DiskGeometry,
    pub lambda_h: f64,
    pub tau_delta: f64,
}

impl HeightProblem {
    pub fn new(schedule: ParameterSchedule, a0: f64, tau: Vec<f64>, geometry: DiskGeometry) -> Result<Self> {
        let p = HeightProblem { schedule, a0, tau, geometry, lambda_h: 1.0, tau_delta: DEFAULT_TAU_DELTA };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0) {
            return Err(Error::ConstraintViolation(format!("a₀ > 0 required, got {}", self.a0)));
        }
        self.schedule.check_tau(&self.tau, self.tau_delta)?;
        for (i, &t) in self.tau.iter().enumerate() {
            if !self.geometry.contains([t, 0.0]) {
                return Err(Error::ConstraintViolation(format!("center τ_{i} = {t} outside the disk")));
            }
        }
        Ok(())
    }

    fn center(&self, i: usize) -> Point {
        [self.tau[i], 0.0]
    }

    /// `w` at the centers: `w_center + a₀τᵢˡ`.
    pub fn weak_limit_at_centers(&self) -> Vec<f64> {
        let l = self.schedule.l as i32;
        self.tau.iter().map(|t| self.schedule.w_center + self.a0 * t.powi(l)).collect()
    }

    /// `H(τ̄ᵢ, τ̄ⱼ)` on the diagonal, `G(τ̄ᵢ, τ̄ⱼ)` off it.
    pub fn green_matrix(&self) -> Matrix {
        let k = self.tau.len();
        let r = self.geometry.radius;
        Matrix::from_fn(k, k, |i, j| {
            if i == j {
                regular_part(self.center(i), self.center(i), r)
            } else {
                green_unchecked(self.center(i), self.center(j), r)
            }
        })
    }

    pub fn constants(&self, gammas: &[f64], tol: &Tolerances) -> Result<Vec<TruncationConstants>> {
        gammas
            .iter()
            .map(|&g| truncation_constants(g, self.schedule.r_trunc_log, self.lambda_h, tol).map(|c| c.0))
            .collect()
    }

    fn residual_from(&self, c: &[TruncationConstants], gm: &Matrix, wc: &[f64]) -> Vec<f64> {
        let k = c.len();
        (0..k)
            .map(|i| {
                let mut e = wc[i] - c[i].c;
                for j in 0..k {
                    e += c[j].a * gm[(i, j)];
                }
                e
            })
            .collect()
    }

    fn jacobian_from(&self, c: &[TruncationConstants], gm: &Matrix) -> Matrix {
        let k = c.len();
        Matrix::from_fn(k, k, |i, j| if i == j { -c[i].dc + c[i].da * gm[(i, i)] } else { c[j].da * gm[(i, j)] })
    }

    /// `E⁽ⁱ⁾(γ) = w(τ̄ᵢ) − Cᵢ + AᵢH(τ̄ᵢ,τ̄ᵢ) + Σ_{j≠i} AⱼG(τ̄ᵢ,τ̄ⱼ)`.
    pub fn residual(&self, gammas: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
        let c = self.constants(gammas, tol)?;
        Ok(self.residual_from(&c, &self.green_matrix(), &self.weak_limit_at_centers()))
    }

    /// Variational Jacobian from `∂A`, `∂C`.
    pub fn jacobian(&self, gammas: &[f64], tol: &Tolerances) -> Result<Matrix> {
        let c = self.constants(gammas, tol)?;
        Ok(self.jacobian_from(&c, &self.green_matrix()))
    }

    /// Central-difference Jacobian of the residual.
    pub fn jacobian_fd(&self, gammas: &[f64], h: f64, tol: &Tolerances) -> Result<Matrix> {
        let k = gammas.len();
        let mut m = Matrix::zeros(k, k);
        for j in 0..k {
            let mut gp = gammas.to_vec();
            let mut gm = gammas.to_vec();
            gp[j] += h;
            gm[j] -= h;
            let (ep, em) = (self.residual(&gp, tol)?, self.residual(&gm, tol)?);
            for i in 0..k {
                m[(i, j)] = (ep[i] - em[i]) / (2.0 * h);
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightSolution {
    pub gammas: Vec<f64>,
    pub e_residual: Vec<f64>,
    pub ratios: Vec<f64>,
    pub constants: Vec<TruncationConstants>,
    pub iterations: usize,
}

impl HeightSolution {
    pub fn max_ratio_deviation(&self) -> f64 {
        self.ratios.iter().fold(0.0, |m, r| m.max((r - 1.0).abs()))
    }
}

/// Newton tolerance used for the height system; the residual is only smooth in γ
/// to roughly the profile integration accuracy.
pub fn height_tolerances() -> Tolerances {
    Tolerances { rel: 1e-12, abs: 1e-10, max_steps: 100 }
}

pub fn solve_heights(problem: &HeightProblem) -> Result<HeightSolution> {
    solve_heights_with(problem, &height_tolerances())
}

/// Newton from `γᵢ = γ̄`, sharing one set of profiles between residual and Jacobian.
pub fn solve_heights_with(problem: &HeightProblem, newton_tol: &Tolerances) -> Result<HeightSolution> {
    problem.validate()?;
    let ode = Tolerances::tight();
    let gm = problem.green_matrix();
    let wc = problem.weak_limit_at_centers();
    let cache: RefCell<Option<(Vec<f64>, Vec<TruncationConstants>)>> = RefCell::new(None);
    let fetch = |g: &[f64]| -> Result<Vec<TruncationConstants>> {
        if let Some((key, c)) = cache.borrow().as_ref() {
            if key.as_slice() == g {
                return Ok(c.clone());
            }
        }
        let c = problem.constants(g, &ode)?;
        *cache.borrow_mut() = Some((g.to_vec(), c.clone()));
        Ok(c)
    };
    let ln_r = problem.schedule.r_trunc_log;
    let domain = |g: &[f64]| {
        g.iter().all(|&x| {
            (GAMMA_MIN..=GAMMA_MAX).contains(&x) && ln_r - crate::profiles::ln_mu(x) > 1.0
        })
    };
    let x0 = vec![problem.schedule.gamma_bar; problem.tau.len()];
    let rep = newton_solve_in(
        |g| fetch(g).map(|c| problem.residual_from(&c, &gm, &wc)),
        |g| fetch(g).map(|c| problem.jacobian_from(&c, &gm)),
        &x0,
        newton_tol,
        domain,
    )?;
    let constants = fetch(&rep.root)?;
    let e_residual = problem.residual_from(&constants, &gm, &wc);
    let gb = problem.schedule.gamma_bar;
    Ok(HeightSolution {
        ratios: rep.root.iter().map(|g| g / gb).collect(),
        gammas: rep.root,
        e_residual,
        constants,
        iterations: rep.iterations,
    })
}

/// `E₀ᵢ(x) = −2(k+l−1)/l + 2/xᵢ + (2/l)Σ_{j≠i} 1/xⱼ`.
pub fn limiting_system(k: usize, l: usize, x: &[f64]) -> Vec<f64> {
    let lf = l as f64;
    let total: f64 = x.iter().map(|v| 1.0 / v).sum();
    x.iter()
        .map(|&xi| -2.0 * (k + l - 1) as f64 / lf + 2.0 / xi + 2.0 / lf * (total - 1.0 / xi))
        .collect()
}

pub fn limiting_jacobian(l: usize, x: &[f64]) -> Matrix {
    let k = x.len();
    Matrix::from_fn(k, k, |i, j| {
        let c = -1.0 / (x[j] * x[j]);
        if i == j {
            2.0 * c
        } else {
            2.0 / l as f64 * c
        }
    })
}

pub fn solve_limiting(k: usize, l: usize, x0: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(newton_solve(|x| limiting_system(k, l, x), |x| limiting_jacobian(l, x), x0, tol)?.root)
}

/// The height system with `A = 4π/γᵢ`, `C = −2lnγ̄/γᵢ`, `H = 0`,
/// `G = lnγ̄/(2πl)` and `w = w_center`; equals `(lnγ̄/γ̄)·E₀(γ/γ̄)`.
pub fn leading_order_residual(schedule: &ParameterSchedule, gammas: &[f64]) -> Vec<f64> {
    let lg = schedule.gamma_bar.ln();
    let lf = schedule.l as f64;
    let total: f64 = gammas.iter().map(|g| 1.0 / g).sum();
    gammas
        .iter()
        .map(|&gi| schedule.w_center + 2.0 * lg / gi + 2.0 * lg / lf * (total - 1.0 / gi))
        .collect()
}

pub fn solve_leading_order(schedule: &ParameterSchedule, tol: &Tolerances) -> Result<Vec<f64>> {
    let lg = schedule.gamma_bar.ln();
    let x0 = vec![0.8 * schedule.gamma_bar; schedule.k];
    let jac = |g: &[f64]| {
        let k = g.len();
        Matrix::from_fn(k, k, |i, j| {
            let c = -2.0 * lg / (g[j] * g[j]);
            if i == j {
                c
            } else {
                c / schedule.l as f64
            }
        })
    };
    Ok(newton_solve(|g| leading_order_residual(schedule, g), jac, &x0, tol)?.root)
}

/// `∂_{γᵢ}E⁽ⁱ⁾` by central differences, divided by `−2lnγ̄/γ̄²`.
pub fn self_derivative_ratios(problem: &HeightProblem, sol: &HeightSolution, h: f64) -> Result<Vec<f64>> {
    let m = problem.jacobian_fd(&sol.gammas, h, &Tolerances::tight())?;
    let gb = problem.schedule.gamma_bar;
    let reference = -2.0 * gb.ln() / (gb * gb);
    Ok((0..sol.gammas.len()).map(|i| m[(i, i)] / reference).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{solve_cluster, ClusterProblem};
    use crate::schedule::build_schedule;

    fn cluster_problem(gb: f64) -> HeightProblem {
        let sched = build_schedule(gb, 2, 2, 0.4, 0.1).unwrap();
        let cl = solve_cluster(&ClusterProblem::new(2, 2, 1.0).unwrap(), 4, &Tolerances::default()).unwrap();
        let tau = sched.centers_from_cluster(&cl.y);
        HeightProblem::new(sched, 1.0, tau, DiskGeometry::default()).unwrap()
    }

    #[test]
    fn limiting_root() {
        let tol = Tolerances { rel: 1e-14, abs: 1e-14, max_steps: 100 };
        for (k, l) in [(1, 2), (2, 2), (3, 4), (5, 6)] {
            let x = solve_limiting(k, l, &vec![0.8; k], &tol).unwrap();
            assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12), "{x:?}");
        }
    }

    #[test]
    fn leading_order_reduces_to_limit() {
        let sched = build_schedule(10.0, 3, 2, 0.4, 0.1).unwrap();
        let tol = Tolerances { rel: 1e-14, abs: 1e-14, max_steps: 100 };
        let g = solve_leading_order(&sched, &tol).unwrap();
        assert!(g.iter().all(|v| (v / 10.0 - 1.0).abs() < 1e-12), "{g:?}");
        let x = [0.9, 1.05, 1.2];
        let e = leading_order_residual(&sched, &x.map(|v| 10.0 * v));
        let e0 = limiting_system(3, 2, &x);
        for (a, b) in e.iter().zip(&e0) {
            assert!((a - 10f64.ln() / 10.0 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let p = cluster_problem(8.0);
        let g = [7.0, 7.1];
        let tol = Tolerances::tight();
        let ja = p.jacobian(&g, &tol).unwrap();
        let jf = p.jacobian_fd(&g, 1e-4, &tol).unwrap();
        assert!((ja - jf).abs().max() < 1e-7);
    }

    #[test]
    fn heights_solve() {
        let p = cluster_problem(8.0);
        let s = solve_heights(&p).unwrap();
        assert!(s.e_residual.iter().all(|e| e.abs() <= 1e-10));
        assert!((s.gammas[0] - s.gammas[1]).abs() < 1e-8);
    }

    #[test]
    fn ratios_approach_one() {
        let d: Vec<f64> = [8.0, 12.0, 16.0]
            .iter()
            .map(|&gb| solve_heights(&cluster_problem(gb)).unwrap().max_ratio_deviation())
            .collect();
        assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
    }

    #[test]
    fn self_derivative_band() {
        let p = cluster_problem(16.0);
        let s = solve_heights(&p).unwrap();
        let r = self_derivative_ratios(&p, &s, 1e-3).unwrap();
        for v in r {
            assert!((0.7..=1.3).contains(&v), "∂E/(−2lnγ̄/γ̄²) = {v}");
        }
    }
}
