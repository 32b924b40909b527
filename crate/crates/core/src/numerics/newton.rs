//! Damped Newton iteration with a natural-monotonicity step test.
//!
//! The acceptance test compares simplified Newton corrections `J(x)⁻¹F(x + λΔ)`
//! against `Δ`, so the iterates do not change when `F` and `J` are scaled row-wise.

use super::linalg::{condition_number, Matrix};
use super::Tolerances;
use crate::{Error, Result};

const COND_LIMIT: f64 = 1e12;
const MAX_HALVINGS: usize = 40;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub root: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton on an infallible system over all of `ℝⁿ`.
pub fn newton_solve<F, J>(f: F, jac: J, x0: &[f64], tol: &Tolerances) -> Result<NewtonReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> Matrix,
{
    newton_solve_in(|x| Ok(f(x)), |x| Ok(jac(x)), x0, tol, |_| true)
}

/// Newton with fallible evaluations and a domain predicate; trial points
/// outside the domain are handled by step halving, never by projection.
pub fn newton_solve_in<F, J, D>(
    mut f: F,
    mut jac: J,
    x0: &[f64],
    tol: &Tolerances,
    domain: D,
) -> Result<NewtonReport>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<Matrix>,
    D: Fn(&[f64]) -> bool,
{
    if !domain(x0) {
        return Err(Error::InvalidInput("initial point outside the domain".into()));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    if fx.len() != n {
        return Err(Error::InvalidInput("system is not square".into()));
    }
    let max_iter = tol.max_steps.min(MAX_ITER);
    let mut polished = false;
    for it in 0..=max_iter {
        let res = inf_norm(&fx);
        if !res.is_finite() {
            return Err(Error::NonFinite("residual".into()));
        }
        if res <= tol.abs && polished {
            return Ok(NewtonReport { root: x, residual_inf: res, iterations: it });
        }
        if it == max_iter {
            break;
        }
        let j = jac(&x)?;
        let cond = condition_number(&j);
        if !(cond <= COND_LIMIT) {
            return Err(Error::Singular(cond));
        }
        let lu = j.lu();
        let solve = |r: &[f64]| -> Result<Vec<f64>> {
            let b = nalgebra::DVector::from_column_slice(r);
            lu.solve(&b)
                .map(|v| v.iter().map(|c| -c).collect())
                .ok_or(Error::Singular(f64::INFINITY))
        };
        let delta = solve(&fx)?;
        let dn = inf_norm(&delta);
        if res <= tol.abs {
            // One extra full step once converged: both the scaled and the
            // unscaled system then land on the same rounding-level root.
            let xt: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + d).collect();
            polished = true;
            if domain(&xt) {
                if let Ok(ft) = f(&xt) {
                    if inf_norm(&ft) <= res.max(tol.abs) {
                        x = xt;
                        fx = ft;
                    }
                }
            }
            continue;
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let xt: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if domain(&xt) {
                if let Ok(ft) = f(&xt) {
                    if ft.iter().all(|v| v.is_finite()) {
                        let bar = solve(&ft)?;
                        if inf_norm(&bar) <= (1.0 - 0.25 * lambda) * dn || dn == 0.0 {
                            x = xt;
                            fx = ft;
                            accepted = true;
                            break;
                        }
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence(format!(
                "damping failed at iteration {it} (residual {res:e})"
            )));
        }
    }
    Err(Error::NoConvergence(format!(
        "{} iterations, residual {:e}",
        max_iter,
        inf_norm(&fx)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances { rel: 1e-12, abs: 1e-13, max_steps: 100 }
    }

    #[test]
    fn square_root_of_two() {
        let r = newton_solve(
            |x| vec![x[0] * x[0] - 2.0],
            |x| Matrix::from_element(1, 1, 2.0 * x[0]),
            &[1.0],
            &tol(),
        )
        .unwrap();
        assert!((r.root[0] - 1.41421356237).abs() < 1e-10);
        assert!((r.root[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn singular_jacobian() {
        let r = newton_solve(
            |x| vec![x[0] * x[0] + 1.0, x[1]],
            |_| Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            &[1.0, 1.0],
            &tol(),
        );
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    #[test]
    fn no_real_root() {
        let r = newton_solve(
            |x| vec![x[0] * x[0] + 1.0],
            |x| Matrix::from_element(1, 1, 2.0 * x[0]),
            &[1.0],
            &tol(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn domain_respected() {
        // Full steps from x0 = 0.1 would jump to negative x for ln x = 1.
        let r = newton_solve_in(
            |x| Ok(vec![x[0].ln() - 1.0]),
            |x| Ok(Matrix::from_element(1, 1, 1.0 / x[0])),
            &[5.0],
            &tol(),
            |x| x[0] > 0.0,
        )
        .unwrap();
        assert!((r.root[0] - std::f64::consts::E).abs() < 1e-12);
    }
}
