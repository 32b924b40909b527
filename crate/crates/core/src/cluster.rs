//! Confined log-gas `J(y) = a₀Σyᵢˡ + Σ_{i≠j} ln|yᵢ − yⱼ|⁻¹`, its gradient `N`
//! and the interaction matrix of the linearised height system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::numerics::linalg::{determinant, symmetric_eigenvalues, Matrix};
use crate::numerics::{newton_solve_in, Tolerances};
use crate::{Error, Result};

/// Minimum admissible gap between particles.
pub const COINCIDENCE_GAP: f64 = 1e-12;
/// Restarts must agree to this sup-distance.
pub const AGREEMENT: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterProblem {
    pub k: usize,
    pub l: usize,
    pub a0: f64,
}

impl ClusterProblem {
    pub fn new(k: usize, l: usize, a0: f64) -> Result<Self> {
        let p = ClusterProblem { k, l, a0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::ConstraintViolation("k ≥ 1 required".into()));
        }
        if self.l < 2 || self.l % 2 != 0 {
            return Err(Error::ConstraintViolation(format!("l must be even and ≥ 2, got {}", self.l)));
        }
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::ConstraintViolation(format!("a₀ > 0 required, got {}", self.a0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSolution {
    pub y: Vec<f64>,
    pub grad_norm: f64,
    pub hess_min_eig: f64,
    pub restarts_agreed: usize,
}

fn check_distinct(y: &[f64]) -> Result<()> {
    for i in 0..y.len() {
        for j in 0..i {
            let gap = (y[i] - y[j]).abs();
            if !(gap >= COINCIDENCE_GAP) {
                return Err(Error::CoincidentPoints(gap));
            }
        }
    }
    Ok(())
}

fn check_len(p: &ClusterProblem, y: &[f64]) -> Result<()> {
    if y.len() != p.k {
        return Err(Error::InvalidInput(format!("expected {} coordinates, got {}", p.k, y.len())));
    }
    check_distinct(y)
}

/// `Nᵢ(y) = a₀l yᵢ^{l−1} − 2Σ_{j≠i} 1/(yᵢ − yⱼ)`.
pub fn eval_n(p: &ClusterProblem, y: &[f64]) -> Result<Vec<f64>> {
    check_len(p, y)?;
    let l = p.l as i32;
    Ok((0..p.k)
        .map(|i| {
            let inter: f64 = (0..p.k).filter(|&j| j != i).map(|j| 1.0 / (y[i] - y[j])).sum();
            p.a0 * l as f64 * y[i].powi(l - 1) - 2.0 * inter
        })
        .collect())
}

pub fn eval_j(p: &ClusterProblem, y: &[f64]) -> Result<f64> {
    check_len(p, y)?;
    let mut v: f64 = y.iter().map(|x| p.a0 * x.powi(p.l as i32)).sum();
    for i in 0..p.k {
        for j in 0..p.k {
            if i != j {
                v -= (y[i] - y[j]).abs().ln();
            }
        }
    }
    Ok(v)
}

pub fn eval_hessian(p: &ClusterProblem, y: &[f64]) -> Result<Matrix> {
    check_len(p, y)?;
    let l = p.l as i32;
    let mut h = Matrix::zeros(p.k, p.k);
    for i in 0..p.k {
        let mut diag = p.a0 * (l * (l - 1)) as f64 * y[i].powi(l - 2);
        for j in 0..p.k {
            if j != i {
                let c = 2.0 / (y[i] - y[j]).powi(2);
                h[(i, j)] = -c;
                diag += c;
            }
        }
        h[(i, i)] = diag;
    }
    Ok(h)
}

/// Equispaced symmetric start scaled by `(k/(a₀l))^{1/l}`.
pub fn initial_guess(p: &ClusterProblem) -> Vec<f64> {
    let scale = (p.k as f64 / (p.a0 * p.l as f64)).powf(1.0 / p.l as f64);
    if p.k == 1 {
        return vec![0.0];
    }
    let m = (p.k - 1) as f64;
    (0..p.k).map(|i| scale * (2.0 * i as f64 / m - 1.0)).collect()
}

fn ordered(y: &[f64]) -> bool {
    y.windows(2).all(|w| w[1] - w[0] >= COINCIDENCE_GAP) && y.iter().all(|v| v.is_finite())
}

fn newton_from(p: &ClusterProblem, y0: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    let r = newton_solve_in(|y| eval_n(p, y), |y| eval_hessian(p, y), y0, tol, ordered)?;
    Ok(r.root)
}

/// Sorted uniform samples in `[−k, k]`, re-drawn until strictly ordered.
fn random_start(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut y: Vec<f64> = (0..k).map(|_| rng.gen_range(-(k as f64)..=k as f64)).collect();
        y.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        if ordered(&y) {
            return y;
        }
    }
}

pub fn solve_cluster(p: &ClusterProblem, restarts: usize, tol: &Tolerances) -> Result<ClusterSolution> {
    solve_cluster_seeded(p, restarts, tol, DEFAULT_SEED)
}

/// Newton from the symmetric start, then `restarts` random ordered starts; each
/// restart draws from its own stream so the result does not depend on scheduling.
pub fn solve_cluster_seeded(
    p: &ClusterProblem,
    restarts: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<ClusterSolution> {
    p.validate()?;
    if restarts == 0 {
        return Err(Error::InvalidInput("restarts ≥ 1 required".into()));
    }
    if p.k == 1 {
        // a₀l y^{l−1} = 0 only at the origin; for l ≥ 4 the zero is degenerate and
        // Newton would crawl, so the closed form is returned.
        let h = symmetric_eigenvalues(&eval_hessian(p, &[0.0])?)[0];
        return Ok(ClusterSolution { y: vec![0.0], grad_norm: 0.0, hess_min_eig: h, restarts_agreed: restarts });
    }
    let y = newton_from(p, &initial_guess(p), tol)?;
    let others: Vec<Result<Vec<f64>>> = (0..restarts as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            newton_from(p, &random_start(p.k, &mut rng), tol)
        })
        .collect();
    let mut agreed = 0;
    for r in others {
        let yr = r?;
        let dist = y.iter().zip(&yr).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if dist > AGREEMENT {
            return Err(Error::NoConvergence(format!(
                "restarts disagree by {dist:e}: the zero should be unique"
            )));
        }
        agreed += 1;
    }
    let n = eval_n(p, &y)?;
    let grad_norm = n.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let hess_min_eig = symmetric_eigenvalues(&eval_hessian(p, &y)?)[0];
    if !(hess_min_eig > 0.0) {
        // Only reachable for k ≥ 2, where the interaction term makes ∇²J definite.
        return Err(Error::NoConvergence(format!("Hessian not positive definite ({hess_min_eig:e})")));
    }
    Ok(ClusterSolution { y, grad_norm, hess_min_eig, restarts_agreed: agreed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionMatrix {
    pub k: usize,
    pub l: usize,
    pub matrix: Vec<Vec<f64>>,
    pub determinant: f64,
    pub closed_form: f64,
    pub eigenvalues: Vec<f64>,
}

/// `(1 + (k−1)/l)(1 − 1/l)^{k−1}`.
pub fn interaction_determinant_closed_form(k: usize, l: usize) -> f64 {
    let l = l as f64;
    (1.0 + (k as f64 - 1.0) / l) * (1.0 - 1.0 / l).powi(k as i32 - 1)
}

/// Unit diagonal, off-diagonal `1/l`; determinant from dense LU.
pub fn interaction_matrix_q(k: usize, l: usize) -> Result<InteractionMatrix> {
    if k == 0 || l < 2 {
        return Err(Error::InvalidInput(format!("k ≥ 1 and l ≥ 2 required (k = {k}, l = {l})")));
    }
    let off = 1.0 / l as f64;
    let q = Matrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { off });
    Ok(InteractionMatrix {
        k,
        l,
        matrix: (0..k).map(|i| (0..k).map(|j| q[(i, j)]).collect()).collect(),
        determinant: determinant(&q),
        closed_form: interaction_determinant_closed_form(k, l),
        eigenvalues: symmetric_eigenvalues(&q),
    })
}
