//! Shared numerical plumbing.

mod grid;
pub mod linalg;
mod newton;
mod ode;
pub mod quad;
mod regression;

pub use grid::LogGrid;
pub use newton::{newton_solve, newton_solve_in, NewtonReport};
pub use ode::{integrate_radial_ivp, integrate_radial_system, RadialSolution, TAYLOR_START};
pub use quad::{gauss_legendre, quad_radial, quad_radial_between, QuadResult};
pub use regression::{linear_fit, loglog_slope, SlopeReport};

use serde::Serialize;

use crate::{Error, Result};

/// Relative/absolute tolerances plus an iteration budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 1e-10, abs: 1e-12, max_steps: 1_000_000 }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64, max_steps: usize) -> Result<Self> {
        if !(rel > 0.0 && rel.is_finite() && abs > 0.0 && abs.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive and finite (rel = {rel}, abs = {abs})"
            )));
        }
        if max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be positive".into()));
        }
        Ok(Tolerances { rel, abs, max_steps })
    }

    /// Tolerances tight enough for finite differences of integrated profiles.
    pub fn tight() -> Self {
        Tolerances { rel: 1e-12, abs: 1e-14, max_steps: 2_000_000 }
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}
