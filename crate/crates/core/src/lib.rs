//! Numerical laboratory for sign-changing Moser-Trudinger bubble clusters on the unit disk.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: radial IVP integrator, improper radial quadrature, damped Newton,
//!   dense linear algebra helpers and log-log regression.
//! * [`profiles`]: the scaled bubble `w = γ(γ − B̄)`, its γ-derivative and the
//!   universal correction profiles.
//! * [`asymptotics`]: remainder orders, integral identities and truncation constants.
//! * [`cluster`], [`schedule`], [`heights`]: configuration system, parameter
//!   schedules and the height system.
//! * [`ansatz`]: Green function, truncated bubbles, assembled field, energy,
//!   residuals and pointwise expansions.
//! * [`inequalities`]: weighted Poincaré-Sobolev ratio checks.
//!
//! Radial equations are written as `u'' + u'/s = rhs(s, u, u')`, i.e. with the
//! analyst's positive Laplacian `Δ = −∂²` already moved to the right-hand side.

pub mod ansatz;
pub mod asymptotics;
pub mod cluster;
pub mod error;
pub mod heights;
pub mod inequalities;
pub mod numerics;
pub mod profiles;
pub mod schedule;

pub use error::{Error, Result};
pub use numerics::{LogGrid, SlopeReport, Tolerances};

/// The nonlinearity `f(u) = u·exp(u²)`.
#[inline]
pub fn nonlinearity(u: f64) -> f64 {
    u * (u * u).exp()
}

/// Derivative `f'(u) = (1 + 2u²)·exp(u²)`.
#[inline]
pub fn nonlinearity_prime(u: f64) -> f64 {
    (1.0 + 2.0 * u * u) * (u * u).exp()
}
