//! Dirichlet energy of the assembled field, split into per-bubble and cross pieces.
//!
//! Bubble tails use circle integrals: `∫_{Ω∖B}|∇G|² = −∮_{∂B} G ∂_ρG` and
//! `∫_B |∇H|² = ∮_{∂B} H ∂_ρH`. Terms paired with `ΔBᵢ = λh f(B̄ᵢ)` are moved onto
//! the ball by parts and integrated in scaled coordinates.

use std::f64::consts::PI;

use serde::Serialize;

use super::field::AnsatzField;
use super::green::{green_gradient, green_unchecked, regular_part, regular_part_gradient, Point};
use crate::numerics::{gauss_legendre, quad_radial, Tolerances};
use crate::Result;

/// Points on circles for trapezoid rules.
const CIRCLE_POINTS: usize = 256;
/// Angular samples when averaging over circles inside a ball.
const BALL_ANGLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossBubble {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    /// `|∫_{Bᵢ}Bⱼ f(B̄ᵢ) − ∫_{Bⱼ}Bᵢ f(B̄ⱼ)|`; both equal `⟨∇Bᵢ, ∇Bⱼ⟩`.
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `2π∫₀^{√(λh)r}(B̄')²ρ dρ`
    pub inner: Vec<f64>,
    /// `Aᵢ²‖∇G(·,τ̄ᵢ)‖²` over `Ω∖B(τ̄ᵢ, r)`
    pub tail: Vec<f64>,
    /// `Aᵢ²∫_B|∇H|²`; the cross term `∫_B ∇B̄·∇H` vanishes since `H` is harmonic.
    pub regular: Vec<f64>,
    /// `‖∇Bᵢ‖²`
    pub bubble: Vec<f64>,
    /// `⟨∇w, ∇Bᵢ⟩`
    pub cross_weak: Vec<f64>,
    pub cross_bubbles: Vec<CrossBubble>,
    pub weak_limit_energy: f64,
    pub total: f64,
}

fn circle(center: Point, rho: f64, n: usize) -> impl Iterator<Item = (Point, Point)> {
    (0..n).map(move |m| {
        let th = 2.0 * PI * m as f64 / n as f64;
        let e = [th.cos(), th.sin()];
        ([center[0] + rho * e[0], center[1] + rho * e[1]], e)
    })
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `∮_{|x−c|=ρ} f dσ` by the trapezoid rule.
fn circle_integral(center: Point, rho: f64, f: impl Fn(Point, Point) -> f64) -> f64 {
    let n = CIRCLE_POINTS;
    let sum: f64 = circle(center, rho, n).map(|(x, e)| f(x, e)).sum();
    sum * 2.0 * PI * rho / n as f64
}

/// Angular mean over a circle.
fn circle_mean(center: Point, rho: f64, n: usize, f: impl Fn(Point) -> f64) -> f64 {
    let sum: f64 = circle(center, rho, n).map(|(x, _)| f(x)).sum();
    sum / n as f64
}

/// `∫_{B(τ̄ᵢ, r)} g(x)·λh f(B̄ᵢ) dx`, with `g` averaged over circles.
pub(crate) fn against_bubble_source(
    field: &AnsatzField,
    i: usize,
    g: impl Fn(Point) -> f64,
    tol: &Tolerances,
) -> Result<f64> {
    let p = field.profile(i);
    let c = field.center(i);
    let scale = p.mu / field.lambda_h.sqrt();
    let s_max = field.constants[i].s_trunc;
    Ok(quad_radial(|s| p.density_f(s) * circle_mean(c, s * scale, BALL_ANGLES, &g), s_max, tol)?.value)
}

/// `∫_{B(0,R)} |∇w|²` by polar Gauss-Legendre, exact for the polynomial pieces.
pub fn weak_limit_energy(field: &AnsatzField) -> f64 {
    let w = &field.weak_limit;
    let (nodes, weights) = gauss_legendre(32);
    let n_ang = 4 * w.l + 64;
    let mut total = 0.0;
    for (a, b) in [(0.0, w.cutoff_radius), (w.cutoff_radius, w.radius)] {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in nodes.iter().zip(&weights) {
            let rho = mid + half * x;
            let ring = circle_mean([0.0, 0.0], rho, n_ang, |p| {
                let g = w.sample(p).gradient;
                dot(g, g)
            });
            total += wt * half * 2.0 * PI * rho * ring;
        }
    }
    total
}

pub fn energy(field: &AnsatzField) -> Result<EnergyReport> {
    let tol = Tolerances::default().with_rel(1e-11);
    let k = field.k();
    let rr = field.geometry.radius;
    let r = field.truncation_radius();
    let mut inner = Vec::with_capacity(k);
    let mut tail = Vec::with_capacity(k);
    let mut regular = Vec::with_capacity(k);
    let mut bubble = Vec::with_capacity(k);
    let mut cross_weak = Vec::with_capacity(k);
    for i in 0..k {
        let p = field.profile(i);
        let g = p.gamma;
        let s_max = field.constants[i].s_trunc;
        let e_in = quad_radial(|s| (p.w_at(s).1 / g).powi(2), s_max, &tol)?.value;
        let a = field.constants[i].a;
        let c = field.center(i);
        let e_tail = -a * a
            * circle_integral(c, r, |x, e| green_unchecked(x, c, rr) * dot(green_gradient(x, c, rr), e));
        let e_reg = a * a
            * circle_integral(c, r, |x, e| regular_part(x, c, rr) * dot(regular_part_gradient(x, c, rr), e));
        inner.push(e_in);
        tail.push(e_tail);
        regular.push(e_reg);
        bubble.push(e_in + e_tail + e_reg);
        cross_weak.push(against_bubble_source(field, i, |x| field.weak_limit.value(x), &tol)?);
    }
    let mut cross_bubbles = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let ij = against_bubble_source(field, i, |x| field.truncated_bubble(j, x), &tol)?;
            let ji = against_bubble_source(field, j, |x| field.truncated_bubble(i, x), &tol)?;
            cross_bubbles.push(CrossBubble { i, j, value: ij, asymmetry: (ij - ji).abs() });
        }
    }
    let weak = weak_limit_energy(field);
    let wt: Vec<f64> = field.thetas.iter().map(|t| 1.0 + t).collect();
    let mut total = weak;
    for i in 0..k {
        total += wt[i] * wt[i] * bubble[i] + 2.0 * wt[i] * cross_weak[i];
    }
    for cb in &cross_bubbles {
        total += 2.0 * wt[cb.i] * wt[cb.j] * cb.value;
    }
    Ok(EnergyReport {
        inner,
        tail,
        regular,
        bubble,
        cross_weak,
        cross_bubbles,
        weak_limit_energy: weak,
        total,
    })
}
