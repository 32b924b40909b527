use bubblelab_core::ansatz::green_disk;
use bubblelab_core::cluster::{eval_hessian, eval_j, eval_n, solve_cluster, ClusterProblem};
use bubblelab_core::inequalities::{ps_ratio, trial_library};
use bubblelab_core::numerics::linalg::Matrix;
use bubblelab_core::numerics::{loglog_slope, newton_solve, quad_radial};
use bubblelab_core::profiles::{compute_bubble, ProfileRequest};
use bubblelab_core::{LogGrid, Tolerances};
use proptest::prelude::*;

fn ordered_points(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, k).prop_filter_map("separated", |mut y| {
        y.sort_by(|a, b| a.partial_cmp(b).unwrap());
        y.windows(2).all(|w| w[1] - w[0] > 0.05).then_some(y)
    })
}

fn interior_point() -> impl Strategy<Value = [f64; 2]> {
    (0.0f64..0.95, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| [r * t.cos(), r * t.sin()])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn newton_ignores_row_scaling(d0 in 1e-3f64..1e3, d1 in 1e-3f64..1e3) {
        let tol = Tolerances { rel: 1e-12, abs: 1e-12, max_steps: 100 };
        let f = |x: &[f64]| vec![x[0] * x[0] + x[1] - 3.0, x[0] - x[1] * x[1] + 1.0];
        let j = |x: &[f64]| Matrix::from_row_slice(2, 2, &[2.0 * x[0], 1.0, 1.0, -2.0 * x[1]]);
        let plain = newton_solve(f, j, &[1.5, 1.5], &tol).unwrap();
        let scaled = newton_solve(
            |x| { let v = f(x); vec![d0 * v[0], d1 * v[1]] },
            |x| { let mut m = j(x); m.row_mut(0).scale_mut(d0); m.row_mut(1).scale_mut(d1); m },
            &[1.5, 1.5],
            &Tolerances { abs: tol.abs * d0.min(d1), ..tol },
        ).unwrap();
        for (a, b) in plain.root.iter().zip(&scaled.root) {
            prop_assert!((a - b).abs() <= tol.abs, "{a} vs {b}");
        }
    }

    #[test]
    fn quadrature_respects_domination(a in -3.0f64..3.0, b in 0.1f64..5.0, c in 0.0f64..2.0) {
        let tol = Tolerances::default();
        let small = quad_radial(|s| a * (b * s).sin() * (-s * s).exp(), f64::INFINITY, &tol).unwrap().value;
        let big = quad_radial(|s| (a.abs() + c) * (-s * s).exp(), f64::INFINITY, &tol).unwrap().value;
        prop_assert!(small.abs() <= big + tol.abs);
    }

    #[test]
    fn loglog_slope_is_exact(e in -6.0f64..6.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = [3.0f64, 4.0, 5.0, 6.0].iter().map(|&g| (g, c * g.powf(e))).collect();
        let r = loglog_slope(&pts).unwrap();
        prop_assert!((r.slope - e).abs() < 1e-10);
        prop_assert!(r.residual_rms < 1e-12);
    }

    #[test]
    fn n_is_the_gradient_of_j(y in ordered_points(4), l in prop::sample::select(vec![2usize, 4, 6])) {
        let p = ClusterProblem::new(4, l, 1.0).unwrap();
        let n = eval_n(&p, &y).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let (mut up, mut dn) = (y.clone(), y.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (eval_j(&p, &up).unwrap() - eval_j(&p, &dn).unwrap()) / (2.0 * h);
            prop_assert!((fd - n[i]).abs() <= 1e-6 * n[i].abs().max(1.0), "{fd} vs {}", n[i]);
        }
    }

    #[test]
    fn j_is_strictly_convex(y in ordered_points(3), xi in prop::collection::vec(-1.0f64..1.0, 3)) {
        prop_assume!(xi.iter().any(|v| v.abs() > 1e-3));
        let p = ClusterProblem::new(3, 2, 1.0).unwrap();
        let hm = eval_hessian(&p, &y).unwrap();
        let v = nalgebra::DVector::from_column_slice(&xi);
        prop_assert!((v.transpose() * &hm * &v)[(0, 0)] > 0.0);
    }

    #[test]
    fn green_is_symmetric(x in interior_point(), y in interior_point()) {
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        prop_assume!(d > 1e-6);
        let (a, _) = green_disk(x, y, 1.0).unwrap();
        let (b, _) = green_disk(y, x, 1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn ps_ratio_is_scale_invariant(c in prop::sample::select(vec![-7.5f64, -0.3, 0.02, 4.0, 1e3]), p in 1.0f64..4.0) {
        let t = &trial_library(42)[8];
        let a = ps_ratio(t, p).unwrap();
        let b = ps_ratio(&t.scaled(c), p).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
        if p == 2.0 {
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cluster_equivariance_and_scaling(k in 2usize..7, l in prop::sample::select(vec![2usize, 4]), c in 0.2f64..5.0) {
        let tol = Tolerances::tight();
        let y = solve_cluster(&ClusterProblem::new(k, l, 1.0).unwrap(), 4, &tol).unwrap().y;
        for i in 0..k {
            prop_assert!((y[i] + y[k - 1 - i]).abs() < 1e-8);
        }
        let yc = solve_cluster(&ClusterProblem::new(k, l, c).unwrap(), 4, &tol).unwrap().y;
        let f = c.powf(-1.0 / l as f64);
        for i in 0..k {
            prop_assert!((yc[i] - f * y[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn bubble_profiles_are_monotone_and_finite(gamma in 3.0f64..25.0, delta in 0.05f64..0.95) {
        // monotone on the natural range μ^{δ−1}; far beyond it B̄ oscillates about 0
        let p = compute_bubble(&ProfileRequest::new(gamma, delta).unwrap()).unwrap();
        prop_assert!(p.w.iter().chain(&p.w_prime).chain(&p.z).chain(&p.z_prime).all(|v| v.is_finite()));
        prop_assert!(p.w[0] == 0.0);
        prop_assert!(p.w.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn liouville_grid_independence() {
    use bubblelab_core::numerics::integrate_radial_ivp;
    use bubblelab_core::profiles::t_of;
    let tol = Tolerances::tight();
    for per_decade in [40usize, 80, 160] {
        let grid = LogGrid::with_density(1e3, 16, per_decade).unwrap();
        let (u, _) = integrate_radial_ivp(|_, u, _| 4.0 * (-2.0 * u).exp(), 0.0, &grid, &tol).unwrap();
        let err = grid.nodes().iter().zip(&u).map(|(s, v)| (v - t_of(*s)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "per decade {per_decade}: {err:e}");
    }
}

#[test]
fn ps_ratio_small_amplitude_high_power() {
    let t = &trial_library(42)[8];
    let a = ps_ratio(t, 3.931898895295669).unwrap();
    let b = ps_ratio(&t.scaled(0.02), 3.931898895295669).unwrap();
    assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
}
