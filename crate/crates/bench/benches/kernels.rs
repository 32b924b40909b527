use criterion::{black_box, criterion_group, criterion_main, Criterion};

use bubblelab_core::ansatz::{residual_norms, DiskGeometry};
use bubblelab_core::cluster::{solve_cluster_seeded, ClusterProblem};
use bubblelab_core::heights::{solve_heights, HeightProblem};
use bubblelab_core::inequalities::{bubble_weight, ps_ratio, trial_library};
use bubblelab_core::numerics::quad_radial;
use bubblelab_core::profiles::{compute_bubble, liouville_weight, ProfileRequest};
use bubblelab_core::schedule::build_schedule;
use bubblelab_core::Tolerances;

fn profiles(c: &mut Criterion) {
    let req = ProfileRequest::new(5.0, 0.5).unwrap();
    c.bench_function("bubble_profile_gamma5", |b| b.iter(|| compute_bubble(black_box(&req)).unwrap()));
}

fn quadrature(c: &mut Criterion) {
    let tol = Tolerances::default();
    c.bench_function("quad_radial_liouville_mass", |b| {
        b.iter(|| quad_radial(|s| liouville_weight(s), black_box(f64::INFINITY), &tol).unwrap())
    });
}

fn cluster(c: &mut Criterion) {
    let p = ClusterProblem::new(6, 2, 1.0).unwrap();
    let tol = Tolerances { rel: 1e-12, abs: 1e-13, max_steps: 200 };
    c.bench_function("cluster_k6_16_restarts", |b| b.iter(|| solve_cluster_seeded(&p, 16, &tol, 42).unwrap()));
}

fn heights_and_residual(c: &mut Criterion) {
    let sched = build_schedule(8.0, 2, 2, 0.4, 0.1).unwrap();
    let y = [-0.5f64.sqrt(), 0.5f64.sqrt()];
    let tau = sched.centers_from_cluster(&y);
    let hp = HeightProblem::new(sched.clone(), 1.0, tau.clone(), DiskGeometry::default()).unwrap();
    c.bench_function("heights_gamma_bar8", |b| b.iter(|| solve_heights(black_box(&hp)).unwrap()));

    let hs = solve_heights(&hp).unwrap();
    let field = bubblelab_core::ansatz::assemble_at(
        &sched,
        &tau,
        &hs.gammas,
        &[0.0, 0.0],
        bubblelab_core::ansatz::WeakLimitParams::new(1.0),
        DiskGeometry::default(),
        1.0,
    )
    .unwrap();
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("residual_norms_gamma_bar8", |b| b.iter(|| residual_norms(black_box(&field), 1.0).unwrap()));
    g.finish();
}

fn inequalities(c: &mut Criterion) {
    let lib = trial_library(42);
    c.bench_function("ps_ratio_random_trial", |b| b.iter(|| ps_ratio(black_box(&lib[8]), 2.0).unwrap()));
    let bw = bubble_weight(5.0, 0.4).unwrap();
    let t = bw.orthogonal_projection(&lib[1]).unwrap();
    c.bench_function("bubble_ratio_bump", |b| b.iter(|| bw.ratio(black_box(&t), 2.0).unwrap()));
}

criterion_group!(benches, profiles, quadrature, cluster, heights_and_residual, inequalities);
criterion_main!(benches);
