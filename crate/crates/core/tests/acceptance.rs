//! Acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line. Run with
//!
//! ```text
//! cargo test -p tfcd-core --test acceptance -- --nocapture --test-threads=1
//! ```

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tfcd_core::properties::{
    random_admissible_mesh, rho_sweep, stability_sweep, telescoping_sweep,
    weight_inequality_sweep, RHO_CLAIMED_BOUNDS,
};
use tfcd_core::quadrature::{r_coeff_quadrature, s_coeff_quadrature};
use tfcd_core::verification::Coefficients;
use tfcd_core::*;

fn verdict(id: &str, passed: bool, summary: String) {
    println!("[{}] criterion {id}: {summary}", if passed { "PASS" } else { "FAIL" });
}

fn coefficients() -> Coefficients {
    Coefficients {
        lambda1: 1.0,
        lambda2: 0.5,
        mu1: 0.4,
        mu2: -0.3,
        gamma: -0.2,
    }
}

#[test]
fn criterion_1_spatial_order() {
    let start = Instant::now();
    let problem = ManufacturedProblem::smooth(0.5, 1.0, 1.0, coefficients()).unwrap();
    let mut params = StudyParams::spatial(vec![4, 8, 16, 32], 4.0, 512);
    params.check_subdominance = false;
    let report = convergence_study(&problem, &params).unwrap();
    let order = report.finest_order().unwrap();
    let passed = (3.7..=4.3).contains(&order);
    let errors: Vec<String> = report.rows.iter().map(|r| format!("{:.3e}", r.errors.l2)).collect();
    verdict(
        "1",
        passed,
        format!(
            "spatial order {order:.4} at M 16->32, required [3.7, 4.3]; L2 errors {errors:?}; {:.1?}",
            start.elapsed()
        ),
    );
    assert!(passed);
}

fn temporal_case(label: &str, alpha: f64, theta: f64, accept: impl Fn(f64) -> bool, range: &str) {
    let start = Instant::now();
    let problem = ManufacturedProblem::singular(alpha, 1.0, 1.0, coefficients()).unwrap();
    let mut params = StudyParams::temporal(vec![16, 32, 64, 128, 256], theta, 64);
    params.check_subdominance = false;
    let report = convergence_study(&problem, &params).unwrap();
    let order = report.finest_order().unwrap();
    let passed = accept(order);
    let orders: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| r.observed_order)
        .map(|o| format!("{o:.3}"))
        .collect();
    verdict(
        label,
        passed,
        format!(
            "alpha={alpha} theta={theta}: temporal order {order:.4} at N_t 128->256, required {range}, \
             predicted {:.2}; orders {orders:?}; {:.1?}",
            report.predicted,
            start.elapsed()
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_2a_temporal_order_graded() {
    temporal_case("2a", 0.5, 4.0, |o| (1.75..=2.25).contains(&o), "[1.75, 2.25]");
}

#[test]
fn criterion_2b_temporal_order_large_alpha() {
    temporal_case("2b", 0.8, 2.75, |o| (1.9..=2.5).contains(&o), "[1.9, 2.5]");
}

#[test]
fn criterion_2c_temporal_order_uniform_mesh() {
    temporal_case("2c", 0.5, 1.0, |o| o <= 0.8, "<= 0.8");
}

fn random_spec(rng: &mut ChaCha8Rng, alpha: f64) -> ProblemSpec {
    let l1 = rng.random_range(0.1..3.0);
    let l2 = rng.random_range(0.1..3.0);
    let mu1 = rng.random_range(-2.0..2.0);
    let mu2 = rng.random_range(-2.0..2.0);
    let beta = rng.random_range(0.0..3.0);
    let gamma = mu1 * mu1 / (4.0 * l1) + mu2 * mu2 / (4.0 * l2) - beta;
    let (a, b, c) = (
        rng.random_range(-1.0..1.0),
        rng.random_range(0.5..3.0),
        rng.random_range(0.5..3.0),
    );
    ProblemSpec::homogeneous(l1, l2, mu1, mu2, gamma, alpha, 1.0, 1.0)
        .with_source(move |x, y, t| a * (b * x).sin() * (c * y).cos() + t)
        .with_initial(move |x, y| (b * x + y).cos() + a * x * y)
        .with_boundary(move |x, y, t| (b * x + y).cos() + a * x * y + t * (x - c * y))
}

#[test]
fn criterion_3_adi_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..20 {
        let alpha = rng.random_range(0.05..0.95);
        let spec = random_spec(&mut rng, alpha);
        let problem = spec.transform().unwrap();
        let mx = rng.random_range(2..=21);
        let my = rng.random_range(2..=(400 / (mx - 1) + 1).min(40));
        let smesh = SpatialMesh::new(mx, my, 1.0).unwrap();
        assert!(smesh.interior_count() <= 400);
        let theta = rng.random_range(1.0..4.0);
        let tmesh = TemporalMesh::fitted(&FittedMeshParams::graded(3, theta, 1.0, alpha)).unwrap();
        let mut state = SolverState::initialize(&problem, &tmesh, &smesh).unwrap();
        for _ in 0..3 {
            let dense = state.direct_solve_oracle().unwrap();
            state.advance().unwrap();
            for (a, b) in state.current().values().iter().zip(dense.values()) {
                worst = worst.max((a - b).abs());
            }
            checked += 1;
        }
    }
    let passed = worst <= 1e-12;
    verdict(
        "3",
        passed,
        format!("{checked} ADI steps vs dense factored solve, max difference {worst:.3e} (<= 1e-12)"),
    );
    assert!(passed);
}

#[test]
fn criterion_4_coefficients_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut triples = 0;
    while triples < 500 {
        let alpha = rng.random_range(0.05..0.95);
        let mesh = random_admissible_mesh(&mut rng, alpha);
        let i = rng.random_range(0..mesh.nt());
        let k = rng.random_range(0..=i);
        let r = r_coeff(&mesh, i, k).unwrap();
        worst = worst.max((r - r_coeff_quadrature(&mesh, i, k)).abs() / r.abs());
        if k < i {
            let s = s_coeff(&mesh, i, k).unwrap();
            let q = s_coeff_quadrature(&mesh, i, k);
            worst = worst.max((s - q).abs() / q.abs());
        }
        triples += 1;
    }
    let passed = worst <= 1e-10;
    verdict(
        "4",
        passed,
        format!("{triples} (mesh, i, k) triples, worst relative error of r and s {worst:.3e} (<= 1e-10)"),
    );
    assert!(passed);
}

#[test]
fn criterion_5_weight_inequalities() {
    let reports = weight_inequality_sweep(1000, 5).unwrap();
    let passed = reports.iter().all(|r| r.passed() && r.worst_margin > 0.0);
    for r in &reports {
        println!("    {r}");
    }
    verdict(
        "5",
        passed,
        "items (i)-(v) on 1000 random admissible meshes, alpha in {0.1,...,0.9}".into(),
    );
    assert!(passed);
}

#[test]
fn criterion_6_rho_bounds() {
    let (lower, upper) = RHO_CLAIMED_BOUNDS;
    let report = rho_sweep(10_000, 6, lower, upper).unwrap();
    println!("    {report}");
    verdict(
        "6",
        report.passed(),
        format!("10000 (alpha, eta) samples against [{lower}, {upper}]: {}", report.detail),
    );
    assert!(report.passed());
}

#[test]
fn criterion_7_telescoping() {
    let reports = telescoping_sweep(300, 7).unwrap();
    for r in &reports {
        println!("    {r}");
    }
    let passed = reports.iter().all(|r| r.passed());
    verdict("7", passed, "constants and g(t) = t on 300 random admissible meshes".into());
    assert!(passed);
}

#[test]
fn criterion_8_stability() {
    let report = stability_sweep(50, 8).unwrap();
    println!("    {report}");
    verdict(
        "8",
        report.passed(),
        format!("50 boundary-zero perturbations, every level: {}", report.detail),
    );
    assert!(report.passed());
}

#[test]
fn criterion_9_transform_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let l1 = rng.random_range(0.05..5.0);
        let l2 = rng.random_range(0.05..5.0);
        let mu1 = rng.random_range(-5.0..5.0);
        let mu2 = rng.random_range(-5.0..5.0);
        let gamma = mu1 * mu1 / (4.0 * l1) + mu2 * mu2 / (4.0 * l2) - rng.random_range(0.0..2.0);
        let length = rng.random_range(0.5..3.0);
        let spec = ProblemSpec::homogeneous(l1, l2, mu1, mu2, gamma, 0.5, length, 1.0);
        let problem = spec.transform().unwrap();
        let mesh = SpatialMesh::new(rng.random_range(2..20), rng.random_range(2..20), length).unwrap();
        let u = Field2D::from_fn(&mesh, |_, _| rng.random_range(-10.0..10.0));
        let back = problem.inverse_transform(&problem.forward_multiply(&u));
        for (a, b) in back.values().iter().zip(u.values()) {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    let passed = worst <= 1e-14;
    verdict(
        "9",
        passed,
        format!("200 random fields and coefficient sets, worst relative error {worst:.3e} (<= 1e-14)"),
    );
    assert!(passed);
}
