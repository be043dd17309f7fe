use proptest::prelude::*;

use tfcd_core::mesh::{MAX_RATIO, MIN_RATIO};
use tfcd_core::*;

fn graded(nt: usize, theta: f64, tf: f64, alpha: f64) -> Result<TemporalMesh> {
    TemporalMesh::fitted(&FittedMeshParams::graded(nt, theta, tf, alpha))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitted_mesh_is_admissible_or_rejected(
        nt in 1usize..80,
        theta in 1.0f64..7.0,
        tf in 0.1f64..10.0,
        alpha in 0.05f64..0.95,
    ) {
        match graded(nt, theta, tf, alpha) {
            Ok(mesh) => {
                prop_assert_eq!(mesh.t(0), 0.0);
                prop_assert!((mesh.t(nt) - tf).abs() <= 1e-12 * tf);
                for i in 1..=nt {
                    prop_assert!(mesh.tau(i) > 0.0);
                }
                for r in mesh.local_ratios() {
                    prop_assert!((MIN_RATIO..=MAX_RATIO).contains(&r));
                }
                for i in 0..nt {
                    let ts = mesh.t_sigma(i).unwrap();
                    prop_assert!(ts > mesh.t(i) && ts < mesh.t(i + 1));
                }
            }
            Err(Error::MeshRatio { ratio, .. }) => {
                prop_assert!(!(MIN_RATIO..=MAX_RATIO).contains(&ratio));
            }
            Err(other) => prop_assert!(false, "unexpected error {other:?}"),
        }
    }

    #[test]
    fn weight_rows_are_positive_and_telescope(
        nt in 2usize..40,
        theta in 1.0f64..5.0,
        alpha in 0.05f64..0.95,
        c in -100.0f64..100.0,
    ) {
        let mesh = graded(nt, theta, 1.0, alpha).unwrap();
        for i in 0..nt {
            let row = weight_row(&mesh, i).unwrap();
            prop_assert!(row.weights().iter().all(|w| w.is_finite() && *w > 0.0));
            let value = discrete_caputo(&vec![c; i + 2], &row).unwrap();
            prop_assert!(value.abs() <= 1e-13 * row.last() * c.abs());
        }
    }

    #[test]
    fn thomas_solution_has_small_residual(
        n in 1usize..60,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sub: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sup: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n).map(|j| sub[j].abs() + sup[j].abs() + rng.random_range(0.1..2.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let system = TridiagonalSystem { sub, diag, sup, rhs: rhs.clone() };
        let x = system.solve().unwrap();
        for (a, b) in system.apply(&x).iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn solver_is_linear_in_the_data(
        a in -3.0f64..3.0,
        alpha in 0.1f64..0.9,
        mu1 in -1.0f64..1.0,
        k in 1.0f64..4.0,
    ) {
        let base = |scale: f64, shift: f64| {
            ProblemSpec::homogeneous(0.7, 1.3, mu1, 0.2, -0.1, alpha, 1.0, 1.0)
                .with_source(move |x, y, t| scale * (k * x).sin() * y + shift * t)
                .with_initial(move |x, y| scale * x * (1.0 - y) + shift * (k * y).cos())
                .with_boundary(move |x, y, t| scale * x * (1.0 - y) * (1.0 + t) + shift * (k * y).cos())
        };
        let tm = graded(6, 2.0, 1.0, alpha).unwrap();
        let sm = SpatialMesh::new(6, 5, 1.0).unwrap();
        let run = |spec: ProblemSpec| solve(&spec, &tm, &sm, &LevelSelection::Final).unwrap().remove(0).u;
        let first = run(base(1.0, 0.0));
        let second = run(base(0.0, 1.0));
        let combined = run(base(a, 1.0));
        for ((f, s), c) in first.values().iter().zip(second.values()).zip(combined.values()) {
            let expected = a * f + s;
            prop_assert!((c - expected).abs() <= 1e-11 * (1.0 + expected.abs()));
        }
    }
}
