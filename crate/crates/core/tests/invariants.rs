use icflow::geometry::{all_frames, newton_tensors, normalize, sigma_all};
use icflow::integrals::functionals;
use icflow::verification::fixtures::{parse_fixtures, write_fixtures, FixtureRecord};
use icflow::{sample_shape, Faults, GridSpec, Shape, ShapeSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn shape_strategy() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0.3..3.0f64).prop_map(|radius| Shape::Sphere { radius }),
        (0.5..2.0f64, 0.5..2.0f64).prop_map(|(a, b)| Shape::AxisymEllipsoid { a, b }),
        (0.5..2.0f64, 2u32..5, -0.05..0.05f64)
            .prop_map(|(radius, m, e)| Shape::PerturbedSphere { radius, modes: vec![(m, e * radius)] }),
    ]
}

fn scaled(shape: &Shape, s: f64) -> Shape {
    match shape {
        Shape::Sphere { radius } => Shape::Sphere { radius: radius * s },
        Shape::AxisymEllipsoid { a, b } => Shape::AxisymEllipsoid { a: a * s, b: b * s },
        Shape::PerturbedSphere { radius, modes } => Shape::PerturbedSphere {
            radius: radius * s,
            modes: modes.iter().map(|&(m, e)| (m, e * s)).collect(),
        },
        Shape::TabulatedProfile { points } => {
            Shape::TabulatedProfile { points: points.iter().map(|&(p, r)| (p, r * s)).collect() }
        }
    }
}

fn grid() -> GridSpec {
    GridSpec::axisym(64, 4).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curvature_integrals_scale_homogeneously(shape in shape_strategy(), n in 3usize..6, s in 0.5..3.0f64) {
        let a = functionals(&sample_shape(&ShapeSpec::new(n, shape.clone()).unwrap(), grid()).unwrap(), 1).unwrap();
        let b = functionals(&sample_shape(&ShapeSpec::new(n, scaled(&shape, s)).unwrap(), grid()).unwrap(), 1).unwrap();
        for j in 0..n {
            let expect = a.i_h[j] * s.powi((n - 1 - j) as i32);
            prop_assert!((b.i_h[j] - expect).abs() <= 1e-10 * expect.abs().max(1e-300));
            let expect = a.i_r2h[j] * s.powi((n + 1 - j) as i32);
            prop_assert!((b.i_r2h[j] - expect).abs() <= 1e-10 * expect.abs());
        }
        prop_assert!((b.vol - a.vol * s.powi(n as i32)).abs() <= 1e-10 * b.vol);
        for k in 1..n {
            if let (Some(qa), Some(qb)) = (a.qk_for(k), b.qk_for(k)) {
                prop_assert!((qa - qb).abs() <= 1e-10 * qa.abs());
            }
        }
    }

    #[test]
    fn support_times_v_is_r_squared(shape in shape_strategy(), n in 3usize..6) {
        let sample = sample_shape(&ShapeSpec::new(n, shape).unwrap(), grid()).unwrap();
        for (f, rho) in all_frames(&sample).unwrap().iter().zip(&sample.rho) {
            prop_assert!((f.u * f.v - rho * rho).abs() <= 1e-13 * rho * rho);
        }
    }

    #[test]
    fn newton_maclaurin_on_positive_cone(kappa in prop::collection::vec(0.01..5.0f64, 2..8)) {
        let h = normalize(&sigma_all(&kappa), &Faults::default());
        for k in 1..kappa.len() {
            prop_assert!(h[k - 1] * h[k + 1] <= h[k] * h[k] * (1.0 + 1e-12));
            // Maclaurin: H_k^{1/k} is non-increasing in k.
            prop_assert!(h[k + 1].powf(1.0 / (k + 1) as f64) <= h[k].powf(1.0 / k as f64) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn newton_tensor_traces(entries in prop::collection::vec(-2.0..2.0f64, 36)) {
        let d = 6;
        let mut s = DMatrix::from_fn(d, d, |i, j| entries[i * d + j]);
        s = (&s + s.transpose()) * 0.5;
        let eig = s.clone().symmetric_eigen().eigenvalues;
        let sigma = sigma_all(eig.as_slice());
        let scale = sigma.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for (k, t) in newton_tensors(&s, &sigma).iter().enumerate() {
            prop_assert!((t.trace() - (d - k) as f64 * sigma[k]).abs() <= 1e-11 * scale);
            prop_assert!(((t * &s).trace() - (k + 1) as f64 * sigma[k + 1]).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn fixture_values_round_trip(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..12)) {
        let rec = FixtureRecord {
            name: "p".into(),
            shape: Shape::Sphere { radius: 1.0 },
            n: 3,
            values: vals.iter().enumerate().map(|(i, v)| (format!("v{i}"), *v)).collect(),
        };
        let back = parse_fixtures(&write_fixtures("", std::slice::from_ref(&rec))).unwrap();
        prop_assert_eq!(&back[0], &rec);
    }
}
