use icflow::verification::{run_identity_suite, run_inequality_suite, SuiteConfig, SuiteReport};
use icflow::{Faults, Shape};

fn config(faults: Faults) -> SuiteConfig {
    SuiteConfig {
        shapes: vec![
            Shape::Sphere { radius: 1.0 },
            Shape::AxisymEllipsoid { a: 1.0, b: 1.5 },
            Shape::PerturbedSphere { radius: 1.0, modes: vec![(2, 0.1)] },
        ],
        dims: vec![3, 4],
        faults,
        ..SuiteConfig::default()
    }
}

fn failing_checks(r: &SuiteReport) -> Vec<String> {
    let mut v: Vec<String> = r.failures().map(|v| v.check.clone()).collect();
    v.sort();
    v.dedup();
    v
}

fn run(faults: Faults) -> Vec<String> {
    let cfg = config(faults);
    let mut r = run_identity_suite(&cfg);
    r.extend(run_inequality_suite(&cfg));
    failing_checks(&r)
}

#[test]
fn clean_run_passes() {
    assert_eq!(run(Faults::default()), Vec::<String>::new());
}

#[test]
fn flipped_second_fundamental_form_is_caught() {
    let f = run(Faults { flip_second_fundamental_form: true, ..Faults::default() });
    for check in ["minkowski", "divergence"] {
        assert!(f.iter().any(|c| c == check), "{check} missing from {f:?}");
    }
}

#[test]
fn binomial_off_by_one_is_caught() {
    let f = run(Faults { binomial_off_by_one: true, ..Faults::default() });
    assert!(f.iter().any(|c| c == "minkowski"), "{f:?}");
}

#[test]
fn dropped_qk_correction_is_caught() {
    let f = run(Faults { drop_qk_correction: true, ..Faults::default() });
    assert!(f.iter().any(|c| c == "sphere_qk"), "{f:?}");
}
