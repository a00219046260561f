mod common;

use common::{fixture_path, fixture_shapes, oracle, OracleValues};
use icflow::integrals::functionals;
use icflow::verification::fixtures::{parse_fixtures, write_fixtures, FixtureRecord};
use icflow::{sample_shape, GridSpec, ShapeSpec};

fn record_values(n: usize, o: &OracleValues) -> Vec<(String, f64)> {
    let mut v = Vec::new();
    for j in 0..n {
        v.push((format!("i_h{j}"), o.i_h[j]));
    }
    for j in 0..n {
        v.push((format!("i_r2h{j}"), o.i_r2h[j]));
    }
    for j in 0..n {
        v.push((format!("i_uh{j}"), o.i_uh[j]));
    }
    v.push(("vol".into(), o.vol));
    for k in 1..n {
        v.push((format!("q{k}"), o.qk(n, k)));
    }
    v
}

fn records() -> Vec<FixtureRecord> {
    fixture_shapes()
        .into_iter()
        .map(|(name, shape, n)| {
            let o = oracle(&shape, n);
            FixtureRecord { name, values: record_values(n, &o), shape, n }
        })
        .collect()
}

/// Rewrites the frozen file. Run with `--ignored` only when fixtures are added.
#[test]
#[ignore]
fn regenerate_oracle_fixtures() {
    let header = "Reference integrals from the independent plane-curve quadrature in tests/common.\n\
                  Composite 8-point Gauss-Legendre, 2000 panels over the curve parameter.";
    std::fs::write(fixture_path(), write_fixtures(header, &records())).unwrap();
}

fn frozen() -> Vec<FixtureRecord> {
    let text = std::fs::read_to_string(fixture_path()).expect("fixture file present");
    parse_fixtures(&text).expect("fixture checksum verifies")
}

#[test]
fn frozen_file_matches_oracle() {
    let fresh = records();
    let file = frozen();
    assert_eq!(file.len(), fresh.len());
    for (a, b) in file.iter().zip(&fresh) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.shape, b.shape);
        for ((ka, va), (kb, vb)) in a.values.iter().zip(&b.values) {
            assert_eq!(ka, kb);
            assert!((va - vb).abs() <= 1e-13 * vb.abs().max(1.0), "{} {ka}: {va} vs {vb}", a.name);
        }
    }
}

#[test]
fn sphere_oracle_is_closed_form() {
    for rec in frozen().iter().filter(|r| r.name.starts_with("sphere")) {
        let icflow::Shape::Sphere { radius } = rec.shape else { unreachable!() };
        let n = rec.n;
        let w = common::omega(n - 1);
        for j in 0..n {
            let expect = w * radius.powi((n - 1 - j) as i32);
            let got = rec.get(&format!("i_h{j}")).unwrap();
            assert!((got / expect - 1.0).abs() < 1e-13, "{}: {got} vs {expect}", rec.name);
        }
        let vol = w / n as f64 * radius.powi(n as i32);
        assert!((rec.get("vol").unwrap() / vol - 1.0).abs() < 1e-13);
    }
}

#[test]
fn library_matches_oracle_at_256() {
    let grid = GridSpec::axisym(256, 4).unwrap();
    let mut worst = 0.0_f64;
    for rec in frozen() {
        let n = rec.n;
        let spec = ShapeSpec::new(n, rec.shape.clone()).unwrap();
        let s = sample_shape(&spec, grid).unwrap();
        for k in 1..n {
            let fs = functionals(&s, k).unwrap();
            let mut pairs: Vec<(String, f64)> = vec![(format!("q{k}"), fs.qk.unwrap_or(f64::NAN))];
            if k == 1 {
                for j in 0..n {
                    pairs.push((format!("i_h{j}"), fs.i_h[j]));
                    pairs.push((format!("i_r2h{j}"), fs.i_r2h[j]));
                    pairs.push((format!("i_uh{j}"), fs.i_uh[j]));
                }
                pairs.push(("vol".into(), fs.vol));
            }
            for (key, got) in pairs {
                let want = rec.get(&key).unwrap();
                let rel = (got - want).abs() / want.abs();
                worst = worst.max(rel);
                assert!(rel <= 1e-8, "{} {key}: library {got}, oracle {want}, relative {rel:e}", rec.name);
            }
        }
    }
    eprintln!("worst relative deviation from the oracle: {worst:e}");
}
