//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N [...]: PASS|FAIL` line straight to stderr so it shows up in
//! captured runs too.

mod common;

use std::io::Write;
use std::time::Instant;

use icflow::flow::{self, FlowConfig, Speed};
use icflow::geometry::{newton_tensors, sigma_all};
use icflow::integrals::{functionals, inequality_report, sphere_qk};
use icflow::verification::{
    fixtures::parse_fixtures, run_flow_suite, run_identity_suite, run_inequality_suite, OrderFit, Status,
    SuiteConfig, SuiteReport,
};
use icflow::{sample_shape, GridSpec, Inequality, Shape, ShapeSpec};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let line = format!("criterion {id} [{name}]: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn failures(r: &SuiteReport) -> String {
    r.failures().take(5).map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[test]
fn criterion_1_sphere_equality() {
    let start = Instant::now();
    let grid = GridSpec::axisym(256, 4).unwrap();
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for n in [3, 4, 5, 7] {
        for r in [0.5, 1.0, 2.0] {
            let s = sample_shape(&ShapeSpec::sphere(n, r).unwrap(), grid).unwrap();
            for k in 1..n {
                let q = functionals(&s, k).unwrap().qk.unwrap();
                worst = worst.max((q / sphere_qk(n, k) - 1.0).abs());
                cases += 1;
            }
        }
    }
    report(
        1,
        "sphere equality",
        worst <= 1e-8,
        format!("{cases} cases, worst relative error {worst:.2e} <= 1e-8, {:.2?}", start.elapsed()),
    );
}

fn criterion_2_fixtures() -> Vec<Shape> {
    let mut v = Vec::new();
    for aspect in [1.2, 1.5, 2.0, 3.0] {
        v.push(Shape::AxisymEllipsoid { a: 1.0, b: aspect });
        v.push(Shape::AxisymEllipsoid { a: aspect, b: 1.0 });
    }
    for (m, e) in [(2, 0.05), (2, 0.1), (2, 0.15), (3, 0.03), (3, 0.05), (3, 0.09), (4, 0.03), (4, 0.05)] {
        v.push(Shape::PerturbedSphere { radius: 1.0, modes: vec![(m, e)] });
    }
    v.push(Shape::Sphere { radius: 1.5 });
    v
}

#[test]
fn criterion_2_main_inequality() {
    let grid = GridSpec::axisym(256, 4).unwrap();
    let (mut checked, mut skipped, mut bad) = (0, 0, Vec::new());
    let mut min_ratio = f64::INFINITY;
    for shape in criterion_2_fixtures() {
        for n in [3, 4, 5] {
            let spec = ShapeSpec::new(n, shape.clone()).unwrap();
            let s = sample_shape(&spec, grid).unwrap();
            for k in 1..n {
                let r = inequality_report(&s, Inequality::WeightedTwoQuermass { k }).unwrap();
                if !r.hypotheses_ok {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                let ok = if spec.is_sphere() {
                    r.residual >= -r.tau_quad
                } else {
                    min_ratio = min_ratio.min(r.residual / r.tau_quad);
                    r.residual > 10.0 * r.tau_quad
                };
                if !ok {
                    bad.push(format!("{shape:?} n={n} k={k} residual={:e} tau={:e}", r.residual, r.tau_quad));
                }
            }
        }
    }
    report(
        2,
        "main inequality",
        bad.is_empty() && checked > 0,
        format!(
            "{checked} hypothesis-satisfying cases, {skipped} skipped, min residual/tau on non-spheres {min_ratio:.2e}, failures {bad:?}"
        ),
    );
}

fn identity_config(order: usize) -> SuiteConfig {
    // Second-order stencils are still pre-asymptotic at N = 32 on the prolate ellipsoid.
    let ladder = if order == 2 { vec![64, 128, 256] } else { vec![32, 64, 128] };
    SuiteConfig {
        ladder,
        shapes: vec![
            Shape::Sphere { radius: 0.5 },
            Shape::Sphere { radius: 2.0 },
            Shape::AxisymEllipsoid { a: 1.0, b: 1.5 },
            Shape::AxisymEllipsoid { a: 2.0, b: 1.0 },
            Shape::PerturbedSphere { radius: 1.0, modes: vec![(2, 0.1)] },
            Shape::PerturbedSphere { radius: 1.0, modes: vec![(3, 0.03)] },
            Shape::PerturbedSphere { radius: 1.0, modes: vec![(2, 0.05), (4, 0.02)] },
        ],
        order,
        ..SuiteConfig::default()
    }
}

#[test]
fn criterion_3_identity_suite() {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in [2, 4] {
        let r = run_identity_suite(&identity_config(p));
        let grid_checks: Vec<_> = r
            .verdicts
            .iter()
            .filter(|v| ["divergence", "minkowski", "newton_form_weighted", "newton_form_support"].contains(&v.check.as_str()))
            .collect();
        let pass = grid_checks.iter().filter(|v| v.passed()).count();
        let min_order = grid_checks
            .iter()
            .filter_map(|v| match v.order {
                Some(OrderFit::Measured(o)) => Some(o),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min);
        ok &= pass == grid_checks.len() && r.all_ok();
        detail.push(format!(
            "p={p}: {pass}/{} grid verdicts pass, min measured order {min_order:.2}{}",
            grid_checks.len(),
            if r.all_ok() { String::new() } else { format!(", failures: {}", failures(&r)) }
        ));
    }
    report(3, "identity suite", ok, detail.join("; "));
}

#[test]
fn criterion_4_variation_formulas() {
    let cfg = SuiteConfig {
        shapes: vec![
            Shape::PerturbedSphere { radius: 1.0, modes: vec![(3, 0.03)] },
            Shape::PerturbedSphere { radius: 1.0, modes: vec![(2, 0.1)] },
            Shape::AxisymEllipsoid { a: 1.0, b: 1.5 },
        ],
        ..SuiteConfig::default()
    };
    let r = run_identity_suite(&cfg);
    let mut confirmed = std::collections::BTreeSet::new();
    let mut all = std::collections::BTreeSet::new();
    let names = ["variation_quermass", "variation_weighted", "variation_r2"];
    for v in r.verdicts.iter().filter(|v| names.contains(&v.check.as_str())) {
        all.insert((v.fixture.clone(), v.n, v.k));
    }
    for key in &all {
        let vs: Vec<_> = r
            .verdicts
            .iter()
            .filter(|v| names.contains(&v.check.as_str()) && (v.fixture.clone(), v.n, v.k) == *key)
            .collect();
        let measured = vs.iter().all(|v| v.passed() && matches!(v.order, Some(OrderFit::Measured(_))));
        if vs.len() == 3 && measured {
            confirmed.insert(key.clone());
        }
    }
    let failed = r.verdicts.iter().filter(|v| names.contains(&v.check.as_str()) && v.status == Status::Fail).count();
    report(
        4,
        "variation formulas",
        confirmed.len() >= 4 && failed == 0,
        format!("{} of {} fixtures Richardson-confirmed at order 2, {failed} failed verdicts", confirmed.len(), all.len()),
    );
}

#[test]
fn criterion_5_flow_behaviour() {
    let start = Instant::now();
    let cfg = SuiteConfig {
        shapes: vec![Shape::PerturbedSphere { radius: 1.0, modes: vec![(2, 0.1)] }],
        dims: vec![3],
        ks: Some(vec![1, 2]),
        ..SuiteConfig::flow_default()
    };
    let r = run_flow_suite(&cfg);
    let get = |check: &str, k: usize, key: &str| {
        r.verdicts.iter().find(|v| v.check == check && v.k == Some(k)).and_then(|v| v.get(key)).unwrap_or(f64::NAN)
    };
    let detail: Vec<String> = [1, 2]
        .iter()
        .map(|&k| {
            format!(
                "k={k}: drift {:.1e}, final Q_k rel {:.1e}, max dissipation term {:.1e}",
                get("flow_conservation", k, "max_drift"),
                get("flow_limit", k, "relative"),
                get("flow_dissipation", k, "max_term"),
            )
        })
        .collect();
    report(
        5,
        "flow behaviour",
        r.all_ok() && r.verdicts.len() == 16,
        format!("{} verdicts, {}; {:.1?}{}", r.verdicts.len(), detail.join("; "), start.elapsed(), failures(&r)),
    );
}

#[test]
fn criterion_6_unnormalized_sphere_rk4() {
    let spec = ShapeSpec::sphere(3, 1.0).unwrap();
    let grid = GridSpec::axisym(16, 4).unwrap();
    let mut errors = Vec::new();
    let mut steps = Vec::new();
    for dt in [1e-2, 5e-3, 2.5e-3] {
        // The default safety factor caps dt near 6e-3 on the coarsest grid;
        // 0.6 keeps every dt fixed and lambda*dt inside the RK4 stability interval.
        let cfg = FlowConfig {
            dt_initial: dt,
            t_end: 1.0,
            cfl_safety: 0.6,
            ..FlowConfig::new(3, 1, Speed::Unnormalized)
        };
        let out = flow::run(&spec, grid, &cfg, 1000).unwrap();
        assert!(out.completed());
        steps.push(out.final_state.step_count);
        let e = out.final_state.sample.rho.iter().map(|r| (r - 1f64.exp()).abs()).fold(0.0, f64::max);
        errors.push(e);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = steps == [100, 200, 400] && orders.iter().all(|o| (o - 4.0).abs() <= 0.3);
    report(6, "un-normalized sphere RK4", ok, format!(
            "steps {steps:?}, errors {}, orders {orders:.3?}",
            errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
        ));
}

fn subset_sigma(x: &[f64], k: usize) -> (f64, f64) {
    let d = x.len();
    let (mut s, mut a) = (0.0, 0.0);
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize == k {
            let p: f64 = (0..d).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).product();
            s += p;
            a += p.abs();
        }
    }
    (s, a)
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    let mut a = m.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for cc in c..n {
                a[r][cc] -= f * a[c][cc];
            }
        }
    }
    d
}

/// `sigma_q` of a matrix as the sum of its principal `q x q` minors.
fn minor_sigma(m: &[Vec<f64>], q: usize) -> f64 {
    let d = m.len();
    let mut s = 0.0;
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize == q {
            let idx: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
            let sub: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect();
            s += det(&sub);
        }
    }
    s
}

#[test]
fn criterion_7_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst_sigma = 0.0_f64;
    for _ in 0..1000 {
        let len = rng.gen_range(1..=6);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let sig = sigma_all(&x);
        for k in 0..=len {
            let (s, a) = subset_sigma(&x, k);
            worst_sigma = worst_sigma.max((sig[k] - s).abs() / a.max(f64::MIN_POSITIVE));
        }
    }

    let mut worst_t = 0.0_f64;
    for _ in 0..50 {
        let mut m = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let v = rng.gen_range(-2.0..2.0);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        let s = DMatrix::from_fn(4, 4, |i, j| m[i][j]);
        let eig = s.clone().symmetric_eigen().eigenvalues;
        let sigma = sigma_all(eig.as_slice());
        let t = newton_tensors(&s, &sigma);
        for (k, tk) in t.iter().enumerate() {
            let scale = tk.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
            for i in 0..4 {
                for j in 0..4 {
                    let h = 1e-5;
                    let mut p = m.clone();
                    p[j][i] += h;
                    let mut q = m.clone();
                    q[j][i] -= h;
                    let fd = (minor_sigma(&p, k + 1) - minor_sigma(&q, k + 1)) / (2.0 * h);
                    worst_t = worst_t.max((tk[(i, j)] - fd).abs() / scale);
                }
            }
        }
    }

    let text = std::fs::read_to_string(common::fixture_path()).unwrap();
    let records = parse_fixtures(&text).unwrap();
    let grid = GridSpec::axisym(256, 4).unwrap();
    let mut worst_int = 0.0_f64;
    for rec in &records {
        let n = rec.n;
        let s = sample_shape(&ShapeSpec::new(n, rec.shape.clone()).unwrap(), grid).unwrap();
        let fs = functionals(&s, 1).unwrap();
        let mut pairs: Vec<(String, f64)> = Vec::new();
        for j in 0..n {
            pairs.push((format!("i_h{j}"), fs.i_h[j]));
            pairs.push((format!("i_r2h{j}"), fs.i_r2h[j]));
            pairs.push((format!("i_uh{j}"), fs.i_uh[j]));
        }
        pairs.push(("vol".into(), fs.vol));
        for k in 1..n {
            pairs.push((format!("q{k}"), fs.qk_for(k).unwrap_or(f64::NAN)));
        }
        for (key, got) in pairs {
            let want = rec.get(&key).unwrap();
            worst_int = worst_int.max((got - want).abs() / want.abs());
        }
    }
    report(
        7,
        "oracle equivalence",
        worst_sigma <= 1e-12 && worst_t <= 1e-6 && worst_int <= 1e-8,
        format!(
            "sigma vs subsets {worst_sigma:.1e} <= 1e-12, T_k vs minors FD {worst_t:.1e} <= 1e-6, {} integral fixtures {worst_int:.1e} <= 1e-8",
            records.len()
        ),
    );
}

fn fingerprint(r: &SuiteReport) -> Vec<String> {
    let mut out = Vec::new();
    for v in &r.verdicts {
        let vals: Vec<String> = v.values.iter().map(|(k, x)| format!("{k}={:016x}", x.to_bits())).collect();
        let order = v.order.and_then(|o| o.value()).map(|o| o.to_bits());
        out.push(format!("{}|{}|{}|{:?}|{}|{order:?}|{}", v.check, v.fixture, v.n, v.k, v.status, vals.join(",")));
    }
    for row in &r.residuals {
        out.push(format!("{}|{}|{}|{:x}|{:x}", row.check, row.fixture, row.rung, row.residual.to_bits(), row.scale.to_bits()));
    }
    out
}

#[test]
fn criterion_8_determinism() {
    let base = SuiteConfig::default();
    let mut flow_cfg = SuiteConfig::flow_default();
    flow_cfg.flow.t_end = 0.5;
    flow_cfg.flow.record_every = 100;
    let run_all = || {
        let mut r = run_identity_suite(&base);
        r.extend(run_inequality_suite(&base));
        r.extend(run_flow_suite(&flow_cfg));
        fingerprint(&r)
    };
    let prints: Vec<Vec<String>> = [1, 2, 8]
        .iter()
        .map(|&t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(run_all))
        .collect();
    let same = prints.windows(2).all(|w| w[0] == w[1]);
    report(
        8,
        "determinism",
        same && !prints[0].is_empty(),
        format!("{} verdict and residual records bit-identical across 1, 2 and 8 threads", prints[0].len()),
    );
}
