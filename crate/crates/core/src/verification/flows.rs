use rayon::prelude::*;

use super::suite::{shape_label, SuiteConfig, SuiteReport, Verdict};
use crate::error::{Error, Result};
use crate::flow::{check_monotonicity_identity, run_observed, FlowConfig, FlowRun, FlowState, MonotonicityProbe, Speed};
use crate::geometry::ShapeSpec;
use crate::integrals::sphere_qk;

fn flow_config(cfg: &SuiteConfig, n: usize, k: usize, speed: Speed, t_end: f64) -> FlowConfig {
    FlowConfig { t_end, dt_initial: cfg.flow.dt_initial, ..FlowConfig::new(n, k, speed) }
}

fn probed_run(
    cfg: &SuiteConfig,
    spec: &ShapeSpec,
    config: &FlowConfig,
    record_every: usize,
    probe: bool,
) -> Result<(FlowRun, Vec<MonotonicityProbe>)> {
    let state = FlowState::new(cfg.sample(spec, cfg.flow.n_phi)?)?;
    let mut probes = Vec::new();
    let run = run_observed(state, config, record_every, |st| {
        if probe {
            probes.push(check_monotonicity_identity(st, config, cfg.flow.dt_probe)?);
        }
        Ok(())
    })?;
    Ok((run, probes))
}

fn flow_fixture(cfg: &SuiteConfig, n: usize, spec: &ShapeSpec, k: usize) -> SuiteReport {
    let label = shape_label(spec.shape());
    let mut report = SuiteReport::default();
    let names = [
        "flow_run",
        "flow_monotone",
        "flow_conservation",
        "flow_lower_bound",
        "flow_limit",
        "flow_dissipation",
        "flow_dissipation_rate",
    ];
    let skip_all = |why: String, report: &mut SuiteReport| {
        for name in names {
            report.verdicts.push(Verdict::new(name, &label, n, Some(k)).skipped(why.clone()));
        }
    };
    if cfg.faults.any() {
        skip_all("faults apply to static checks".into(), &mut report);
        return report;
    }
    let config = flow_config(cfg, n, k, Speed::Normalized, cfg.flow.t_end);
    let (run, probes) = match probed_run(cfg, spec, &config, cfg.flow.record_every, true) {
        Ok(r) => r,
        Err(Error::ConvexityLost { index, .. }) => {
            skip_all(format!("H_{index} not positive initially"), &mut report);
            return report;
        }
        Err(Error::StarShapeLost { .. }) => {
            skip_all("not star-shaped initially".into(), &mut report);
            return report;
        }
        Err(e) => {
            for name in names {
                report.verdicts.push(Verdict::new(name, &label, n, Some(k)).failed_with(&e));
            }
            return report;
        }
    };
    let v = |name: &str| Verdict::new(name, &label, n, Some(k));
    let recs = &run.records;
    let target = sphere_qk(n, k);
    let last = recs.last().expect("a run records its initial state");

    let mut run_v = v("flow_run")
        .value("t_final", run.final_state.t)
        .value("steps", run.final_state.step_count as f64)
        .pass_if(run.completed());
    if let crate::flow::Termination::Failed(e) = &run.termination {
        run_v = run_v.failed_with(e);
    }
    report.verdicts.push(run_v);

    let (mut worst_excess, mut worst_increase) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for w in recs.windows(2) {
        let inc = w[1].qk - w[0].qk;
        worst_increase = worst_increase.max(inc);
        worst_excess = worst_excess.max(inc - w[1].tau_quad.max(w[0].tau_quad));
    }
    report.verdicts.push(
        v("flow_monotone")
            .value("max_increase", worst_increase)
            .value("max_excess_over_tau", worst_excess)
            .value("records", recs.len() as f64)
            .pass_if(recs.len() < 2 || worst_excess <= 0.0),
    );

    let drift = recs.iter().fold(0.0_f64, |m, r| m.max(r.conservation_drift));
    report.verdicts.push(
        v("flow_conservation").value("max_drift", drift).tol("drift", cfg.flow.drift_tol).pass_if(drift <= cfg.flow.drift_tol),
    );

    let lower = recs.iter().map(|r| r.qk - target + r.tau_quad).fold(f64::INFINITY, f64::min);
    report.verdicts.push(v("flow_lower_bound").value("min_margin", lower).value("target", target).pass_if(lower >= 0.0));

    let rel = last.qk / target - 1.0;
    let limit = v("flow_limit").value("final_qk", last.qk).value("target", target).value("relative", rel);
    report.verdicts.push(if run.completed() {
        limit.tol("relative", cfg.flow.limit_tol).pass_if(rel.abs() <= cfg.flow.limit_tol)
    } else {
        limit.pass_if(false)
    });

    // One probe per record, in the same order.
    let mut worst_term = f64::NEG_INFINITY;
    let mut worst_term_excess = f64::NEG_INFINITY;
    let mut worst_rate = 0.0_f64;
    for (p, r) in probes.iter().zip(recs) {
        let term = p.maclaurin_term.max(p.speed_term).max(p.gradient_term);
        worst_term = worst_term.max(term);
        worst_term_excess = worst_term_excess.max(term - r.tau_quad);
        let allowed = 1e-2 * p.lhs_rate.abs().max(p.rhs.abs()) + 1e-9 * p.scale;
        worst_rate = worst_rate.max((p.lhs_rate - p.rhs).abs() / allowed);
    }
    report.verdicts.push(
        v("flow_dissipation")
            .value("max_term", worst_term)
            .value("max_excess_over_tau", worst_term_excess)
            .value("probes", probes.len() as f64)
            .pass_if(worst_term_excess <= 0.0),
    );
    report.verdicts.push(
        v("flow_dissipation_rate")
            .value("max_error_over_allowed", worst_rate)
            .tol("relative", 1e-2)
            .pass_if(worst_rate <= 1.0),
    );

    if let Some(te) = cfg.flow.equivalence_t_end {
        report.verdicts.push(equivalence(cfg, n, spec, k, te));
    }
    report
}

/// The un-normalized flow rescaled by `e^{-t}` is the normalized flow, so
/// the two `Q_k` series must agree up to the time discretization.
fn equivalence(cfg: &SuiteConfig, n: usize, spec: &ShapeSpec, k: usize, t_end: f64) -> Verdict {
    let label = shape_label(spec.shape());
    let v = Verdict::new("flow_equivalence", &label, n, Some(k));
    let norm = probed_run(cfg, spec, &flow_config(cfg, n, k, Speed::Normalized, t_end), 1, false);
    let un = probed_run(cfg, spec, &flow_config(cfg, n, k, Speed::Unnormalized, t_end), 1, false);
    let (norm, un) = match (norm, un) {
        (Ok((a, _)), Ok((b, _))) => (a, b),
        (Err(e), _) | (_, Err(e)) => return v.failed_with(&e),
    };
    if !(norm.completed() && un.completed()) {
        return v.value("completed", 0.0).pass_if(false);
    }
    let u = &un.records;
    let mut worst = 0.0_f64;
    let mut tau = 0.0_f64;
    let mut max_dt = 0.0_f64;
    let mut max_rate = 0.0_f64;
    for w in u.windows(2) {
        max_dt = max_dt.max(w[1].t - w[0].t);
    }
    for r in &norm.records {
        let j = u.partition_point(|x| x.t <= r.t).clamp(1, u.len() - 1);
        let (a, b) = (&u[j - 1], &u[j]);
        let s = if b.t > a.t { (r.t - a.t) / (b.t - a.t) } else { 0.0 };
        let q = a.qk + s * (b.qk - a.qk);
        worst = worst.max((r.qk - q).abs());
        tau = tau.max(r.tau_quad).max(a.tau_quad);
        max_rate = max_rate.max(r.dqk_dt.abs());
    }
    let allowed = tau + max_dt * max_rate;
    v.value("max_difference", worst)
        .value("max_dt", max_dt)
        .tol("allowed", allowed)
        .pass_if(worst <= allowed)
}

/// Normalized flows from every fixture: monotonicity and lower bound of
/// `Q_k`, conservation of `int H_{k-1}`, the limit on the sphere value, the
/// sign of the three dissipation terms and the agreement of their sum with
/// the measured rate, and equivalence with the rescaled un-normalized flow.
pub fn run_flow_suite(cfg: &SuiteConfig) -> SuiteReport {
    if let Err(e) = cfg.validate() {
        return SuiteReport { verdicts: vec![Verdict::new("config", "-", 0, None).failed_with(&e)], residuals: vec![] };
    }
    let mut jobs = Vec::new();
    for (n, spec) in cfg.fixtures() {
        for k in cfg.ks_for(n) {
            jobs.push((n, spec.clone(), k));
        }
    }
    let parts: Vec<SuiteReport> = jobs.par_iter().map(|(n, spec, k)| flow_fixture(cfg, *n, spec, *k)).collect();
    let mut out = SuiteReport::default();
    for p in parts {
        out.extend(p);
    }
    out
}
