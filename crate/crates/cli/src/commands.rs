//! The three subcommands. Each returns the files of its report bundle and
//! an exit code; nothing here touches the file system.

use rayon::prelude::*;

use icflow::flow::{self, DiagnosticsRecord, Termination};
use icflow::integrals::sphere_qk;
use icflow::verification::{run_identity_suite, run_inequality_suite, Status, SuiteReport, Verdict};

use crate::config::{ConfigError, RunConfig};
use crate::report::{self, FlowSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FLOW_FAILED: i32 = 3;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    /// Relative path and contents of every report file.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, s)| s.as_str())
    }

    pub fn summary(&self) -> &str {
        self.file("summary.txt").unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Verify,
    Flow,
}

fn counts(verdicts: &[Verdict]) -> String {
    let pass = verdicts.iter().filter(|v| v.passed()).count();
    let fail = verdicts.iter().filter(|v| v.is_fail()).count();
    let skipped = verdicts.iter().filter(|v| matches!(v.status, Status::Skipped(_))).count();
    format!("pass={pass} fail={fail} skipped={skipped}")
}

fn summary(command: &str, exit_code: i32, facts: &[(String, String)], verdicts: &[Verdict], cfg: &RunConfig) -> String {
    let mut s = format!("command: {command}\nexit_code: {exit_code}\n");
    for (k, v) in facts {
        s.push_str(&format!("{k}: {v}\n"));
    }
    if !verdicts.is_empty() {
        s.push_str("--- verdicts ---\n");
        for v in verdicts {
            s.push_str(&format!("{v}\n"));
        }
    }
    s.push_str("--- config ---\n");
    s.push_str(&cfg.to_toml());
    s
}

fn verify_report(cfg: &RunConfig) -> Result<SuiteReport, ConfigError> {
    let suite = cfg.suite_config()?;
    let mut report = run_identity_suite(&suite);
    report.extend(run_inequality_suite(&suite));
    Ok(report)
}

fn verify_outcome(cfg: &RunConfig, report: &SuiteReport) -> Outcome {
    let exit_code = if report.all_ok() { EXIT_OK } else { EXIT_CHECK_FAILED };
    let facts = vec![("verdicts".to_string(), counts(&report.verdicts))];
    Outcome {
        exit_code,
        files: vec![
            ("summary.txt".into(), summary("verify", exit_code, &facts, &report.verdicts, cfg)),
            ("verdicts.csv".into(), report::verdicts_csv(&report.verdicts)),
            ("residuals.csv".into(), report::residuals_csv(&report.residuals)),
        ],
    }
}

/// Identity and inequality suites on the configured shape.
pub fn verify(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    Ok(verify_outcome(cfg, &verify_report(cfg)?))
}

struct FlowResult {
    records: Vec<DiagnosticsRecord>,
    summary: FlowSummary,
    error: Option<String>,
}

fn flow_result(cfg: &RunConfig) -> Result<FlowResult, ConfigError> {
    let spec = cfg.shape_spec()?;
    let grid = cfg.grid_spec()?;
    let fc = cfg.flow_config()?;
    let target = sphere_qk(cfg.shape.n, cfg.shape.k);
    let (records, termination, t_final, steps, error) = match flow::run(&spec, grid, &fc, cfg.flow.record_every) {
        Ok(run) => {
            let (term, error) = match &run.termination {
                Termination::ReachedEnd => ("reached_end".to_string(), None),
                Termination::MaxSteps => ("max_steps".to_string(), None),
                Termination::Failed(e) => ("failed".to_string(), Some(e.to_string())),
            };
            (run.records, term, run.final_state.t, run.final_state.step_count, error)
        }
        Err(e) => (Vec::new(), "failed".to_string(), 0.0, 0, Some(e.to_string())),
    };
    let qk = |r: Option<&DiagnosticsRecord>| r.map(|r| r.qk).unwrap_or(f64::NAN);
    let summary = FlowSummary {
        termination,
        t_final,
        steps,
        qk_initial: qk(records.first()),
        qk_final: qk(records.last()),
        qk_target: target,
        max_drift: records.iter().fold(0.0, |m: f64, r| m.max(r.conservation_drift)),
    };
    Ok(FlowResult { records, summary, error })
}

fn flow_outcome(cfg: &RunConfig, r: &FlowResult) -> Outcome {
    let exit_code = if r.error.is_some() { EXIT_FLOW_FAILED } else { EXIT_OK };
    let s = &r.summary;
    let mut facts = vec![
        ("termination".to_string(), s.termination.clone()),
        ("t_final".into(), report::num(s.t_final)),
        ("steps".into(), s.steps.to_string()),
        ("records".into(), r.records.len().to_string()),
        ("qk_initial".into(), report::num(s.qk_initial)),
        ("qk_final".into(), report::num(s.qk_final)),
        ("qk_sphere_value".into(), report::num(s.qk_target)),
        ("qk_relative_error".into(), report::num(s.qk_final / s.qk_target - 1.0)),
        ("max_drift".into(), report::num(s.max_drift)),
    ];
    if let Some(e) = &r.error {
        facts.push(("error".into(), e.clone()));
    }
    let mut files = vec![
        ("summary.txt".to_string(), summary("flow", exit_code, &facts, &[], cfg)),
        ("series.csv".to_string(), report::series_csv(cfg.shape.n, cfg.shape.k, &r.records)),
    ];
    if cfg.output.svg {
        let pts: Vec<(f64, f64)> = r.records.iter().map(|x| (x.t, x.qk)).collect();
        let title = format!("Q_{} for n = {}", cfg.shape.k, cfg.shape.n);
        files.push(("qk.svg".into(), report::qk_svg(&pts, s.qk_target, &title)));
    }
    Outcome { exit_code, files }
}

/// A flow run. A terminal flow error still writes the partial series.
pub fn flow(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    Ok(flow_outcome(cfg, &flow_result(cfg)?))
}

/// Splits `section.key=v1,v2,...`.
pub fn parse_axis(axis: &str) -> Result<(String, Vec<String>), ConfigError> {
    let (key, values) =
        axis.split_once('=').ok_or_else(|| ConfigError(format!("axis {axis:?} must look like section.key=v1,v2")))?;
    let values: Vec<String> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
    if values.is_empty() {
        return Err(ConfigError(format!("axis {key} has an empty value list")));
    }
    Ok((key.trim().to_string(), values))
}

/// Runs `mode` once per axis value, concurrently. Every branch config is
/// resolved and validated before anything runs.
pub fn sweep(cfg: &RunConfig, axis: &str, mode: Mode) -> Result<Outcome, ConfigError> {
    let (key, values) = parse_axis(axis)?;
    let mut branches = Vec::new();
    for v in &values {
        let c = cfg.with_key(&key, v)?;
        match mode {
            Mode::Verify => c.suite_config().map(|_| ())?,
            Mode::Flow => c.flow_config().map(|_| ())?,
        }
        c.shape_spec()?;
        c.grid_spec()?;
        branches.push((v.clone(), c));
    }

    let mut files = Vec::new();
    let mut facts = vec![("axis".to_string(), key.clone()), ("mode".to_string(), format!("{mode:?}").to_lowercase())];
    let mut exit_code = EXIT_OK;
    let mut push_branch = |value: &str, out: Outcome, files: &mut Vec<(String, String)>| {
        facts.push((format!("{key}={value}"), format!("exit_code {}", out.exit_code)));
        exit_code = exit_code.max(out.exit_code);
        for (name, body) in out.files {
            files.push((format!("{key}={value}/{name}"), body));
        }
    };
    match mode {
        Mode::Verify => {
            let reports: Vec<SuiteReport> =
                branches.par_iter().map(|(_, c)| verify_report(c)).collect::<Result<_, _>>()?;
            let mut verdicts = Vec::new();
            let mut residuals = Vec::new();
            for ((value, c), r) in branches.iter().zip(reports) {
                push_branch(value, verify_outcome(c, &r), &mut files);
                verdicts.push((value.clone(), r.verdicts));
                residuals.push((value.clone(), r.residuals));
            }
            files.push(("sweep_verdicts.csv".into(), report::sweep_verdicts_csv(&key, &verdicts)));
            files.push(("sweep_residuals.csv".into(), report::sweep_residuals_csv(&key, &residuals)));
        }
        Mode::Flow => {
            let results: Vec<FlowResult> =
                branches.par_iter().map(|(_, c)| flow_result(c)).collect::<Result<_, _>>()?;
            let mut finals = Vec::new();
            for ((value, c), r) in branches.iter().zip(results) {
                push_branch(value, flow_outcome(c, &r), &mut files);
                finals.push((value.clone(), r.summary));
            }
            files.push(("sweep_flow.csv".into(), report::sweep_flow_csv(&key, &finals)));
        }
    }
    files.insert(0, ("summary.txt".into(), summary("sweep", exit_code, &facts, &[], cfg)));
    Ok(Outcome { exit_code, files })
}
