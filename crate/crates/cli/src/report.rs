//! Report files. Every CSV has a fixed header per command; numbers are
//! written with 17 significant digits.

use icflow::flow::DiagnosticsRecord;
use icflow::verification::{ResidualRow, Verdict};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// `t, Qk, I_H0 .. I_H{n-1}, I_r2H, vol, drift, min_u, min_Hk`, with
/// `I_r2H` the weighted integral of `H_k`.
pub fn series_csv(n: usize, k: usize, records: &[DiagnosticsRecord]) -> String {
    let mut header = strings(&["t", "Qk"]);
    header.extend((0..n).map(|j| format!("I_H{j}")));
    header.extend(strings(&["I_r2H", "vol", "drift", "min_u", "min_Hk"]));
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let f = &r.functionals;
            let mut row = vec![num(r.t), num(r.qk)];
            row.extend(f.i_h.iter().map(|&x| num(x)));
            row.extend([f.i_r2h[k], f.vol, r.conservation_drift, r.min_u, r.min_hk].map(num));
            row
        })
        .collect();
    to_csv(&header, &rows)
}

pub const RESIDUAL_COLUMNS: [&str; 7] = ["check", "fixture", "n", "k", "rung", "residual", "scale"];

fn residual_fields(r: &ResidualRow) -> Vec<String> {
    vec![r.check.clone(), r.fixture.clone(), r.n.to_string(), r.k.to_string(), num(r.rung), num(r.residual), num(r.scale)]
}

pub fn residuals_csv(rows: &[ResidualRow]) -> String {
    to_csv(&strings(&RESIDUAL_COLUMNS), &rows.iter().map(residual_fields).collect::<Vec<_>>())
}

pub const VERDICT_COLUMNS: [&str; 8] = ["check", "fixture", "n", "k", "status", "order", "residual", "detail"];

/// The headline number of a verdict: its `residual` value when it has one.
fn headline(v: &Verdict) -> f64 {
    v.get("residual").or_else(|| v.values.first().map(|(_, x)| *x)).unwrap_or(f64::NAN)
}

fn verdict_fields(v: &Verdict) -> Vec<String> {
    let status = match &v.status {
        icflow::verification::Status::Skipped(_) => "skipped".to_string(),
        s => s.to_string(),
    };
    let detail: Vec<String> = v.values.iter().map(|(k, x)| format!("{k}={}", num(*x))).collect();
    vec![
        v.check.clone(),
        v.fixture.clone(),
        v.n.to_string(),
        v.k.map(|k| k.to_string()).unwrap_or_default(),
        status,
        v.order.and_then(|o| o.value()).map(num).unwrap_or_default(),
        num(headline(v)),
        detail.join(";"),
    ]
}

pub fn verdicts_csv(verdicts: &[Verdict]) -> String {
    to_csv(&strings(&VERDICT_COLUMNS), &verdicts.iter().map(verdict_fields).collect::<Vec<_>>())
}

/// Verdict rows prefixed with the swept value.
pub fn sweep_verdicts_csv(key: &str, branches: &[(String, Vec<Verdict>)]) -> String {
    let mut header = vec![key.to_string()];
    header.extend(strings(&VERDICT_COLUMNS));
    let mut rows = Vec::new();
    for (value, vs) in branches {
        for v in vs {
            let mut row = vec![value.clone()];
            row.extend(verdict_fields(v));
            rows.push(row);
        }
    }
    to_csv(&header, &rows)
}

pub fn sweep_residuals_csv(key: &str, branches: &[(String, Vec<ResidualRow>)]) -> String {
    let mut header = vec![key.to_string()];
    header.extend(strings(&RESIDUAL_COLUMNS));
    let mut rows = Vec::new();
    for (value, rs) in branches {
        for r in rs {
            let mut row = vec![value.clone()];
            row.extend(residual_fields(r));
            rows.push(row);
        }
    }
    to_csv(&header, &rows)
}

/// Final state of one flow branch of a sweep.
#[derive(Debug, Clone)]
pub struct FlowSummary {
    pub termination: String,
    pub t_final: f64,
    pub steps: usize,
    pub qk_initial: f64,
    pub qk_final: f64,
    pub qk_target: f64,
    pub max_drift: f64,
}

pub const FLOW_SWEEP_COLUMNS: [&str; 7] =
    ["termination", "t_final", "steps", "qk_initial", "qk_final", "qk_target", "max_drift"];

pub fn sweep_flow_csv(key: &str, branches: &[(String, FlowSummary)]) -> String {
    let mut header = vec![key.to_string()];
    header.extend(strings(&FLOW_SWEEP_COLUMNS));
    let rows: Vec<Vec<String>> = branches
        .iter()
        .map(|(value, s)| {
            vec![
                value.clone(),
                s.termination.clone(),
                num(s.t_final),
                s.steps.to_string(),
                num(s.qk_initial),
                num(s.qk_final),
                num(s.qk_target),
                num(s.max_drift),
            ]
        })
        .collect();
    to_csv(&header, &rows)
}

/// `Q_k` against `t` as a polyline, with a dashed horizontal line at `reference`.
pub fn qk_svg(points: &[(f64, f64)], reference: f64, title: &str) -> String {
    let (w, h, m) = (640.0, 400.0, 60.0);
    let t_max = points.iter().map(|p| p.0).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let finite = points.iter().map(|p| p.1).filter(|y| y.is_finite());
    let mut lo = finite.clone().fold(reference, f64::min);
    let mut hi = finite.fold(reference, f64::max);
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        let pad = 0.01 * hi.abs().max(1.0);
        lo -= pad;
        hi += pad;
    }
    let x = |t: f64| m + (w - 2.0 * m) * t / t_max;
    let y = |q: f64| h - m - (h - 2.0 * m) * (q - lo) / (hi - lo);
    let line: Vec<String> =
        points.iter().filter(|p| p.1.is_finite()).map(|&(t, q)| format!("{:.2},{:.2}", x(t), y(q))).collect();
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        b = h - m,
        r = w - m
    ));
    s.push_str(&format!(
        "<line class=\"reference\" x1=\"{m}\" y1=\"{ry:.2}\" x2=\"{r}\" y2=\"{ry:.2}\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n",
        ry = y(reference),
        r = w - m
    ));
    s.push_str(&format!(
        "<polyline class=\"qk\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        line.join(" ")
    ));
    let text = |x: f64, y: f64, anchor: &str, body: String| {
        format!("<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"{anchor}\">{body}</text>\n")
    };
    s.push_str(&text(w / 2.0, 24.0, "middle", title.to_string()));
    s.push_str(&text(w / 2.0, h - 16.0, "middle", "t".into()));
    s.push_str(&text(m, h - m + 16.0, "middle", "0".into()));
    s.push_str(&text(w - m, h - m + 16.0, "middle", format!("{t_max:.3}")));
    s.push_str(&text(m - 6.0, y(lo) + 4.0, "end", format!("{lo:.5}")));
    s.push_str(&text(m - 6.0, y(hi) + 4.0, "end", format!("{hi:.5}")));
    s.push_str(&text(w - m, y(reference) - 6.0, "end", format!("sphere value {reference:.6}")));
    s.push_str("</svg>\n");
    s
}
