//! Time evolution of radial graphs under normal speeds `dX/dt = F nu`.
//!
//! With `X = rho(theta) theta` the normal component of the motion fixes the
//! radial speed `d rho / dt = F v / rho`, which is integrated with explicit
//! RK4 on the axisymmetric grid.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_k, Error, Result};
use crate::geometry::{normalize, radial_node, sample_shape, sigma_all, Faults, GridSpec, ShapeSpec, SurfaceSample};
use crate::integrals::{functionals, functionals_from_fields, integrate, qk_tolerance, FunctionalSet, SurfaceFields};

/// Nodewise data handed to a custom speed.
#[derive(Debug, Clone, Copy)]
pub struct SpeedContext<'a> {
    pub t: f64,
    pub phi: f64,
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    /// `H_0..=H_{n-1}`.
    pub h: &'a [f64],
}

pub type SpeedFn = dyn Fn(&SpeedContext<'_>) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Speed {
    /// `F = H_{k-1}/H_k - u`.
    Normalized,
    /// `F = H_{k-1}/H_k`.
    Unnormalized,
    Custom(Arc<SpeedFn>),
}

impl fmt::Debug for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speed::Normalized => write!(f, "Normalized"),
            Speed::Unnormalized => write!(f, "Unnormalized"),
            Speed::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegridPolicy {
    None,
    /// Divide `rho` by its nodal mean every `s` steps.
    ReprojectEvery(usize),
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub n: usize,
    pub k: usize,
    pub speed: Speed,
    /// Upper bound on the step; the stability and 5% rules may shorten it.
    pub dt_initial: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub max_steps: usize,
    pub regrid: RegridPolicy,
    /// Terminal lower bound on `H_1..H_k`.
    pub convexity_floor: f64,
    /// Terminal lower bound on `u`.
    pub star_floor: f64,
}

impl FlowConfig {
    pub fn new(n: usize, k: usize, speed: Speed) -> Self {
        Self {
            n,
            k,
            speed,
            dt_initial: 1e-2,
            t_end: 1.0,
            cfl_safety: 0.3,
            max_steps: 1_000_000,
            regrid: RegridPolicy::None,
            convexity_floor: 1e-8,
            star_floor: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidFlowConfig(format!("n = {} must be >= 3", self.n)));
        }
        check_k(self.k, self.n, 1)?;
        if !(self.dt_initial > 0.0) {
            return Err(Error::InvalidFlowConfig(format!("dt_initial = {} must be positive", self.dt_initial)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidFlowConfig(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidFlowConfig(format!("cfl_safety = {} must lie in (0, 1]", self.cfl_safety)));
        }
        if let RegridPolicy::ReprojectEvery(0) = self.regrid {
            return Err(Error::InvalidFlowConfig("reprojection interval must be >= 1".into()));
        }
        Ok(())
    }
}

/// Normal speed at a node from `H_0..`, the support function and the config.
pub fn normal_speed(ctx: &SpeedContext<'_>, config: &FlowConfig) -> Result<f64> {
    let k = config.k;
    let hk = ctx.h[k];
    match &config.speed {
        Speed::Custom(f) => Ok(f(ctx)),
        Speed::Normalized | Speed::Unnormalized => {
            if !(hk > config.convexity_floor) {
                return Err(Error::ConvexityLost { node: 0, index: k, value: hk });
            }
            let ratio = ctx.h[k - 1] / hk;
            Ok(match config.speed {
                Speed::Normalized => ratio - ctx.u,
                _ => ratio,
            })
        }
    }
}

/// `H_0..=H_{n-1}` of an axisymmetric node from the meridian and parallel curvatures.
fn node_h(n: usize, kappa_m: f64, kappa_p: f64) -> Vec<f64> {
    let mut kappa = vec![kappa_p; n - 1];
    kappa[0] = kappa_m;
    normalize(&sigma_all(&kappa), &Faults::default())
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub sample: SurfaceSample,
    pub t: f64,
    pub step_count: usize,
    pub last_dt: f64,
    /// Accumulated `ln` of the reprojection factors.
    pub log_scale: f64,
}

impl FlowState {
    pub fn new(sample: SurfaceSample) -> Result<Self> {
        if !sample.grid.is_axisym() {
            return Err(Error::UnsupportedMode(sample.grid.mode_name()));
        }
        // Flows always differentiate on the grid.
        let sample = SurfaceSample::from_nodes(sample.grid, sample.n, sample.rho.clone())?;
        Ok(Self { sample, t: 0.0, step_count: 0, last_dt: 0.0, log_scale: 0.0 })
    }

    pub fn from_shape(spec: &ShapeSpec, grid: GridSpec) -> Result<Self> {
        Self::new(sample_shape(spec, grid)?)
    }
}

/// Normal speed at every node, with validity checks.
pub fn speeds(sample: &SurfaceSample, config: &FlowConfig, t: f64) -> Result<Vec<f64>> {
    (0..sample.len())
        .into_par_iter()
        .map(|i| {
            let (rho, rp, rpp, phi) = (sample.rho[i], sample.rho_d1[i][0], sample.rho_d2[i][0], sample.phi[i]);
            let rn = radial_node(rho, rp, rpp, phi);
            if !(rn.u > config.star_floor) {
                return Err(Error::StarShapeLost { node: i, u: rn.u });
            }
            let h = node_h(sample.n, rn.kappa_meridian, rn.kappa_parallel);
            if let Some(j) = (1..=config.k).find(|&j| !(h[j] > config.convexity_floor)) {
                return Err(Error::ConvexityLost { node: i, index: j, value: h[j] });
            }
            let ctx = SpeedContext { t, phi, rho, u: rn.u, v: rn.v, h: &h };
            normal_speed(&ctx, config).map_err(|e| match e {
                Error::ConvexityLost { index, value, .. } => Error::ConvexityLost { node: i, index, value },
                e => e,
            })
        })
        .collect()
}

fn radial_rate(rho: f64, rp: f64, rpp: f64, phi: f64, config: &FlowConfig, n: usize, t: f64) -> f64 {
    let rn = radial_node(rho, rp, rpp, phi);
    let h = node_h(n, rn.kappa_meridian, rn.kappa_parallel);
    let ctx = SpeedContext { t, phi, rho, u: rn.u, v: rn.v, h: &h };
    normal_speed(&ctx, config).unwrap_or(0.0) * rn.v / rho
}

/// `d rho / dt` at every node and the largest `|F|`.
fn rates(sample: &SurfaceSample, config: &FlowConfig, t: f64) -> Result<(Vec<f64>, f64)> {
    let f = speeds(sample, config, t)?;
    let max_f = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let r = (0..sample.len())
        .map(|i| {
            let rho = sample.rho[i];
            let rp = sample.rho_d1[i][0];
            f[i] * (rho * rho + rp * rp).sqrt() / rho
        })
        .collect();
    Ok((r, max_f))
}

/// Largest step allowed by the linearized RK4 stability bound, the
/// displacement bound `dt max|d rho/dt| <= cfl h min rho`, and the 5% rule.
pub fn stable_dt(sample: &SurfaceSample, config: &FlowConfig, t: f64) -> Result<f64> {
    let (rate, _) = rates(sample, config, t)?;
    let h = sample.grid.h();
    let (c1, c2) = if sample.grid.order == 2 { (1.0, 4.0) } else { (1.372, 16.0 / 3.0) };
    let n = sample.n;
    let lambda = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            let (rho, rp, rpp, phi) = (sample.rho[i], sample.rho_d1[i][0], sample.rho_d2[i][0], sample.phi[i]);
            let d1 = 1e-6 * rho.max(rp.abs());
            let d2 = 1e-6 * rho.max(rpp.abs());
            let a1 = (radial_rate(rho, rp + d1, rpp, phi, config, n, t)
                - radial_rate(rho, rp - d1, rpp, phi, config, n, t))
                / (2.0 * d1);
            let a2 = (radial_rate(rho, rp, rpp + d2, phi, config, n, t)
                - radial_rate(rho, rp, rpp - d2, phi, config, n, t))
                / (2.0 * d2);
            let a0 = (radial_rate(rho * (1.0 + 1e-6), rp, rpp, phi, config, n, t)
                - radial_rate(rho * (1.0 - 1e-6), rp, rpp, phi, config, n, t))
                / (2e-6 * rho);
            a2.abs() * c2 / (h * h) + a1.abs() * c1 / h + a0.abs()
        })
        .reduce(|| 0.0, f64::max);
    let min_rho = sample.rho.iter().copied().fold(f64::INFINITY, f64::min);
    let max_rate = rate.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let max_rel = rate.iter().zip(&sample.rho).fold(0.0_f64, |m, (r, p)| m.max((r / p).abs()));
    let mut dt = f64::INFINITY;
    if lambda > 0.0 {
        dt = dt.min(config.cfl_safety * 2.5 / lambda);
    }
    if max_rate > 0.0 {
        dt = dt.min(config.cfl_safety * h * min_rho / max_rate);
    }
    if max_rel > 0.0 {
        dt = dt.min(0.05 / max_rel);
    }
    Ok(dt)
}

fn rk4(state: &FlowState, config: &FlowConfig, dt: f64) -> Result<SurfaceSample> {
    let s0 = &state.sample;
    let t = state.t;
    let axpy = |base: &[f64], k: &[f64], a: f64| -> Vec<f64> { base.iter().zip(k).map(|(b, k)| b + a * k).collect() };
    let (k1, _) = rates(s0, config, t)?;
    let s1 = s0.with_rho(axpy(&s0.rho, &k1, 0.5 * dt))?;
    let (k2, _) = rates(&s1, config, t + 0.5 * dt)?;
    let s2 = s0.with_rho(axpy(&s0.rho, &k2, 0.5 * dt))?;
    let (k3, _) = rates(&s2, config, t + 0.5 * dt)?;
    let s3 = s0.with_rho(axpy(&s0.rho, &k3, dt))?;
    let (k4, _) = rates(&s3, config, t + dt)?;
    let rho: Vec<f64> = (0..s0.len())
        .map(|i| s0.rho[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    s0.with_rho(rho)
}

fn advance(state: &FlowState, config: &FlowConfig, dt: f64) -> Result<FlowState> {
    if !(dt >= 1e-12) {
        return Err(Error::StepUnderflow { dt });
    }
    let mut sample = rk4(state, config, dt)?;
    let step_count = state.step_count + 1;
    let mut log_scale = state.log_scale;
    if let RegridPolicy::ReprojectEvery(s) = config.regrid {
        if step_count % s == 0 {
            let mean = sample.rho.iter().sum::<f64>() / sample.len() as f64;
            sample = sample.with_rho(sample.rho.iter().map(|r| r / mean).collect())?;
            log_scale += mean.ln();
        }
    }
    Ok(FlowState { sample, t: state.t + dt, step_count, last_dt: dt, log_scale })
}

/// One RK4 step with `dt = min(dt_initial, cap, stability bounds)`.
pub fn step_capped(state: &FlowState, config: &FlowConfig, cap: f64) -> Result<FlowState> {
    let mut dt = config.dt_initial.min(cap).min(stable_dt(&state.sample, config, state.t)?);
    // Land exactly on the cap instead of leaving a rounding-sized remainder.
    if cap.is_finite() && cap - dt <= 1e-8 * cap {
        dt = cap;
    }
    advance(state, config, dt)
}

pub fn step(state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    step_capped(state, config, f64::INFINITY)
}

/// Advances by exactly `duration` in equal substeps, each within the
/// stability bound at the starting state.
pub fn advance_by(state: &FlowState, config: &FlowConfig, duration: f64) -> Result<FlowState> {
    let bound = stable_dt(&state.sample, config, state.t)?.min(config.dt_initial);
    let substeps = (duration / bound).ceil().max(1.0) as usize;
    let dt = duration / substeps as f64;
    let mut s = state.clone();
    for _ in 0..substeps {
        s = advance(&s, config, dt)?;
    }
    Ok(s)
}

/// Time-stamped diagnostics of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub functionals: FunctionalSet,
    pub qk: f64,
    /// Centred difference of the recorded `Q_k` series (one-sided at the ends).
    pub dqk_dt: f64,
    /// `|int H_{k-1}(t) - int H_{k-1}(0)| / int H_{k-1}(0)`.
    pub conservation_drift: f64,
    pub min_u: f64,
    /// `min_node min_{i <= k} H_i`.
    pub min_hk: f64,
    pub max_speed: f64,
    /// Two-grid estimate of the quadrature error of `Q_k`.
    pub tau_quad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ReachedEnd,
    MaxSteps,
    Failed(Error),
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub records: Vec<DiagnosticsRecord>,
    pub termination: Termination,
    pub final_state: FlowState,
}

impl FlowRun {
    pub fn completed(&self) -> bool {
        self.termination == Termination::ReachedEnd
    }
}

pub fn diagnostics(state: &FlowState, config: &FlowConfig, initial_quermass: Option<f64>) -> Result<DiagnosticsRecord> {
    let k = config.k;
    let fields = SurfaceFields::new(&state.sample)?;
    let fs = functionals_from_fields(&state.sample, &fields, k)?;
    let qk = fs.qk.ok_or(Error::ConvexityLost { node: 0, index: k - 1, value: fs.i_h[k - 1] })?;
    let tau = qk_tolerance(&state.sample, &fs);
    let base = initial_quermass.unwrap_or(fs.i_h[k - 1]);
    let f = speeds(&state.sample, config, state.t)?;
    Ok(DiagnosticsRecord {
        t: state.t,
        step: state.step_count,
        qk,
        dqk_dt: 0.0,
        conservation_drift: (fs.i_h[k - 1] - base).abs() / base,
        min_u: fields.min_u(),
        min_hk: fields.convexity_margin(k),
        max_speed: f.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        tau_quad: tau,
        functionals: fs,
    })
}

fn fill_rates(records: &mut [DiagnosticsRecord]) {
    let m = records.len();
    if m < 2 {
        return;
    }
    let q: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.qk)).collect();
    for (i, r) in records.iter_mut().enumerate() {
        let (a, b) = if i == 0 { (0, 1) } else if i == m - 1 { (m - 2, m - 1) } else { (i - 1, i + 1) };
        r.dqk_dt = (q[b].1 - q[a].1) / (q[b].0 - q[a].0);
    }
}

/// Runs the flow from `state`, recording every `record_every` steps and at
/// the end. Terminal errors end the run with a partial series.
pub fn run_state(state: FlowState, config: &FlowConfig, record_every: usize) -> Result<FlowRun> {
    run_observed(state, config, record_every, |_| Ok(()))
}

/// As [`run_state`], calling `observe` on every recorded state. An observer
/// error ends the run like a terminal flow error.
pub fn run_observed<O>(state: FlowState, config: &FlowConfig, record_every: usize, mut observe: O) -> Result<FlowRun>
where
    O: FnMut(&FlowState) -> Result<()>,
{
    config.validate()?;
    if state.sample.n != config.n {
        return Err(Error::DimensionMismatch(format!("sample n = {}, flow n = {}", state.sample.n, config.n)));
    }
    let first = diagnostics(&state, config, None)?;
    let base = first.functionals.i_h[config.k - 1];
    observe(&state)?;
    let mut records = vec![first];
    let mut state = state;
    let every = record_every.max(1);
    let termination = loop {
        if state.t >= config.t_end * (1.0 - 1e-14) {
            break Termination::ReachedEnd;
        }
        if state.step_count >= config.max_steps {
            break Termination::MaxSteps;
        }
        match step_capped(&state, config, config.t_end - state.t) {
            Ok(next) => state = next,
            Err(e) => break Termination::Failed(Error::FlowFailed { t: state.t, source: Box::new(e) }),
        }
        let at_end = state.t >= config.t_end * (1.0 - 1e-14) || state.step_count >= config.max_steps;
        if state.step_count % every == 0 || at_end {
            match diagnostics(&state, config, Some(base)).and_then(|r| observe(&state).map(|_| r)) {
                Ok(r) => records.push(r),
                Err(e) => break Termination::Failed(Error::FlowFailed { t: state.t, source: Box::new(e) }),
            }
        }
    };
    fill_rates(&mut records);
    Ok(FlowRun { records, termination, final_state: state })
}

pub fn run(spec: &ShapeSpec, grid: GridSpec, config: &FlowConfig, record_every: usize) -> Result<FlowRun> {
    config.validate()?;
    let state = FlowState::from_shape(spec, grid)?;
    run_state(state, config, record_every)
}

/// Second-order one-sided derivative from values at `0`, `dt`, `2 dt`.
fn forward_derivative(f0: f64, f1: f64, f2: f64, dt: f64) -> f64 {
    (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * dt)
}

/// Residuals of the first-variation formulas, finite difference in time
/// minus the closed-form rate. Signed, except `r2` which is a max norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationResiduals {
    /// `d/dt int H_{k-1} - (n-k) int H_k F`.
    pub quermass: f64,
    /// `d/dt int r^2 H_k - int ((n-1-k) r^2 H_{k+1} + 2(k+1) u H_k - 2k H_{k-1}) F`.
    pub weighted: f64,
    /// `max_node |d/dt r^2 - 2 F u|` along normal trajectories.
    pub r2: f64,
    pub quermass_scale: f64,
    pub weighted_scale: f64,
}

pub fn check_variation_formulas(state: &FlowState, config: &FlowConfig, dt_probe: f64) -> Result<VariationResiduals> {
    config.validate()?;
    let n = state.sample.n;
    let k = config.k;
    let s1 = advance_by(state, config, dt_probe)?;
    let s2 = advance_by(&s1, config, dt_probe)?;
    let f0 = functionals(&state.sample, k)?;
    let f1 = functionals(&s1.sample, k)?;
    let f2 = functionals(&s2.sample, k)?;

    let sample = &state.sample;
    let fields = SurfaceFields::new(sample)?;
    let speed = speeds(sample, config, state.t)?;
    let hk = fields.h_field(k);
    let hk1 = fields.h_field(k - 1);
    let hkp = fields.h_field(k + 1);
    let a: Vec<f64> = (0..sample.len()).map(|i| hk[i] * speed[i]).collect();
    let b: Vec<f64> = (0..sample.len())
        .map(|i| {
            let (r2, u) = (fields.r2[i], fields.u[i]);
            ((n - 1 - k) as f64 * r2 * hkp[i] + 2.0 * (k + 1) as f64 * u * hk[i] - 2.0 * k as f64 * hk1[i]) * speed[i]
        })
        .collect();
    let rate_q = (n - k) as f64 * crate::integrals::integrate_density(sample, &fields.area, &a)?;
    let rate_w = crate::integrals::integrate_density(sample, &fields.area, &b)?;
    let fd_q = forward_derivative(f0.i_h[k - 1], f1.i_h[k - 1], f2.i_h[k - 1], dt_probe);
    let fd_w = forward_derivative(f0.i_r2h[k], f1.i_r2h[k], f2.i_r2h[k], dt_probe);

    let r2 = (0..sample.len())
        .map(|i| {
            let sq = |s: &SurfaceSample| s.rho[i] * s.rho[i];
            let d = forward_derivative(sq(sample), sq(&s1.sample), sq(&s2.sample), dt_probe);
            let rp = sample.rho_d1[i][0];
            let transport = 2.0 * speed[i] * rp * rp / fields_v(sample, i);
            (d - transport - 2.0 * speed[i] * fields.u[i]).abs()
        })
        .fold(0.0_f64, f64::max);
    Ok(VariationResiduals {
        quermass: fd_q - rate_q,
        weighted: fd_w - rate_w,
        r2,
        quermass_scale: rate_q.abs().max(f0.i_h[k - 1].abs()),
        weighted_scale: rate_w.abs().max(f0.i_r2h[k].abs()),
    })
}

fn fields_v(sample: &SurfaceSample, i: usize) -> f64 {
    let rho = sample.rho[i];
    let rp = sample.rho_d1[i][0];
    (rho * rho + rp * rp).sqrt()
}

/// The rate of the monotone combination against its three-term dissipation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityProbe {
    /// Finite difference in time of `int r^2 H_k + 2(k-1)/(n+1-k) int H_{k-2}`.
    pub lhs_rate: f64,
    /// `(n-1-k) int r^2 (H_{k+1} H_{k-1} / H_k - H_k)`.
    pub maclaurin_term: f64,
    /// `-2 int H_k (H_{k-1}/H_k - u)^2`.
    pub speed_term: f64,
    /// `-(1/2) int H_k |grad r^2|^2`.
    pub gradient_term: f64,
    pub rhs: f64,
    /// Magnitude used for relative comparisons.
    pub scale: f64,
}

pub fn check_monotonicity_identity(state: &FlowState, config: &FlowConfig, dt_probe: f64) -> Result<MonotonicityProbe> {
    if !matches!(config.speed, Speed::Normalized) {
        return Err(Error::InvalidFlowConfig("the dissipation identity holds for the normalized speed".into()));
    }
    let n = state.sample.n;
    let k = config.k;
    let s1 = advance_by(state, config, dt_probe)?;
    let s2 = advance_by(&s1, config, dt_probe)?;
    let g = |s: &SurfaceSample| functionals(s, k).map(|f| f.weighted_combination(k));
    let lhs_rate = forward_derivative(g(&state.sample)?, g(&s1.sample)?, g(&s2.sample)?, dt_probe);

    let sample = &state.sample;
    let fields = SurfaceFields::new(sample)?;
    let hk = fields.h_field(k);
    let hk1 = fields.h_field(k - 1);
    let hkp = fields.h_field(k + 1);
    let len = sample.len();
    let t1: Vec<f64> = (0..len).map(|i| fields.r2[i] * (hkp[i] * hk1[i] / hk[i] - hk[i])).collect();
    let t2: Vec<f64> = (0..len)
        .map(|i| {
            let f = hk1[i] / hk[i] - fields.u[i];
            -2.0 * hk[i] * f * f
        })
        .collect();
    let t3: Vec<f64> = (0..len)
        .map(|i| {
            let rho = sample.rho[i];
            let rp = sample.rho_d1[i][0];
            let v2 = rho * rho + rp * rp;
            let grad2 = 4.0 * rho * rho * rp * rp / v2;
            -0.5 * hk[i] * grad2
        })
        .collect();
    let int = |v: &[f64]| crate::integrals::integrate_density(sample, &fields.area, v);
    let maclaurin_term = (n - 1 - k) as f64 * int(&t1)?;
    let speed_term = int(&t2)?;
    let gradient_term = int(&t3)?;
    let rhs = maclaurin_term + speed_term + gradient_term;
    let scale = integrate(sample, &fields.r2.iter().zip(&hk).map(|(a, b)| a * b).collect::<Vec<_>>())?.abs();
    Ok(MonotonicityProbe { lhs_rate, maclaurin_term, speed_term, gradient_term, rhs, scale })
}
