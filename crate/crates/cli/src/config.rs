//! Run configuration files.
//!
//! A TOML document with sections `[shape]`, `[grid]`, `[flow]`, `[suite]`
//! and `[output]`. Only `shape.variant`, `shape.n` and `shape.k` are
//! required; every other key has the default shown by
//! [`RunConfig::to_toml`] on a minimal file. Unknown keys are errors.

use serde::{Deserialize, Serialize};

use icflow::verification::{FlowSuiteSettings, SuiteConfig, TolerancePolicy};
use icflow::{Faults, FlowConfig, GridSpec, RegridPolicy, Shape, ShapeSpec, Speed};

/// A configuration problem. Always maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sphere,
    Ellipsoid,
    Perturbed,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedKind {
    Normalized,
    Unnormalized,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    pub variant: Variant,
    pub n: usize,
    pub k: usize,
    #[serde(default = "one")]
    pub radius: f64,
    /// Polar semi-axis of the ellipsoid.
    #[serde(default = "one")]
    pub a: f64,
    /// Equatorial semi-axis of the ellipsoid.
    #[serde(default = "one")]
    pub b: f64,
    /// `[m, eps]` pairs of `rho = radius + sum eps cos(m phi)`.
    #[serde(default)]
    pub modes: Vec<(u32, f64)>,
    /// `[phi, rho]` samples of a tabulated profile.
    #[serde(default)]
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_phi: usize,
    pub order: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n_phi: 64, order: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub speed: SpeedKind,
    pub dt_initial: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub max_steps: usize,
    pub record_every: usize,
    /// Rescale to unit mean radius every this many steps; 0 never does.
    pub regrid_every: usize,
    pub convexity_floor: f64,
    pub star_floor: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        let base = FlowConfig::new(3, 1, Speed::Normalized);
        Self {
            speed: SpeedKind::Normalized,
            dt_initial: base.dt_initial,
            t_end: base.t_end,
            cfl_safety: base.cfl_safety,
            max_steps: base.max_steps,
            record_every: 10,
            regrid_every: 0,
            convexity_floor: base.convexity_floor,
            star_floor: base.star_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSection {
    /// Grid ladder; `[N, 2N, 4N]` from `grid.n_phi` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    /// Curvature orders to check; `[shape.k]` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<usize>>,
    pub dt_probes: [f64; 3],
    pub settle_time: f64,
    pub floor: f64,
    pub exact: f64,
    pub order_slack: f64,
    pub equality_factor: f64,
    pub strict_factor: f64,
    pub flip_second_fundamental_form: bool,
    pub binomial_off_by_one: bool,
    pub drop_qk_correction: bool,
}

impl Default for SuiteSection {
    fn default() -> Self {
        let s = SuiteConfig::default();
        let t = TolerancePolicy::default();
        Self {
            ladder: None,
            ks: None,
            dt_probes: s.dt_probes,
            settle_time: s.settle_time,
            floor: t.floor,
            exact: t.exact,
            order_slack: t.order_slack,
            equality_factor: t.equality_factor,
            strict_factor: t.strict_factor,
            flip_second_fundamental_form: false,
            binomial_off_by_one: false,
            drop_qk_correction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub svg: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "icflow-out".into(), svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shape: ShapeSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub suite: SuiteSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    /// Parses a document. Errors carry the line and column of the offending span.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e| ConfigError(format!("config parse error: {e}")))?;
        if !table.contains_key("shape") {
            return err("config has no [shape] section");
        }
        toml::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))
    }

    /// The fully resolved document, with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Returns a copy with `section.key` replaced by `value`, a TOML literal
    /// or a bare string.
    pub fn with_key(&self, key: &str, value: &str) -> Result<Self, ConfigError> {
        let (section, field) = key
            .split_once('.')
            .ok_or_else(|| ConfigError(format!("axis key {key:?} must look like section.key")))?;
        let mut table: toml::Table = self.to_toml().parse().expect("own output parses");
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let sec = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()))
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("unknown section {section:?}")))?;
        sec.insert(field.to_string(), parsed);
        let text = toml::to_string(&table).expect("table serializes");
        toml::from_str::<Self>(&text).map_err(|e| ConfigError(format!("cannot set {key} = {value}: {}", e.message())))
    }

    pub fn shape(&self) -> Shape {
        let s = &self.shape;
        match s.variant {
            Variant::Sphere => Shape::Sphere { radius: s.radius },
            Variant::Ellipsoid => Shape::AxisymEllipsoid { a: s.a, b: s.b },
            Variant::Perturbed => Shape::PerturbedSphere { radius: s.radius, modes: s.modes.clone() },
            Variant::Tabulated => Shape::TabulatedProfile { points: s.points.clone() },
        }
    }

    fn check_k(&self, k: usize) -> Result<(), ConfigError> {
        let n = self.shape.n;
        if n < 3 {
            return err(format!("n = {n} must be at least 3"));
        }
        if k < 1 || k > n - 1 {
            return err(format!("k = {k} is outside the valid range 1..={} for n = {n}", n - 1));
        }
        Ok(())
    }

    pub fn shape_spec(&self) -> Result<ShapeSpec, ConfigError> {
        self.check_k(self.shape.k)?;
        ShapeSpec::new(self.shape.n, self.shape()).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::axisym(self.grid.n_phi, self.grid.order).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn flow_config(&self) -> Result<FlowConfig, ConfigError> {
        self.check_k(self.shape.k)?;
        let f = &self.flow;
        if f.record_every == 0 {
            return err("flow.record_every must be at least 1");
        }
        let speed = match f.speed {
            SpeedKind::Normalized => Speed::Normalized,
            SpeedKind::Unnormalized => Speed::Unnormalized,
        };
        let cfg = FlowConfig {
            dt_initial: f.dt_initial,
            t_end: f.t_end,
            cfl_safety: f.cfl_safety,
            max_steps: f.max_steps,
            regrid: if f.regrid_every == 0 { RegridPolicy::None } else { RegridPolicy::ReprojectEvery(f.regrid_every) },
            convexity_floor: f.convexity_floor,
            star_floor: f.star_floor,
            ..FlowConfig::new(self.shape.n, self.shape.k, speed)
        };
        cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(cfg)
    }

    pub fn suite_config(&self) -> Result<SuiteConfig, ConfigError> {
        self.shape_spec()?;
        let s = &self.suite;
        let ks = s.ks.clone().unwrap_or_else(|| vec![self.shape.k]);
        for &k in &ks {
            self.check_k(k)?;
        }
        let n = self.grid.n_phi;
        let cfg = SuiteConfig {
            shapes: vec![self.shape()],
            dims: vec![self.shape.n],
            ks: Some(ks),
            ladder: s.ladder.clone().unwrap_or_else(|| vec![n, 2 * n, 4 * n]),
            order: self.grid.order,
            dt_probes: s.dt_probes,
            settle_time: s.settle_time,
            tolerance: TolerancePolicy {
                floor: s.floor,
                exact: s.exact,
                order_slack: s.order_slack,
                equality_factor: s.equality_factor,
                strict_factor: s.strict_factor,
            },
            faults: Faults {
                flip_second_fundamental_form: s.flip_second_fundamental_form,
                binomial_off_by_one: s.binomial_off_by_one,
                drop_qk_correction: s.drop_qk_correction,
            },
            flow: FlowSuiteSettings::default(),
        };
        cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(cfg)
    }
}
