use thiserror::Error;

/// Errors raised by sampling, geometry, integration and flow evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-positive radius {rho} at node {node}")]
    NonPositiveRadius { node: usize, rho: f64 },
    #[error("induced metric is not positive definite at node {node}")]
    SingularMetric { node: usize },
    #[error("operation not supported in {0} mode")]
    UnsupportedMode(&'static str),
    #[error("non-finite integrand at node {node}")]
    NonFiniteIntegrand { node: usize },
    #[error("k = {k} outside the valid range {lo}..={hi} for n = {n}")]
    InvalidK { k: usize, n: usize, lo: usize, hi: usize },
    #[error("k-convexity lost at node {node} (H_{index} = {value:e})")]
    ConvexityLost { node: usize, index: usize, value: f64 },
    #[error("star-shapedness lost at node {node} (u = {u:e})")]
    StarShapeLost { node: usize, u: f64 },
    #[error("time step underflow (dt = {dt:e})")]
    StepUnderflow { dt: f64 },
    #[error("invalid flow configuration: {0}")]
    InvalidFlowConfig(String),
    #[error("flow failed at t = {t}: {source}")]
    FlowFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("fixture file: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_k(k: usize, n: usize, lo: usize) -> Result<()> {
    let hi = n - 1;
    if k < lo || k > hi {
        return Err(Error::InvalidK { k, n, lo, hi });
    }
    Ok(())
}
