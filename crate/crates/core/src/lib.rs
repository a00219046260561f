//! Numerical laboratory for star-shaped hypersurfaces in `R^n` written as
//! radial graphs over the unit sphere.
//!
//! The crate covers the pointwise curvature algebra (elementary symmetric
//! functions, Newton tensors, support function), surface quadrature and the
//! global curvature functionals, the normalized and un-normalized inverse
//! curvature flows, and verification suites that measure convergence orders
//! of the integral identities and the margins of the weighted inequalities.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod integrals;
pub mod numeric;
pub mod verification;

pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowRun, FlowState, RegridPolicy, Speed};
pub use geometry::{
    sample_shape, CurvatureData, Faults, GridMode, GridSpec, PointFrame, Shape, ShapeSpec,
    SurfaceSample,
};
pub use integrals::{FunctionalSet, Inequality, ResidualReport};
