//! Pointwise differential geometry of radial graphs over `S^{n-1}`.

pub mod curvature;
pub mod divergence;
pub mod frame;
pub mod grid;
pub mod sample;
pub mod shape;

pub use curvature::{newton_tensors, normalize, sigma_all, CurvatureData};
pub use divergence::{check_divergence_identity, DivergenceResidual};
pub use frame::{all_frames, point_frame, radial_node, PointFrame, RadialNode};
pub use grid::{GridMode, GridSpec};
pub use sample::{sample_shape, Faults, SurfaceSample};
pub use shape::{Shape, ShapeSpec};
