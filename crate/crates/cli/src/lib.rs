//! Command-line front end for the curvature-flow lab: configuration files,
//! suite and flow runs, and report bundles.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{flow, sweep, verify, Mode, Outcome};
pub use config::{ConfigError, RunConfig};
