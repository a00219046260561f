//! Convergence studies, inequality margins and flow checks, reported as
//! machine-readable verdicts.

pub mod fixtures;
mod flows;
pub mod order;
mod suite;

pub use flows::run_flow_suite;
pub use order::{fit_grid_order, richardson_order, OrderFit};
pub use suite::{
    run_identity_suite, run_inequality_suite, shape_label, FlowSuiteSettings, ResidualRow, Status, SuiteConfig,
    SuiteReport, TolerancePolicy, Verdict,
};
