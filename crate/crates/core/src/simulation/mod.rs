//! Simulation experiments: data-generating processes, the linear Granger
//! baseline and a seeded Monte Carlo harness.

mod dgp;
mod granger;
mod harness;
pub mod presets;

pub use dgp::{generate, rank_loading, DgpKind, DgpSpec, Roles, CONFOUNDER_RHO};
pub use granger::granger_f_test;
pub use harness::{run_mc, EdgeDiagnostics, McCell, McResult, PipelineConfig};
