//! Manifold-spec loading, suite orchestration and report output for the
//! `weakcontact` verifier.

pub mod error;
pub mod output;
pub mod spec;
pub mod suite;

pub use error::{CliError, Result};
pub use output::{emit_report, parse_report, Format};
pub use spec::{load_spec, parse_spec, LoadedSpec};
pub use suite::{run_suite, RunConfig, Suite};
