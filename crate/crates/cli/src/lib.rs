//! Suite runner for the atorus geometry engine: target resolution, bundle
//! spec files, and versioned run reports.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod spec;

pub use config::{Format, Suite, SuiteConfig, TierArg};
pub use error::{RunError, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
pub use report::RunReport;
pub use run::run;
pub use spec::{parse_spec, parse_spec_str, SpecError};
