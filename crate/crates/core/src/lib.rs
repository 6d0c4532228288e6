//! Chart-based differential geometry for principal torus bundles over
//! products of almost Hodge manifolds.
//!
//! The crate computes curvature from metric components with exact jets and
//! checks the Killing-tensor identities that make the total space of such
//! a bundle carry a cyclic-parallel Ricci tensor.

pub mod bundle;
pub mod chart;
pub mod error;
pub mod exterior;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod killing;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod zoo;

pub use bundle::{build_total_chart, BundleSpec, FactorSpec, TotalChart};
pub use chart::{Chart, ProductChart, Tier};
pub use error::{GeomError, Result};
pub use expr::Expr;
pub use field::{ComponentField, FieldRef, TensorField};
pub use jet::Jet;
pub use killing::{classify, Classification, Label, PChoice};
pub use report::ResidualReport;
pub use sampling::{sample_points, Executor};
