use atorus_core::GeomError;
use thiserror::Error;

use crate::spec::SpecError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Spec(#[from] SpecError),

    #[error("geometry error: {0}")]
    Geometry(#[from] GeomError),

    #[error("cannot write `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Geometry(_) => EXIT_CHECK_FAILED,
            RunError::Usage(_) | RunError::Spec(_) | RunError::Io { .. } => EXIT_USAGE,
        }
    }
}
