use levitype_core::ErrorClass;
use thiserror::Error;

use crate::expr::ParseError;
use crate::input::FormatError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error in {what}: {source}")]
    Expression {
        what: String,
        #[source]
        source: ParseError,
    },
    #[error("{path}: {source}")]
    Format {
        path: String,
        #[source]
        source: FormatError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] levitype_core::Error),
}

impl CliError {
    /// 0 ok, 1 other, 2 parse, 3 geometry, 4 cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Expression { .. } | CliError::Format { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Geometry => 3,
                ErrorClass::Cap => 4,
                ErrorClass::Other => 1,
            },
        }
    }
}
