use std::io;
use std::path::PathBuf;

use multistep_core::Error as CoreError;
use serde::Serialize;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{0}")]
    Usage(String),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                CoreError::InvalidInput(_) => "invalid_input",
                CoreError::NotUnitRoot { .. } => "not_unit_root",
                CoreError::UnstableStationaryPart => "unstable_stationary_part",
                CoreError::NotStationary => "not_stationary",
                CoreError::SingularGamma { .. } => "singular_gamma",
                CoreError::SingularDesign { .. } => "singular_design",
                CoreError::WindowTooShort { .. } => "window_too_short",
                CoreError::InsufficientHistory { .. } => "insufficient_history",
                CoreError::SeriesTooShort { .. } => "series_too_short",
            },
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
        }
    }

    /// One-line JSON object describing the failure.
    pub fn to_json(&self) -> String {
        let record = ErrorRecord {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        };
        serde_json::to_string(&record).expect("error record serializes")
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
