use alloc::string::String;

/// Errors produced by model validation, estimation and selection.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("levels polynomial has no unit root: A(1) = {value:e} exceeds tolerance {tol:e}")]
    NotUnitRoot { value: f64, tol: f64 },

    #[error("stationary part of the model has a root on or inside the unit circle")]
    UnstableStationaryPart,

    #[error("autoregression is not stationary: characteristic polynomial has a root on or inside the unit circle")]
    NotStationary,

    #[error("autocovariance matrix of dimension {dim} is not positive definite")]
    SingularGamma { dim: usize },

    #[error(
        "singular design for order {order} over regressor rows {first_row}..={last_row} (reciprocal condition {rcond:e})"
    )]
    SingularDesign {
        order: usize,
        first_row: usize,
        last_row: usize,
        rcond: f64,
    },

    #[error("residual window too short: need {needed} observations, have {available}")]
    WindowTooShort { needed: usize, available: usize },

    #[error("forecast origin {origin} has fewer than {order} observations of history")]
    InsufficientHistory { origin: usize, order: usize },

    #[error("series of length {n} is too short: {reason}")]
    SeriesTooShort { n: usize, reason: String },
}

impl Error {
    /// `true` for failures caused by the numbers themselves (singular systems)
    /// rather than by malformed requests.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularGamma { .. } | Error::SingularDesign { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
