use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The denominator `x_1 + ... + x_n + a` (or a division node of a generic
    /// map) fell below the singular-point threshold.
    #[error("singular point: denominator magnitude {denominator:e} is below {threshold:e}")]
    SingularPoint { denominator: f64, threshold: f64 },

    /// Some first partial has an identically zero numerator, so the equation
    /// cannot be solved for the listed variables.
    #[error("not a quasigroup: F is not locally solvable in x{}", join_indices(.indices))]
    NotAQuasigroup { indices: Vec<usize> },

    #[error("invalid reducibility structure: {0}")]
    InvalidStructure(String),

    #[error("indices {indices:?} do not form a reducible block")]
    NotReducibleBlock { indices: Vec<usize> },

    #[error("no roots found on level {alpha} after {attempts} attempts")]
    NoRootsFound { alpha: f64, attempts: usize },

    #[error("polynomial degree {degree} exceeds the configured maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    /// Malformed input; `field` names the offending location.
    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Io(String),
}

fn join_indices(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", x")
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
