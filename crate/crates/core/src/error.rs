use thiserror::Error;

/// Unified error type for the pricing library. Variants map onto the CLI
/// exit codes: Parameter/Domain/Parse -> 1, Feasibility -> 2, Resource -> 3,
/// Accuracy -> 4.
#[derive(Debug, Error)]
pub enum PricerError {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("feasibility error: {0}")]
    Feasibility(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),
}

impl PricerError {
    /// Stable CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            PricerError::Parameter(_) | PricerError::Domain(_) | PricerError::Parse(_) => 1,
            PricerError::Feasibility(_) => 2,
            PricerError::Resource(_) => 3,
            PricerError::Accuracy(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, PricerError>;
