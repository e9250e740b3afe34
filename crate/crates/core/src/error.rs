use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: value {value:e}, estimated error {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("map is not completely positive: Choi eigenvalue {min_eigenvalue:e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("infinite information: outcome {outcome} has zero probability but nonzero derivative")]
    InfiniteInformation { outcome: usize },

    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("objective is not finite anywhere on the search interval")]
    NoOptimum,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
