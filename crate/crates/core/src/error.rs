use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("link is disconnected or has no spectral gap (lambda1 = {lambda1})")]
    DisconnectedLink { lambda1: f64 },

    #[error("requested {requested} modes but only {available} are available")]
    TooManyModes { requested: usize, available: usize },

    #[error("eigensolve did not converge (residual {residual:e})")]
    EigenNotConverged { residual: f64 },

    #[error("mass matrix is singular or not positive (entry {index} = {value:e})")]
    SingularMass { index: usize, value: f64 },

    #[error("pole at psi = 0 under-resolved: first node {first_node:e} too coarse for lambda = {lambda}")]
    UnderResolvedPole { first_node: f64, lambda: f64 },

    #[error("no sign change of the Bessel target found in ({lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("quadratic form is not coercive for mode {mode} (pivot {pivot:e}); rho too large for the potential")]
    CoercivityFailure { mode: usize, pivot: f64 },

    #[error("linear system is singular at row {row}")]
    SingularSystem { row: usize },

    #[error("linear solve residual {residual:e} exceeds tolerance")]
    ResidualTooLarge { residual: f64 },

    #[error("radius {radius} lies outside the grid range [{min}, {max}]")]
    RadiusOutOfRange { radius: f64, min: f64, max: f64 },

    #[error("ball around vertex {center} of radius {radius} is empty")]
    EmptyBall { center: usize, radius: f64 },

    #[error("radii span insufficient for a fit: {0}")]
    InsufficientSpan(String),

    #[error("Morrey hypothesis violated at radius {radius} around vertex {center} (ratio {ratio:.3})")]
    MorreyViolation { center: usize, radius: f64, ratio: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
