//! Error type shared across the crate.

use std::fmt;

/// Errors produced by constructions, algorithms and the CLI.
#[derive(Debug)]
pub enum Error {
    /// Input vector length does not match the network input dimension.
    ShapeMismatch { expected: usize, got: usize },
    /// Requested network depth is below the minimum the construction supports.
    InvalidDepth { min: usize, got: usize },
    /// The index set of a hat family exceeds its admissible size.
    FamilySize { max: f64, got: usize },
    /// No witness `(L, C1, n0)` exists because `gamma >= gamma_flat`.
    InfeasibleWitness { gamma: f64, gamma_flat: f64 },
    /// The depth-growth function does not admit the required minimum depth.
    DepthInsufficient { required: usize, ell_star: String },
    /// A sampling algorithm evaluated the target more often than its budget.
    BudgetViolation { used: usize, budget: usize },
    /// Growth kind without a closed-form gamma.
    UnsupportedGrowth,
    /// Too few usable points for a rate fit.
    InsufficientData { usable: usize, needed: usize },
    /// An algorithm id that is not in the registry.
    UnknownAlgorithm(String),
    /// Invalid configuration value or malformed config file.
    Config(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { expected, got } => {
                write!(f, "input has dimension {got}, network expects {expected}")
            }
            Error::InvalidDepth { min, got } => {
                write!(f, "construction needs depth >= {min}, got {got}")
            }
            Error::FamilySize { max, got } => {
                write!(f, "index set of size {got} exceeds admissible size {max}")
            }
            Error::InfeasibleWitness { gamma, gamma_flat } => {
                write!(f, "no witness: gamma = {gamma} is not below gamma_flat = {gamma_flat}")
            }
            Error::DepthInsufficient { required, ell_star } => {
                write!(f, "depth growth tops out at {ell_star}, construction needs {required}")
            }
            Error::BudgetViolation { used, budget } => {
                write!(f, "algorithm used {used} samples, budget is {budget}")
            }
            Error::UnsupportedGrowth => write!(f, "growth has no closed-form gamma"),
            Error::InsufficientData { usable, needed } => {
                write!(f, "rate fit needs {needed} usable points, got {usable}")
            }
            Error::UnknownAlgorithm(id) => write!(f, "unknown algorithm id: {id}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
