//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation received an input it is mathematically undefined for,
    /// e.g. a zero-norm vector in a cosine similarity.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A dataset file is malformed. Names the offending field.
    #[error("format error in {path}: {what}")]
    Format { path: String, what: String },

    /// Experiment configuration is invalid. Names the offending key.
    #[error("config error: {0}")]
    Config(String),

    /// No positive transmission power can satisfy the energy budget at the
    /// given path loss (the rate-per-watt supremum is below the required
    /// payload-per-joule).
    #[error("infeasible energy budget for user {user}: loss {loss:.3e} admits at most {limit:.3e} bit/J, need {required:.3e}")]
    InfeasibleEnergy {
        user: usize,
        loss: f64,
        limit: f64,
        required: f64,
    },

    /// The requested rate is at or above the supremum achievable with the
    /// given power over any bandwidth.
    #[error("unreachable rate: target {target:.3e} bit/s >= supremum {supremum:.3e} bit/s")]
    UnreachableRate { target: f64, supremum: f64 },

    /// The scenario cannot be satisfied with the given bandwidth budget.
    #[error("infeasible scenario: {0}")]
    Infeasible(String),

    /// Exhaustive search was asked for more users than it can afford.
    #[error("too many users for exhaustive search: {got} (max {max})")]
    TooManyUsers { got: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 infeasible, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Format { .. } | Error::Io(_) => 3,
            Error::InfeasibleEnergy { .. }
            | Error::UnreachableRate { .. }
            | Error::Infeasible(_) => 4,
            _ => 1,
        }
    }
}
