use thiserror::Error;

/// Errors raised by the selection library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric input was NaN or infinite.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An argument violated a precondition (zero vector, length mismatch, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Exhaustive enumeration would exceed the configured work budget.
    #[error("budget exceeded: estimated work {estimated:.3e} > budget {budget:.3e}")]
    Budget { estimated: f64, budget: f64 },

    /// The threshold table has no row for the requested user count.
    #[error("threshold table has no entry for L = {users}")]
    TableMiss { users: usize },

    /// The threshold table was built for a different ring.
    #[error("threshold table ring mismatch: table is {table}, requested {requested}")]
    RingMismatch { table: String, requested: String },

    /// Malformed threshold-table text.
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A condition that valid inputs never reach.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
