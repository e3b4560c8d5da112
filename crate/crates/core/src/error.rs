//! Crate-wide error type.

use std::fmt;
use std::path::PathBuf;

/// Errors produced by the detection chain and the simulation harness.
#[derive(Debug)]
pub enum Error {
    /// An argument violated a precondition (dimension mismatch, bad range, ...).
    InvalidInput(String),
    /// Cholesky factorization hit a non-positive pivot at the given index.
    NotPositiveDefinite(usize),
    /// A diagonal entry required to be nonzero was zero (or not representable).
    SingularDiagonal(usize),
    /// Brute-force ML was requested beyond its `order^K <= 2^20` guardrail.
    MlScaleGuardrail { order: usize, users: usize },
    /// A numerical sanity check failed at runtime (with the offending seed when known).
    Numerical { what: String, seed: Option<u64> },
    /// Configuration file could not be parsed or failed validation.
    Config(String),
    /// I/O failure, reported with the path involved.
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NotPositiveDefinite(i) => {
                write!(f, "matrix is not positive definite (pivot {i})")
            }
            Error::SingularDiagonal(i) => write!(f, "singular diagonal entry at index {i}"),
            Error::MlScaleGuardrail { order, users } => write!(
                f,
                "ML brute force refused: {order}^{users} candidates exceeds the 2^20 guardrail"
            ),
            Error::Numerical { what, seed } => match seed {
                Some(s) => write!(f, "numerical error: {what} (seed {s})"),
                None => write!(f, "numerical error: {what}"),
            },
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
