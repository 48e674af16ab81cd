//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A critical point is degenerate or two critical values collide: the
    /// covering left the open stratum where the construction is defined.
    #[error("non-simple stratum: {0}")]
    NonSimpleStratum(String),

    /// Critical-point search did not produce the expected count.
    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity is not determined by the tracked coefficients.
    #[error("precision error: {0}")]
    Precision(String),

    /// A linear system is numerically singular (degenerate covering).
    #[error("singular system: {0}")]
    Singular(String),

    /// An integration path runs too close to a pole.
    #[error("pole on path: {0}")]
    PoleOnPath(String),

    /// The requested primary differential is not defined for this covering.
    #[error("incompatible primary differential: {0}")]
    IncompatiblePhi(String),

    #[error("invalid descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
