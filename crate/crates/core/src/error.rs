//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or layer shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A value is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index (class label, sample id) is out of range.
    #[error("index out of range: {0}")]
    Index(String),

    /// The dataset violates a structural precondition.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// A synthetic-data spec violates its invariants.
    #[error("invalid spec: {0}")]
    Spec(String),

    /// A training config value is missing or out of range.
    #[error("invalid config: {0}")]
    Config(String),

    /// A text input (CSV, config file) failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A forward trace does not belong to the given parameters.
    #[error("trace/params mismatch: {0}")]
    Consistency(String),

    /// Training hit a non-finite loss.
    #[error("training diverged at step {step}: non-finite loss")]
    Diverged { step: usize },

    /// Input too degenerate to process (e.g. all points identical).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Model checkpoint could not be read or written.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
