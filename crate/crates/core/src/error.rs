//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by scheme assembly and the run drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A scheme configuration combines options that are not supported
    /// together (e.g. the PP fallback limiter in one dimension).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The ghost layer is too narrow for the stencils a scheme needs.
    #[error("ghost width {have} is insufficient (need at least {need})")]
    InsufficientGhosts { have: usize, need: usize },

    /// The solution left the finite range; reports the step at which the
    /// first non-finite value appeared.
    #[error("non-finite state encountered at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    /// Diagnostics were requested on data that cannot support them.
    #[error("diagnostics error: {0}")]
    Diagnostics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
