use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample index {index} out of range for {len} samples")]
    Index { index: usize, len: usize },

    #[error("non-finite value in {0}")]
    Domain(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Positive loss with a zero denominator: a stationary point above the
    /// target value, where the step-size would be infinite.
    #[error("divergent step: loss {loss:e} with squared gradient norm {grad_norm_sq:e}")]
    DivergentStep { loss: f64, grad_norm_sq: f64 },

    #[error("malformed fixture at line {line}: {msg}")]
    Fixture { line: usize, msg: String },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
