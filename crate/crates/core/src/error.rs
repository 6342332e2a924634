use alloc::string::String;

use crate::labels::Label;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no edges and declares no nodes")]
    EmptyInput,

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("degree mode {mode} does not apply to a {} graph", if *.directed { "directed" } else { "undirected" })]
    DegreeModeMismatch { mode: &'static str, directed: bool },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("switching mechanism is degenerate (s_n^2 = 0): every p_i is 0 or 1")]
    DegenerateSwitching,

    #[error("class {0} is empty under the intended labels")]
    EmptyClass(Label),

    #[error("Bernoulli variance is zero (mu must lie strictly inside (0, 1))")]
    DegenerateVariance,

    #[error("sweep grid is empty")]
    EmptyGrid,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
