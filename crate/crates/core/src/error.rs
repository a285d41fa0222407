use thiserror::Error;

/// Errors raised by the map and cone machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosmapError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("index {index} out of range for {context}")]
    Index { index: String, context: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported dimensions {m}x{n}: {reason}")]
    UnsupportedDimension { m: usize, n: usize, reason: String },
}

impl PosmapError {
    pub(crate) fn shapes(expected: (usize, usize), found: (usize, usize)) -> Self {
        PosmapError::Dimension {
            expected: format!("{}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        }
    }
}

pub type Result<T> = std::result::Result<T, PosmapError>;
