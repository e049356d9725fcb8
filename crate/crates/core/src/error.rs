use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the structure calculus and the realization numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("invalid pivot structure: {0}")]
    InvalidStructure(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("inadmissible structure: {0}")]
    Inadmissible(String),

    #[error("invalid Young diagram: {0}")]
    InvalidDiagram(String),

    #[error("Schur vector {index} has norm {norm}, must be < 1")]
    SchurNorm { index: usize, norm: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unstable state matrix: spectral radius {radius}")]
    Unstable { radius: f64 },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// The system does not lie in the requested chart. `entry` carries the
    /// first offending (row, column, value) when the failure is a Hessenberg
    /// positivity violation (0-based indices).
    #[error("chart mismatch: {detail}")]
    ChartMismatch {
        detail: String,
        entry: Option<(usize, usize, f64)>,
    },
}
