use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the admissible range of its family.
    #[error("parameter out of range: {0}")]
    Domain(String),
    /// Evaluation requested on a boundary where the quantity is undefined.
    #[error("boundary evaluation: {0}")]
    Boundary(String),
    /// Operation not defined for this copula family.
    #[error("unsupported for this family: {0}")]
    Unsupported(String),
    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Multiplier weights sum to zero.
    #[error("degenerate multiplier weights (all zero)")]
    DegenerateWeights,
    /// Iterative solver hit its iteration cap before reaching tolerance.
    #[error("optimizer failed to converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    /// Malformed input data.
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
