use thiserror::Error;

/// Errors produced by the solvers, integrators and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition of the call was violated (mismatched lengths, invalid parameters).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A computation produced a non-finite value.
    #[error("non-finite value in {context} (mode/index {index})")]
    NonFinite { context: &'static str, index: usize },

    /// The stabilizing factor is undefined for the current iterate.
    #[error("degenerate iterate: {0}")]
    DegenerateIterate(String),

    /// The extrapolation coefficients cannot be normalized.
    #[error("degenerate extrapolation cycle: coefficient sum is zero")]
    DegenerateCycle,

    /// The implicit stage solve did not converge.
    #[error("implicit stage did not converge after {iterations} iterations (last increment {increment:.3e}); reduce dt")]
    InnerSolve { iterations: usize, increment: f64 },

    /// The peak of a field is not unique.
    #[error("non-unique maximum: {0}")]
    NonUniqueMaximum(String),

    /// The normal equations of a fit are singular.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
