use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum TomoError {
    /// A point or parameter lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid solver or run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Input data failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// The metric looks non-simple (trapped ray, non-monotone fan, conjugate points).
    #[error("non-simple metric suspected: {0}")]
    NonSimpleSuspected(String),

    /// The two-point problem failed for a specific pair of table nodes.
    #[error("boundary value problem failed for pair ({i}, {j}): {reason}")]
    Solver { i: usize, j: usize, reason: String },

    /// Rejection sampling of the truncated prior gave up.
    #[error("prior truncation infeasible: accepted {accepted} of {attempts} draws (c3 rejections {c3_rejections}, certificate rejections {cert_rejections})")]
    PriorTruncationInfeasible {
        accepted: usize,
        attempts: usize,
        c3_rejections: usize,
        cert_rejections: usize,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, TomoError>;
