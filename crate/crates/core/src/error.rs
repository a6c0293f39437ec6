use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes. `is_numeric` separates non-convergence from bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("c2 and s share a zero near n = {n}: {detail}")]
    CommonZero { n: usize, detail: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("incomplete spectrum: {0}")]
    IncompleteSpectrum(String),
    #[error("zero search failed in interval I_{n}: {detail}")]
    Search { n: usize, detail: String },
    #[error("ill-conditioned Gram system (condition estimate {cond:.3e})")]
    Conditioning { cond: f64 },
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),
    #[error("representation failure: {0}")]
    Representation(String),
    #[error("resolution too coarse: {0}")]
    Resolution(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for numeric non-convergence, false for invalid input or usage.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::IncompleteSpectrum(_)
                | Error::Search { .. }
                | Error::Conditioning { .. }
                | Error::Reconstruction(_)
                | Error::Resolution(_)
        )
    }
}
