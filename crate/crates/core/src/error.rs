use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes across the library.
///
/// [`Error::category`] groups them for callers that need a coarse split
/// (the CLI maps categories to exit codes).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("every coefficient is zero")]
    AllZero,
    #[error("no nonzero coefficient in tail window [{lo}, {hi}]")]
    WindowEmpty { lo: usize, hi: usize },
    #[error("order must be positive, got {0}")]
    NonpositiveOrder(f64),
    #[error("evaluator returned a non-finite value at radius {radius}")]
    NonFinite { radius: f64 },
    #[error("exponent {exponent} exceeds cap {cap}")]
    Overflow { exponent: f64, cap: f64 },
    #[error("grids differ")]
    GridMismatch,
    #[error("signal has not decayed at the window ends (endpoint magnitude {endpoint})")]
    WindowTooShort { endpoint: f64 },
    #[error("warp is constant")]
    ConstantWarp,
    #[error("empty multiplier support [{r}, {s}]")]
    EmptySupport { r: f64, s: f64 },
    #[error("warp is not a polynomial")]
    NotPolynomial,
    #[error("leading coefficient is zero")]
    DegenerateLeading,
    #[error("factorization failed (min eigenvalue estimate {min_eigenvalue})")]
    FactorizationFailure { min_eigenvalue: f64 },
    #[error("coefficient nodes do not match the Gram nodes")]
    NodeMismatch,
    #[error("theorem hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("inputs are indistinguishable (distance {distance})")]
    IndistinguishableInputs { distance: f64 },
    #[error("structure function vanishes on the probe grid near t = {t}")]
    StructureZeroOnGrid { t: f64 },
    #[error("partial integrals keep growing (doubling ratios {ratios:?})")]
    Diverging { ratios: Vec<f64> },
    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("warp is not monotone on the real line")]
    NonMonotoneWarp,
    #[error("structure function rejected: {0}")]
    InvalidStructure(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            NonFinite { .. }
            | Overflow { .. }
            | WindowTooShort { .. }
            | FactorizationFailure { .. }
            | Diverging { .. } => ErrorCategory::Numerical,
            Io(_) => ErrorCategory::Io,
            _ => ErrorCategory::Validation,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
