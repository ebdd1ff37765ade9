use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("compositions of different integers: {0} and {1}")]
    MismatchedDegree(usize, usize),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("polynomial is not hyperbolic: root with imaginary part {imag:e} exceeds tolerance {tol:e}")]
    NotHyperbolic { imag: f64, tol: f64 },

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("invalid number of fixed coefficients s={s} for degree {d}")]
    InvalidS { s: usize, d: usize },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("no interior point found for composition {0}")]
    NoInteriorPoint(String),

    #[error("continuation stalled: {0}")]
    ContinuationStalled(String),

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("inconsistent occurrence table: {0}")]
    InconsistentTable(String),

    #[error("cost guard: {0}")]
    CostGuard(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MismatchedDegree(..) => "MismatchedDegree",
            Error::InvalidRange(_) => "InvalidRange",
            Error::InvalidComposition(_) => "InvalidComposition",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InvalidPolynomial(_) => "InvalidPolynomial",
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::IllConditioned(_) => "IllConditioned",
            Error::InvalidS { .. } => "InvalidS",
            Error::InternalInconsistency(_) => "InternalInconsistency",
            Error::NoInteriorPoint(_) => "NoInteriorPoint",
            Error::ContinuationStalled(_) => "ContinuationStalled",
            Error::Indeterminate(_) => "Indeterminate",
            Error::EmptyGrid => "EmptyGrid",
            Error::HypothesisViolation(_) => "HypothesisViolation",
            Error::InconsistentTable(_) => "InconsistentTable",
            Error::CostGuard(_) => "CostGuard",
        }
    }
}

impl Error {
    /// Prefixes the message of string-carrying variants with `ctx`.
    pub fn context(self, ctx: &str) -> Error {
        let pre = |m: String| format!("{ctx}: {m}");
        match self {
            Error::InvalidRange(m) => Error::InvalidRange(pre(m)),
            Error::InvalidComposition(m) => Error::InvalidComposition(pre(m)),
            Error::InvalidPolynomial(m) => Error::InvalidPolynomial(pre(m)),
            Error::IllConditioned(m) => Error::IllConditioned(pre(m)),
            Error::InternalInconsistency(m) => Error::InternalInconsistency(pre(m)),
            Error::NoInteriorPoint(m) => Error::NoInteriorPoint(pre(m)),
            Error::ContinuationStalled(m) => Error::ContinuationStalled(pre(m)),
            Error::Indeterminate(m) => Error::Indeterminate(pre(m)),
            Error::HypothesisViolation(m) => Error::HypothesisViolation(pre(m)),
            Error::InconsistentTable(m) => Error::InconsistentTable(pre(m)),
            Error::CostGuard(m) => Error::CostGuard(pre(m)),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
