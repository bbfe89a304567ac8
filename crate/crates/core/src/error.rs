use thiserror::Error;

/// Errors produced by the exact arithmetic layers.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("mode clash: cannot combine LOCALIZED and TRUNCATED coefficients")]
    ModeClash,
    #[error("not a unit: {0}")]
    NonUnit(String),
    #[error("mismatched point sets")]
    PointMismatch,
    #[error("mismatched coefficient variable count: {0} vs {1}")]
    VarMismatch(usize, usize),
    #[error("pairing matrix is singular")]
    SingularMatrix,
    #[error("valuation {actual} below requested window start {requested}")]
    ValuationBelowWindow { actual: i64, requested: i64 },
    #[error("jacobian of the coordinate change is not exactly invertible")]
    NonInvertibleJacobian,
    #[error("substituted denominator does not factor over the marked points")]
    DenominatorNotFactorable,
    #[error("continuity certificate exceeded: {0}")]
    WindowExceeded(String),
    #[error("field carries no quasi-conformal weight data")]
    MissingWeightData,
    #[error("restriction collapses a localized denominator (a_{0} - a_{1})")]
    CollapsedDenominator(usize, usize),
    #[error("expansion order {0} too small: {1}")]
    OrderTooSmall(u32, String),
    #[error("levels or truncations do not match")]
    LevelMismatch,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
