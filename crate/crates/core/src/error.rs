use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alphabet size {0} (need p >= 2)")]
    Alphabet(usize),

    #[error("symbol {symbol} out of range for alphabet of size {p}")]
    Symbol { symbol: u8, p: usize },

    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),

    #[error("word extent {have} too small, need {need}")]
    Extent { have: usize, need: usize },

    #[error("asymmetric window: left extent {left} != right extent {right}")]
    Asymmetric { left: usize, right: usize },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },

    #[error("no closed-form entropy for {0}; use smb_estimate")]
    NoClosedForm(&'static str),

    #[error("point outside support: zero measure at level {level}")]
    OutsideSupport { level: usize },

    #[error("degenerate window: {0}")]
    Degenerate(String),

    #[error("model file, line {line}, field `{field}`: {reason}")]
    Parse { line: usize, field: String, reason: String },

    #[error("empty good set: {0}")]
    EmptyGamma(String),

    #[error("inequality violated: {0}")]
    Violation(String),

    #[error("wrong-sign exponents: lambda_u = {lambda_u}, lambda_s = {lambda_s}")]
    ExponentSign { lambda_u: f64, lambda_s: f64 },

    #[error("degenerate differential at step {0}")]
    DegenerateDifferential(usize),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Param { field, reason: reason.into() }
    }
}
