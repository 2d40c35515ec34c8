use thiserror::Error;

/// Library error. Every variant carries a stable machine code and the module
/// it originates from, so the CLI and the C ABI can report them uniformly.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("series precision mismatch: {left} vs {right} bits")]
    PrecisionMismatch { left: u32, right: u32 },

    #[error("series has a nonzero constant term ({context})")]
    NonzeroConstant { context: &'static str },

    #[error("value is not real-valued: asymmetry {residue:e} ({context})")]
    NotReal { context: &'static str, residue: f64 },

    #[error("invalid precision: {bits} bits (minimum 64)")]
    InvalidPrecision { bits: u32 },

    #[error("invalid rotation number: {0}")]
    InvalidOmega(String),

    #[error("rotation number is rational: {0}")]
    RationalOmega(String),

    #[error("invalid map parameter: {0}")]
    InvalidMap(String),

    #[error("exact resonance at degree {degree}: |lambda^{exponent} - 1| = {divisor:e}")]
    ExactResonance { degree: usize, exponent: i64, divisor: f64 },

    #[error("gauge not applicable: {0}")]
    InvalidGauge(String),

    #[error("transform precondition failed: {0}")]
    Transform(String),

    #[error("dynamics precondition failed: {0}")]
    Dynamics(String),

    #[error("point escapes the validity radius: |z| = {radius} > {limit}")]
    Escape { radius: f64, limit: f64 },

    #[error("circle map lift is not increasing near theta = {theta}")]
    NonMonotoneLift { theta: f64 },

    #[error("diagnostics precondition failed: {0}")]
    Diagnostics(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::OrderMismatch { .. }
            | Error::PrecisionMismatch { .. }
            | Error::NonzeroConstant { .. }
            | Error::NotReal { .. }
            | Error::InvalidPrecision { .. } => "series",
            Error::InvalidOmega(_) | Error::RationalOmega(_) | Error::InvalidMap(_) => "maps",
            Error::ExactResonance { .. } | Error::InvalidGauge(_) => "normalizer",
            Error::Transform(_) => "transforms",
            Error::Dynamics(_) | Error::Escape { .. } | Error::NonMonotoneLift { .. } => "dynamics",
            Error::Diagnostics(_) => "diagnostics",
            Error::Config(_) | Error::Parse(_) | Error::Io(_) => "cli",
        }
    }

    /// Stable module-qualified code, e.g. `normalizer.exact_resonance`.
    pub fn code(&self) -> String {
        let tail = match self {
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::PrecisionMismatch { .. } => "precision_mismatch",
            Error::NonzeroConstant { .. } => "nonzero_constant",
            Error::NotReal { .. } => "not_real",
            Error::InvalidPrecision { .. } => "invalid_precision",
            Error::InvalidOmega(_) => "invalid_omega",
            Error::RationalOmega(_) => "rational_omega",
            Error::InvalidMap(_) => "invalid_map",
            Error::ExactResonance { .. } => "exact_resonance",
            Error::InvalidGauge(_) => "invalid_gauge",
            Error::Transform(_) => "precondition",
            Error::Dynamics(_) => "precondition",
            Error::Escape { .. } => "escape",
            Error::NonMonotoneLift { .. } => "non_monotone_lift",
            Error::Diagnostics(_) => "precondition",
            Error::Config(_) => "config",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        };
        format!("{}.{}", self.module(), tail)
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
