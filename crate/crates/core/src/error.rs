use thiserror::Error;

/// Errors raised by the algebra, checker and driver layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or algebra membership do not line up.
    #[error("structural error: {0}")]
    Structural(String),
    /// An argument lies outside the domain of the operation (p < 1, non-PSD input, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A declared or required property of the inputs does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Internally computed quantities disagree beyond tolerance.
    #[error("inconsistency: {0}")]
    Inconsistency(String),
    /// Numerical conditioning too poor to give an unambiguous answer.
    #[error("ill-conditioned: {0}")]
    Conditioning(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
