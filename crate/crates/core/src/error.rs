use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HmtError {
    #[error("parameter `{name}` out of domain: {value} ({reason})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("sampling grid does not cover {what}: {detail}")]
    Coverage { what: &'static str, detail: String },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HmtError>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(HmtError::ParameterDomain {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
