use thiserror::Error;

/// Errors raised anywhere in the evaluation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("domain error in `{node}`: operand value {value}")]
    Domain { node: String, value: f64 },

    #[error("regularity failure at (r={r}, s={s}): {condition} = {value}")]
    Regularity {
        r: f64,
        s: f64,
        condition: &'static str,
        value: f64,
    },

    #[error("quadrature did not converge at r={r}: {detail}")]
    Quadrature { r: f64, detail: String },

    #[error("derivative cross-check failed at r={r}: under-integral {primary} vs finite difference {check}")]
    CrossCheck { r: f64, primary: f64, check: f64 },

    #[error("admissibility violated at r={r}: {detail}")]
    Admissibility { r: f64, detail: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("trajectory left the metric domain at t={t} (|x|={r})")]
    DomainExit { t: f64, r: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn domain(node: impl Into<String>, value: f64) -> Self {
        Error::Domain {
            node: node.into(),
            value,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
