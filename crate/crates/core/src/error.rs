use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PinError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate renewal law: total mass is zero")]
    DegenerateLaw,

    #[error("site {n} is not reachable by the renewal law (pinned boundary cannot be enforced)")]
    Boundary { n: usize },

    #[error("problem size {size} exceeds budget {limit}: {what}")]
    Size {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("renewal inversion produced a negative mass {value:e} at n = {n}")]
    NegativeMass { n: usize, value: f64 },

    #[error("unreliable estimate: a single sample carries {share:.3} of the total weight")]
    Unreliable { share: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, PinError>;
