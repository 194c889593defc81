use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no sign change of the target function on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("no Poincaré inequality detected: {0}")]
    Divergence(String),

    #[error("method not applicable: {0}")]
    NotApplicable(String),

    #[error("first-zero root {exact} and finite-element value {fem} disagree (relative gap {relative:.3e})")]
    CrossValidation { exact: f64, fem: f64, relative: f64 },

    #[error("resource limit reached: {0}")]
    Resource(String),

    #[error("exhaustion sequence did not stabilise: {0}")]
    Convergence(String),

    #[error("model evaluation failed at sample {index}: {message}")]
    Model { index: usize, message: String },
}

impl Error {
    /// Stable short name, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Argument(_) => "argument",
            Error::Precondition(_) => "precondition",
            Error::Numerical(_) => "numerical",
            Error::NoRoot { .. } => "no_root",
            Error::Divergence(_) => "divergence",
            Error::NotApplicable(_) => "not_applicable",
            Error::CrossValidation { .. } => "cross_validation",
            Error::Resource(_) => "resource",
            Error::Convergence(_) => "convergence",
            Error::Model { .. } => "model",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
