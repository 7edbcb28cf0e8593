use std::fmt;

/// Why no normalization constant exists at a given regularization factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    /// The multiplier set is empty: no `t` keeps the posterior density
    /// positive over the whole support.
    EmptyInterval,
    /// The multiplier set is nonempty but the constraint integral never
    /// reaches one on it. `lambda_min` is the smallest admissible factor
    /// when it could be computed.
    BelowMinimum { lambda_min: Option<f64> },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::EmptyInterval => write!(f, "feasible multiplier interval is empty"),
            Infeasibility::BelowMinimum {
                lambda_min: Some(l),
            } => write!(
                f,
                "constraint integral stays below one; minimum regularization factor is {l}"
            ),
            Infeasibility::BelowMinimum { lambda_min: None } => {
                write!(f, "constraint integral never reaches one on the feasible interval")
            }
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible point at support index {index}: argument {argument} lies outside ({lo}, {hi})")]
    InfeasiblePoint {
        index: usize,
        argument: f64,
        lo: f64,
        hi: f64,
    },

    #[error("integrand is NaN at support index {index}")]
    NanIntegrand { index: usize },

    #[error("no feasible normalization constant at lambda = {lambda}: {reason}")]
    NoFeasibleBeta { lambda: f64, reason: Infeasibility },

    #[error("constraint integral diverges at every probe")]
    DivergentIntegral,

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
