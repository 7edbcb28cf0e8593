use std::fmt;

use fdr::{Error, Infeasibility};

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Io(String),
    Core(Error),
    /// A verification ran to completion and did not pass.
    Failed(String),
}

impl CliError {
    /// 0 success, 1 schema, 2 infeasible, 3 inconclusive or non-converged,
    /// 4 failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Config(_) | Error::InvalidInput(_) | Error::Domain(_) => 1,
                Error::NoFeasibleBeta { .. } | Error::InfeasiblePoint { .. } | Error::Precondition(_) => 2,
                Error::DivergentIntegral
                | Error::NonConvergence { .. }
                | Error::Inconclusive(_)
                | Error::NanIntegrand { .. } => 3,
            },
            CliError::Failed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Core(Error::NoFeasibleBeta {
                lambda,
                reason: Infeasibility::BelowMinimum { lambda_min: Some(l) },
            }) => write!(
                f,
                "no feasible normalization constant at lambda = {lambda}: lambda is below the minimum regularization factor lambda* = {l}"
            ),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
