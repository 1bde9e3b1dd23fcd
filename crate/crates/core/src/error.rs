use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid box: lower bound {lo} exceeds upper bound {hi}")]
    InvalidBox { lo: f64, hi: f64 },

    #[error("pairwise operator needs an even dimension, got {0}")]
    OddDimension(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("metric is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("root bracket [-{zeta:e}, {zeta:e}] has no sign change after {doublings} doublings")]
    BracketViolation { zeta: f64, doublings: usize },

    #[error("root solver stopped after {iterations} iterations with residual {residual:e}")]
    RootNotConverged { residual: f64, iterations: usize },

    #[error("generalized Jacobian is singular")]
    SingularJacobian,

    #[error("iterate already solves the inclusion")]
    Solved,

    #[error("solver failed at iteration {iteration}: {source}")]
    SolverFailure {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::SolverFailure {
            iteration,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
