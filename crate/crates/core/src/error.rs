use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("support index {index} out of range for {n} atoms")]
    InvalidSupport { index: usize, n: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),

    #[error("invalid sensing matrix: {0}")]
    InvalidSensingMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("brute-force enumeration infeasible: {candidates} candidate supports exceed cap {cap}")]
    InfeasibleBruteforce { candidates: u128, cap: u64 },

    #[error("theory not applicable: {0}")]
    RegimeViolation(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("selector failed at iteration {iteration}: {source}")]
    Selector {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips iteration context added by the solver.
    pub fn root(&self) -> &Error {
        match self {
            Error::Selector { source, .. } => source.root(),
            other => other,
        }
    }
}
