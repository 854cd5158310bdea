use thiserror::Error;

/// Errors raised by the reduction toolkit.
#[derive(Debug, Error)]
pub enum MorError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("system is not asymptotically stable (spectral abscissa {abscissa:e})")]
    NotStable { abscissa: f64 },

    #[error("spectra of the Sylvester coefficients overlap")]
    SpectraOverlap,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("real Schur decomposition did not converge")]
    SchurFailure,

    #[error("state is not in the span of the initial-condition basis (relative residual {residual:e})")]
    NotInSubspace { residual: f64 },

    #[error("initial-condition basis is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("Gramian factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("IRKA reduced model is unstable after pole reflection")]
    UnstableIterate,

    #[error("reduced model lacks data required by {0}")]
    MissingProvenance(&'static str),

    #[error("simulation traces are on different grids")]
    GridMismatch,

    #[error("reference trace norm is below 1e-300")]
    DegenerateReference,

    #[error("{branch} branch: {source}")]
    Branch {
        branch: &'static str,
        #[source]
        source: Box<MorError>,
    },
}

impl MorError {
    pub(crate) fn in_branch(self, branch: &'static str) -> Self {
        MorError::Branch {
            branch,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, MorError>;

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Balancing transform condition number exceeded 1e8.
    IllConditionedBalancing { cond: f64 },
    /// A trace that is nonnegative in exact arithmetic came out negative and was clamped.
    NegativeTrace { value: f64 },
    /// IRKA stopped at the iteration cap; the best iterate was returned.
    MaxItersExceeded { iterations: usize, shift_change: f64 },
    /// IRKA needed pole reflection to return a stable model.
    PolesReflected { count: usize },
    /// Step size was split into substeps for accuracy.
    StepTooLarge { substeps: usize },
    /// Trace did not decay over the horizon; L2 norm misses the tail.
    Tail { ratio: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::IllConditionedBalancing { cond } => {
                write!(f, "balancing transform is ill-conditioned (cond {cond:.3e})")
            }
            Warning::NegativeTrace { value } => {
                write!(f, "negative trace {value:.3e} clamped to zero")
            }
            Warning::MaxItersExceeded {
                iterations,
                shift_change,
            } => write!(
                f,
                "IRKA did not converge in {iterations} iterations (last shift change {shift_change:.3e})"
            ),
            Warning::PolesReflected { count } => {
                write!(f, "{count} unstable IRKA poles reflected")
            }
            Warning::StepTooLarge { substeps } => {
                write!(f, "time step split into {substeps} substeps")
            }
            Warning::Tail { ratio } => {
                write!(f, "trace has not decayed at the horizon (last/peak {ratio:.3e})")
            }
        }
    }
}
