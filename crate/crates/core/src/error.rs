use thiserror::Error;

/// Errors raised while validating model parameters or simulation settings.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("M must be at least 1")]
    NoChannels,
    #[error("k must be at least 1")]
    NoPrimaryUsers,
    #[error("rate {name} must be strictly positive and finite (got {value})")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("m must be at least 1")]
    MaxWidthZero,
    #[error("n must be at least 1")]
    MinWidthZero,
    #[error("n greater than m ({n} > {m})")]
    WidthOrder { n: usize, m: usize },
    #[error("M1 negative")]
    Su1PoolNegative,
    #[error("M2 negative")]
    Su2PoolNegative,
    #[error("malformed parameter document: {0}")]
    Malformed(String),
}

/// Errors from the stationary solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("singular matrix: generator is reducible or ill-conditioned")]
    SingularMatrix,
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("solution has negative mass {0:e} beyond clamping threshold")]
    NegativeMass(f64),
    #[error("empty generator")]
    Empty,
}

/// Errors from the discrete-event simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    ConfigInvalid(String),
    #[error("simulator and generator disagree at state {state}: {detail}")]
    CrossCheck { state: String, detail: String },
}

/// Top-level error used by the sweep driver and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{context}: {source}")]
    Solve {
        context: String,
        #[source]
        source: SolveError,
    },
    #[error(transparent)]
    Build(#[from] crate::generator::BuildError),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("sweep point {point}: {source}")]
    AtPoint {
        point: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        if let Error::AtPoint { source, .. } = self {
            return source.is_numerical();
        }
        matches!(self, Error::Solve { .. } | Error::Build(_))
            || matches!(self, Error::Sim(SimError::CrossCheck { .. }))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
