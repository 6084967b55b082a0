use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite Hamiltonian value at y={y:?}, p={p:?}")]
    NonFinite { y: Vec<f64>, p: Vec<f64> },

    #[error("supremum attained on the boundary of the search box (radius {radius}); enlarge it")]
    BoundaryAttained { radius: f64 },

    #[error("model is flagged convex but fails midpoint convexity at y={y:?}")]
    ConvexityFlag { y: Vec<f64> },

    #[error("CFL violation: dt={dt} exceeds the stable bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("NaN encountered at time step {step}")]
    NotANumber { step: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("target outside the allocated window: {0}")]
    WindowOverflow(String),

    #[error("target unreachable in the allotted time")]
    Unreachable,

    #[error("map is not odd: |f(x)+f(-x)| = {defect}")]
    NotOdd { defect: f64 },

    #[error("zero finder failed; best residual {best_residual:e}")]
    ZeroNotFound { best_residual: f64 },

    #[error("connector speed {speed} exceeds the Lagrangian range {limit}")]
    SpeedRange { speed: f64, limit: f64 },

    #[error("round {round} does not follow the trace-back strategy: {reason}")]
    StrategyPattern { round: usize, reason: String },

    #[error("effective table has non-converged entries; refusing to use it")]
    FlaggedTable,

    #[error("minimizer on the search boundary (radius {radius})")]
    SearchBoundary { radius: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
