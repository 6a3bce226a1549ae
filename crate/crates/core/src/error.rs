use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("{what}: iteration did not converge (worst residual {residual:e})")]
    NonConvergence { what: &'static str, residual: f64 },
    #[error("backward tree needs {needed} nodes, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("basepoint is {distance:e} from the critical forward orbit (step {step})")]
    UnsafeBasepoint { distance: f64, step: usize },
    #[error("every leaf of the backward tree lies in the excluded region")]
    EmptyTree,
    #[error("point is not a critical preimage of the exceptional set")]
    NotAnExceptionalPreimage,
    #[error("map has empty exceptional set")]
    MapNotExceptional,
    #[error("phase transition bracketing is ambiguous near t = {t}")]
    GridTooCoarse { t: f64 },
    #[error("pressure slope has not stabilized at the {end} end (change {change:.4})")]
    SlopeNotStabilized { end: &'static str, change: f64 },
    #[error("orbit passes within {distance:e} of a critical point at step {step}")]
    OrbitHitsCritical { step: usize, distance: f64 },
    #[error("no admissible samples")]
    EmptySample,
    #[error("p exceeds the hidden pressure by only {gap:.4} (need at least 0.01)")]
    PressureGapTooSmall { gap: f64 },
    #[error("region is not special: {0}")]
    NotSpecial(String),
    #[error("region touches the excluded set: {0}")]
    RegionTouchesExcluded(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("map specification: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by the request rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidMap(_) | Error::InvalidInput(_) | Error::Parse(_) | Error::BudgetExceeded { .. })
    }
}
