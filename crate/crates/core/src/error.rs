use std::path::PathBuf;

/// Errors produced by the simulation and identification layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid frequency: omega = {0} rad/s, must be > 0")]
    InvalidFrequency(f64),

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("invalid integration step h = {0} s, must be > 0")]
    InvalidStep(f64),

    #[error("operating point violates the PCC voltage model: {0}")]
    AssumptionViolation(String),

    #[error("converter schedule is undefined at t = {0} s")]
    UndefinedSchedule(f64),

    #[error("channel count mismatch: filter has {expected} channels, input has {got}")]
    ChannelCount { expected: usize, got: usize },

    #[error("invalid X/R ratio rho = {0}, must be > 0")]
    InvalidRatio(f64),

    #[error("numeric fault at t = {time} s: {quantity} is not finite")]
    NumericFault { time: f64, quantity: String },

    #[error("estimator state exceeded the boundedness ceiling at t = {time} s: {quantity}")]
    CeilingExceeded { time: f64, quantity: String },

    #[error("estimate is not physical: {0}")]
    NonPhysical(String),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("insufficient history for a {needed} s window ({have} s recorded)")]
    Window { needed: f64, have: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("singular circuit: R and omega*L are both zero")]
    SingularCircuit,

    #[error("iterative eigensolver did not converge after {0} iterations")]
    OracleFailure(usize),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {msg}", path.display())]
    Plot { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn numeric(time: f64, quantity: impl Into<String>) -> Self {
        Error::NumericFault {
            time,
            quantity: quantity.into(),
        }
    }

    /// True for faults raised while stepping a run, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericFault { .. } | Error::CeilingExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
