use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum FlowError {
    /// A constructor or operation was handed parameters outside its
    /// documented range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two radial fields (or a field and its grid) disagree in length.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A non-finite value appeared where the evolution needs finite data.
    /// Carries the node index and a label for the offending quantity.
    #[error("numerical breakdown: {what} non-finite at node {node} (x = {x})")]
    Breakdown { what: &'static str, node: usize, x: f64 },

    /// Positivity of b, c or xi was lost after a step.
    #[error("positivity lost: {what} = {value} at node {node} after step")]
    PositivityLost { what: &'static str, node: usize, value: f64 },

    /// The adaptive step controller cannot keep dt above dt_min.
    #[error("resolution exhausted: required dt {required} below dt_min {dt_min}")]
    ResolutionExhausted { required: f64, dt_min: f64 },

    /// Interpolation during rescale-and-continue would leave the data range.
    #[error("interpolation target {target} outside data range [{lo}, {hi}])")]
    Extrapolation { target: f64, lo: f64, hi: f64 },

    /// Monitor detected a hard invariant violation (ratio bounds).
    #[error("monitor hard failure at t = {t}: {what}")]
    MonitorHardFailure { what: String, t: f64 },

    /// Bryant integrator left the admissible region and bisection on the
    /// origin coefficient did not recover it.
    #[error("soliton shooting failed: {0}")]
    ShootingFailed(String),

    /// Config text errors carry the offending key and line.
    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    /// Snapshot / time-series file problems.
    #[error("file format error in {path}: {reason}")]
    FileFormat { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FlowError>;

impl FlowError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        FlowError::InvalidParameter { name, reason: reason.into() }
    }
}
