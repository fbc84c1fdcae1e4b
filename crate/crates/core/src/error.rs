use thiserror::Error;

/// Errors raised by the planning toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("underspecified geometry: {0}")]
    UnderspecifiedGeometry(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    Alignment { left: usize, right: usize },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("horizon {horizon_s} s is out of range (dt {dt} s, {len} waypoints)")]
    HorizonOutOfRange { horizon_s: f64, dt: f64, len: usize },

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient horizon: need {needed} waypoints, got {got}")]
    InsufficientHorizon { needed: usize, got: usize },

    #[error("corrupt log at line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
