use alloc::string::String;

/// Geometric condition whose failure makes a Gram matrix singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometricCondition {
    /// Sensors must not all lie on one line (2-D) or plane (3-D).
    NonCohyperplanar,
    /// Sensors must not all lie on one circle (2-D) or sphere (3-D).
    NonCohyperspherical,
}

impl core::fmt::Display for GeometricCondition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeometricCondition::NonCohyperplanar => {
                f.write_str("sensors lie on a common line/plane")
            }
            GeometricCondition::NonCohyperspherical => {
                f.write_str("sensors lie on a common circle/sphere")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("insufficient sensors: need at least {needed}, got {got}")]
    InsufficientSensors { needed: usize, got: usize },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("singular Gram matrix (condition estimate {condition:e}): {condition_failed}")]
    SingularGram {
        condition_failed: GeometricCondition,
        condition: f64,
    },
    #[error("evaluation point coincides with sensor {sensor}")]
    SingularPoint { sensor: usize },
    #[error("degenerate Jacobian (condition estimate {condition:e})")]
    DegenerateJacobian { condition: f64 },
    #[error("non-finite value produced by {0}")]
    Numeric(&'static str),
    #[error("noise-free model has infinite Fisher information")]
    InfiniteInformation,
    #[error("unknown scenario id `{0}`")]
    UnknownScenario(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
