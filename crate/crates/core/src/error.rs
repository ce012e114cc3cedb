use thiserror::Error;

/// Errors raised by the orientation calculus, the navigation model and the filter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A quaternion handed to a constructor was too far from unit norm to be
    /// a plausible rounding artifact.
    #[error("quaternion norm {norm} deviates from 1 by more than {tolerance}")]
    NonUnitQuaternion { norm: f64, tolerance: f64 },

    /// A rotation vector lies outside the open ball of radius pi.
    #[error("rotation vector norm {norm} is outside the open ball of radius pi")]
    OutsideLogDomain { norm: f64 },

    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),

    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The innovation covariance could not be inverted reliably.
    #[error("innovation covariance is numerically singular (condition estimate {condition:e})")]
    SingularInnovation { condition: f64 },

    /// An error covariance is not positive definite where an inverse is needed.
    #[error("error covariance is not positive definite")]
    SingularCovariance,

    #[error("invalid trajectory specification: {0}")]
    InvalidTrajectory(String),

    #[error("measurement at t={measurement} is not aligned with filter time t={filter}")]
    MisalignedMeasurement { measurement: f64, filter: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
