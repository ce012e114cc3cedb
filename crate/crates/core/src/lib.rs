//! Orientation calculus on SO(3) with unit quaternions, analytic manifold
//! Jacobians, and an IMU-driven error-state EKF built on top of them.
//!
//! - [`orientation`]: the group, exp/log and `⊞`/`⊟`.
//! - [`calculus`]: Rodriguez' formula, `Γ`, derivative identities and the
//!   finite-difference operators that check them.
//! - [`kinematics`]: IMU-driven navigation model and its Jacobians.
//! - [`estimator`]: error-state EKF predict/update.
//! - [`sim`]: synthetic trajectories and sensor streams.
//! - [`experiment`]: simulate-and-estimate runs with error and NEES summaries.
//! - [`checks`]: the runnable identity/consistency suite.

pub mod calculus;
pub mod checks;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod kinematics;
pub mod orientation;
pub mod sampling;
pub mod sim;

pub use error::{Error, Result};
pub use orientation::{hat, orientation_distance, Orientation, RotationVector, Vec3};
