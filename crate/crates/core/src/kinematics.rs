//! IMU-driven navigation model.
//!
//! State `x = (I_r_IB, B_v_B, Φ_IB, B_b_f, B_b_ω)`: position in the inertial
//! frame, velocity in the body frame, body orientation, accelerometer and gyro
//! biases. The 15-dimensional error state is ordered
//! `[δr, δv, δφ, δb_f, δb_ω]`; the orientation error is a left perturbation,
//! `Φ = exp(δφ) ∘ Φ̂`.
//!
//! The process noise vector is stacked `[n_v, n_f, n_ω, n_bf, n_bω]`.

use nalgebra::{Matrix3, Matrix6, SMatrix, SVector, SymmetricEigen, Vector6};

use crate::calculus::gamma;
use crate::error::{Error, Result};
use crate::orientation::{hat, Orientation, Vec3};

pub const ERROR_DIM: usize = 15;
pub const MEASUREMENT_DIM: usize = 6;

pub const POSITION: usize = 0;
pub const VELOCITY: usize = 3;
pub const ATTITUDE: usize = 6;
pub const ACCEL_BIAS: usize = 9;
pub const GYRO_BIAS: usize = 12;

pub type ErrorVector = SVector<f64, ERROR_DIM>;
pub type Matrix15 = SMatrix<f64, ERROR_DIM, ERROR_DIM>;
pub type MeasurementJacobian = SMatrix<f64, MEASUREMENT_DIM, ERROR_DIM>;

/// Gravity in the inertial frame, m/s².
pub const DEFAULT_GRAVITY: Vec3 = Vec3::new(0.0, 0.0, -9.81);

/// Full navigation state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavState {
    /// `I_r_IB`, m.
    pub position: Vec3,
    /// `B_v_B`, m/s.
    pub velocity: Vec3,
    /// `Φ_IB`.
    pub orientation: Orientation,
    /// `B_b_f`, m/s².
    pub accel_bias: Vec3,
    /// `B_b_ω`, rad/s.
    pub gyro_bias: Vec3,
}

impl Default for NavState {
    fn default() -> Self {
        Self {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            orientation: Orientation::identity(),
            accel_bias: Vec3::zeros(),
            gyro_bias: Vec3::zeros(),
        }
    }
}

fn block(v: &ErrorVector, start: usize) -> Vec3 {
    v.fixed_rows::<3>(start).into_owned()
}

impl NavState {
    /// Applies an error-state correction: additive on vector blocks, `⊞` on
    /// the orientation.
    pub fn boxplus(&self, dx: &ErrorVector) -> Self {
        Self {
            position: self.position + block(dx, POSITION),
            velocity: self.velocity + block(dx, VELOCITY),
            orientation: self.orientation.boxplus(&block(dx, ATTITUDE)),
            accel_bias: self.accel_bias + block(dx, ACCEL_BIAS),
            gyro_bias: self.gyro_bias + block(dx, GYRO_BIAS),
        }
    }

    /// Error-state difference `self ⊟ other`.
    pub fn boxminus(&self, other: &Self) -> ErrorVector {
        let mut dx = ErrorVector::zeros();
        dx.fixed_rows_mut::<3>(POSITION)
            .copy_from(&(self.position - other.position));
        dx.fixed_rows_mut::<3>(VELOCITY)
            .copy_from(&(self.velocity - other.velocity));
        dx.fixed_rows_mut::<3>(ATTITUDE)
            .copy_from(&self.orientation.boxminus(&other.orientation));
        dx.fixed_rows_mut::<3>(ACCEL_BIAS)
            .copy_from(&(self.accel_bias - other.accel_bias));
        dx.fixed_rows_mut::<3>(GYRO_BIAS)
            .copy_from(&(self.gyro_bias - other.gyro_bias));
        dx
    }

    pub fn is_finite(&self) -> bool {
        [self.position, self.velocity, self.accel_bias, self.gyro_bias]
            .iter()
            .all(|v| v.iter().all(|c| c.is_finite()))
            && self.orientation.to_array().iter().all(|c| c.is_finite())
    }

    /// Velocity expressed in the inertial frame, `Φ_IB(B_v_B)`.
    pub fn inertial_velocity(&self) -> Vec3 {
        self.orientation.rotate(&self.velocity)
    }
}

/// Raw IMU reading at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// Proper acceleration `B_f̃_B`, m/s².
    pub accel: Vec3,
    /// Angular rate `B_ω̃_B`, rad/s.
    pub gyro: Vec3,
}

impl ImuSample {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.accel.iter().all(|c| c.is_finite())
            && self.gyro.iter().all(|c| c.is_finite())
    }
}

/// Position and orientation fix at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseMeasurement {
    pub t: f64,
    /// `I_r̃_IB`, m.
    pub position: Vec3,
    /// `Φ̃_IB`.
    pub orientation: Orientation,
}

/// Continuous-time white-noise densities of the process model and discrete
/// covariances of the pose measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseDensities {
    /// `R_v`, velocity noise entering the position dynamics.
    pub velocity: Matrix3<f64>,
    /// `R_f`, accelerometer white noise.
    pub accel: Matrix3<f64>,
    /// `R_ω`, gyroscope white noise.
    pub gyro: Matrix3<f64>,
    /// `R_bf`, accelerometer bias random walk.
    pub accel_bias: Matrix3<f64>,
    /// `R_bω`, gyroscope bias random walk.
    pub gyro_bias: Matrix3<f64>,
    /// `R_p`, position measurement covariance.
    pub position: Matrix3<f64>,
    /// `R_Φ`, orientation measurement covariance.
    pub orientation: Matrix3<f64>,
}

impl NoiseDensities {
    pub fn zero() -> Self {
        Self::from_diagonals([[0.0; 3]; 7])
    }

    /// Diagonal densities in field order
    /// `velocity, accel, gyro, accel_bias, gyro_bias, position, orientation`.
    pub fn from_diagonals(diag: [[f64; 3]; 7]) -> Self {
        let m = |d: [f64; 3]| Matrix3::from_diagonal(&Vec3::from(d));
        Self {
            velocity: m(diag[0]),
            accel: m(diag[1]),
            gyro: m(diag[2]),
            accel_bias: m(diag[3]),
            gyro_bias: m(diag[4]),
            position: m(diag[5]),
            orientation: m(diag[6]),
        }
    }

    fn process_blocks(&self) -> [&Matrix3<f64>; 5] {
        [
            &self.velocity,
            &self.accel,
            &self.gyro,
            &self.accel_bias,
            &self.gyro_bias,
        ]
    }

    /// Discrete process-noise covariance `Q_d = blockdiag(R_i / Δt)`.
    pub fn process_covariance(&self, dt: f64) -> Matrix15 {
        let mut q = Matrix15::zeros();
        for (i, r) in self.process_blocks().into_iter().enumerate() {
            q.fixed_view_mut::<3, 3>(3 * i, 3 * i).copy_from(&(r / dt));
        }
        q
    }

    /// `R_m = blockdiag(R_p, R_Φ)`; the two measurement noises are independent.
    pub fn measurement_covariance(&self) -> Matrix6<f64> {
        let mut r = Matrix6::zeros();
        r.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.position);
        r.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.orientation);
        r
    }
}

/// Symmetric PSD covariance over the 15-dimensional error state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorCovariance(Matrix15);

impl ErrorCovariance {
    pub fn zeros() -> Self {
        Self(Matrix15::zeros())
    }

    pub fn from_diagonal(diag: &ErrorVector) -> Self {
        Self(Matrix15::from_diagonal(diag))
    }

    /// Wraps a matrix, symmetrizing it.
    pub fn from_matrix(m: Matrix15) -> Self {
        Self((m + m.transpose()) * 0.5)
    }

    pub fn matrix(&self) -> &Matrix15 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.0).eigenvalues.min()
    }

    pub fn asymmetry(&self) -> f64 {
        (self.0 - self.0.transpose()).abs().max()
    }

    /// Symmetric within 1e-9 with no eigenvalue below -1e-9.
    pub fn is_valid(&self) -> bool {
        self.asymmetry() <= 1e-9 && self.min_eigenvalue() >= -1e-9
    }

    /// Marginal covariance of one 3-dimensional block.
    pub fn block(&self, start: usize) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(start, start).into_owned()
    }
}

/// Time derivative of the state at its mean (noise terms zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDerivative {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Orientation rate as the tangent `Φ_IB(ω)`, compatible with `⊞`.
    pub orientation: Vec3,
    pub accel_bias: Vec3,
    pub gyro_bias: Vec3,
}

/// Bias-corrected specific force and angular rate, `(f̃ − b_f, ω̃ − b_ω)`.
pub fn correct_imu(sample: &ImuSample, state: &NavState) -> (Vec3, Vec3) {
    (
        sample.accel - state.accel_bias,
        sample.gyro - state.gyro_bias,
    )
}

/// Continuous-time equations of motion for corrected inputs `f`, `w`.
pub fn continuous_dynamics(state: &NavState, f: &Vec3, w: &Vec3, gravity: &Vec3) -> StateDerivative {
    let q = &state.orientation;
    StateDerivative {
        position: q.rotate(&state.velocity),
        velocity: q.inverse().rotate(gravity) + f - w.cross(&state.velocity),
        orientation: q.rotate(w),
        accel_bias: Vec3::zeros(),
        gyro_bias: Vec3::zeros(),
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTimeStep(dt))
    }
}

/// One Euler-forward step of the mean dynamics with corrected inputs.
///
/// The orientation is advanced as `Φ ∘ exp(Δt ω)`, which equals
/// `Φ ⊞ (Δt Φ(ω))`.
pub fn discretize_euler_forward(
    state: &NavState,
    f: &Vec3,
    w: &Vec3,
    gravity: &Vec3,
    dt: f64,
) -> Result<NavState> {
    check_dt(dt)?;
    let q = &state.orientation;
    let v = &state.velocity;
    Ok(NavState {
        position: state.position + q.rotate(v) * dt,
        velocity: v + (q.inverse().rotate(gravity) + f - w.cross(v)) * dt,
        orientation: q.compose(&Orientation::exp(&(w * dt))),
        accel_bias: state.accel_bias,
        gyro_bias: state.gyro_bias,
    })
}

/// Discrete noise realizations `n̂_i ~ N(0, R_i/Δt)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProcessNoise {
    pub velocity: Vec3,
    pub accel: Vec3,
    pub gyro: Vec3,
    pub accel_bias: Vec3,
    pub gyro_bias: Vec3,
}

impl ProcessNoise {
    /// Unstacks `[n_v, n_f, n_ω, n_bf, n_bω]`.
    pub fn from_vector(n: &ErrorVector) -> Self {
        Self {
            velocity: block(n, 0),
            accel: block(n, 3),
            gyro: block(n, 6),
            accel_bias: block(n, 9),
            gyro_bias: block(n, 12),
        }
    }
}

/// Full discrete process model: raw IMU reading, current biases and explicit
/// noise realizations. With zero noise this is
/// [`discretize_euler_forward`] applied to [`correct_imu`].
pub fn propagate(
    state: &NavState,
    sample: &ImuSample,
    noise: &ProcessNoise,
    gravity: &Vec3,
    dt: f64,
) -> Result<NavState> {
    let (f, w) = correct_imu(sample, state);
    let mut next = discretize_euler_forward(state, &(f - noise.accel), &(w - noise.gyro), gravity, dt)?;
    next.position += state.orientation.rotate(&noise.velocity) * dt;
    next.accel_bias += noise.accel_bias * dt;
    next.gyro_bias += noise.gyro_bias * dt;
    Ok(next)
}

fn put(m: &mut Matrix15, row: usize, col: usize, b: &Matrix3<f64>) {
    m.fixed_view_mut::<3, 3>(row, col).copy_from(b);
}

/// Jacobians of the discrete process model with respect to the error state
/// (`F`) and the stacked process noise (`G`), for corrected inputs `f`, `w`.
pub fn process_jacobians(
    state: &NavState,
    _f: &Vec3,
    w: &Vec3,
    gravity: &Vec3,
    dt: f64,
) -> Result<(Matrix15, Matrix15)> {
    check_dt(dt)?;
    let c = state.orientation.rotation_matrix();
    let v = &state.velocity;
    let i3 = Matrix3::identity();
    let rot_gamma = c * gamma(&(w * dt)) * dt;

    let mut f_mat = Matrix15::identity();
    put(&mut f_mat, POSITION, VELOCITY, &(c * dt));
    put(&mut f_mat, POSITION, ATTITUDE, &(-hat(&state.orientation.rotate(v)) * dt));
    put(&mut f_mat, VELOCITY, VELOCITY, &(i3 - hat(w) * dt));
    put(&mut f_mat, VELOCITY, ATTITUDE, &(c.transpose() * hat(gravity) * dt));
    put(&mut f_mat, VELOCITY, ACCEL_BIAS, &(-i3 * dt));
    put(&mut f_mat, VELOCITY, GYRO_BIAS, &(-hat(v) * dt));
    put(&mut f_mat, ATTITUDE, GYRO_BIAS, &(-rot_gamma));

    let mut g_mat = Matrix15::zeros();
    put(&mut g_mat, POSITION, 0, &(c * dt));
    put(&mut g_mat, VELOCITY, 3, &(-i3 * dt));
    put(&mut g_mat, VELOCITY, 6, &(-hat(v) * dt));
    put(&mut g_mat, ATTITUDE, 6, &(-rot_gamma));
    put(&mut g_mat, ACCEL_BIAS, 9, &(i3 * dt));
    put(&mut g_mat, GYRO_BIAS, 12, &(i3 * dt));

    Ok((f_mat, g_mat))
}

/// Predicted pose measurement `(I_r_IB, Φ_IB)`.
pub fn measurement_model(state: &NavState) -> (Vec3, Orientation) {
    (state.position, state.orientation)
}

/// Stacked residual `(r̃ − r, Φ̃ ⊟ Φ)` of a pose measurement.
pub fn measurement_residual(meas: &PoseMeasurement, state: &NavState) -> Vector6<f64> {
    let (r, q) = measurement_model(state);
    let dr = meas.position - r;
    let dq = meas.orientation.boxminus(&q);
    Vector6::new(dr.x, dr.y, dr.z, dq.x, dq.y, dq.z)
}

/// `H` (w.r.t. the error state) and `J` (w.r.t. the measurement noise).
pub fn measurement_jacobians() -> (MeasurementJacobian, Matrix6<f64>) {
    let mut h = MeasurementJacobian::zeros();
    h.fixed_view_mut::<3, 3>(0, POSITION).fill_with_identity();
    h.fixed_view_mut::<3, 3>(3, ATTITUDE).fill_with_identity();
    (h, Matrix6::identity())
}
