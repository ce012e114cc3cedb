//! Error-state EKF over [`NavState`].
//!
//! The mean is propagated with the noise-free Euler step and corrected with
//! `⊞`; the covariance lives on the 15-dimensional error state.

use nalgebra::{Matrix6, Vector6};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::kinematics::{
    correct_imu, discretize_euler_forward, measurement_jacobians, measurement_residual,
    process_jacobians, ErrorCovariance, ErrorVector, ImuSample, Matrix15, NavState,
    NoiseDensities, PoseMeasurement, MEASUREMENT_DIM,
};
use crate::orientation::Vec3;

/// Condition-number bound above which an innovation covariance is rejected.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

/// Probability mass of the optional innovation gate.
pub const GATE_PROBABILITY: f64 = 0.997;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterState {
    pub mean: NavState,
    pub cov: ErrorCovariance,
    /// Time of the estimate, s.
    pub t: f64,
}

impl FilterState {
    pub fn new(mean: NavState, cov: ErrorCovariance, t: f64) -> Self {
        Self { mean, cov, t }
    }
}

/// One EKF prediction step driven by the IMU sample at the start of the
/// interval.
pub fn predict(
    fs: &FilterState,
    sample: &ImuSample,
    noise: &NoiseDensities,
    gravity: &Vec3,
    dt: f64,
) -> Result<FilterState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !sample.is_finite() {
        return Err(Error::NonFinite("imu sample"));
    }
    let (f, w) = correct_imu(sample, &fs.mean);
    let mean = discretize_euler_forward(&fs.mean, &f, &w, gravity, dt)?;
    let (fm, gm) = process_jacobians(&fs.mean, &f, &w, gravity, dt)?;
    let q = noise.process_covariance(dt);
    let p = fm * fs.cov.matrix() * fm.transpose() + gm * q * gm.transpose();
    Ok(FilterState {
        mean,
        cov: ErrorCovariance::from_matrix(p),
        t: fs.t + dt,
    })
}

/// Stacked residual `(r̃ − r̂, Φ̃ ⊟ Φ̂)`.
pub fn innovation(fs: &FilterState, meas: &PoseMeasurement) -> Vector6<f64> {
    measurement_residual(meas, &fs.mean)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateOptions {
    /// Joseph-form covariance update instead of `(I − KH)P`.
    pub joseph: bool,
    /// Skip measurements whose NIS exceeds the 99.7% chi-square quantile.
    pub gate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateReport {
    pub state: FilterState,
    pub innovation: Vector6<f64>,
    /// Normalized innovation squared `yᵀS⁻¹y`.
    pub nis: f64,
    /// `false` when the gate rejected the measurement; `state` is then the prior.
    pub accepted: bool,
}

/// EKF update with the default options.
pub fn update(
    fs: &FilterState,
    meas: &PoseMeasurement,
    noise: &NoiseDensities,
) -> Result<FilterState> {
    update_with(fs, meas, noise, UpdateOptions::default()).map(|r| r.state)
}

pub fn update_with(
    fs: &FilterState,
    meas: &PoseMeasurement,
    noise: &NoiseDensities,
    opts: UpdateOptions,
) -> Result<UpdateReport> {
    let (h, j) = measurement_jacobians();
    let p = fs.cov.matrix();
    let r = j * noise.measurement_covariance() * j.transpose();
    let s: Matrix6<f64> = h * p * h.transpose() + r;
    let s = (s + s.transpose()) * 0.5;

    let eig = s.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_INNOVATION_CONDITION {
        return Err(Error::SingularInnovation { condition });
    }
    let chol = s
        .cholesky()
        .ok_or(Error::SingularInnovation { condition })?;

    let y = innovation(fs, meas);
    let nis = y.dot(&chol.solve(&y));
    if opts.gate && nis > gate_threshold() {
        return Ok(UpdateReport { state: *fs, innovation: y, nis, accepted: false });
    }

    let k = chol.solve(&(h * p)).transpose();
    let dx: ErrorVector = k * y;
    let ikh = Matrix15::identity() - k * h;
    let p_new = if opts.joseph {
        ikh * p * ikh.transpose() + k * r * k.transpose()
    } else {
        ikh * p
    };
    Ok(UpdateReport {
        state: FilterState {
            mean: fs.mean.boxplus(&dx),
            cov: ErrorCovariance::from_matrix(p_new),
            t: fs.t,
        },
        innovation: y,
        nis,
        accepted: true,
    })
}

/// 99.7% quantile of the chi-square distribution with 6 degrees of freedom.
pub fn gate_threshold() -> f64 {
    ChiSquared::new(MEASUREMENT_DIM as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(GATE_PROBABILITY)
}

/// Normalized estimation error squared `eᵀP⁻¹e` with `e = truth ⊟ estimate`.
pub fn nees(fs: &FilterState, truth: &NavState) -> Result<f64> {
    let e = truth.boxminus(&fs.mean);
    let chol = fs.cov.matrix().cholesky().ok_or(Error::SingularCovariance)?;
    Ok(e.dot(&chol.solve(&e)))
}

/// Two-sided chi-square band holding `mass` of the NEES distribution of a
/// consistent filter.
pub fn nees_band(mass: f64) -> (f64, f64) {
    let chi = ChiSquared::new(crate::kinematics::ERROR_DIM as f64).expect("positive degrees of freedom");
    let tail = 0.5 * (1.0 - mass);
    (chi.inverse_cdf(tail), chi.inverse_cdf(1.0 - tail))
}

/// Output of [`run_filter`].
#[derive(Clone, Debug, PartialEq)]
pub struct FilterRun {
    /// Estimate at every IMU grid time (after any update at that time).
    pub estimates: Vec<FilterState>,
    /// Index into `estimates` and report of each applied measurement.
    pub updates: Vec<(usize, UpdateReport)>,
}

/// Runs the filter over an IMU stream on a uniform grid.
///
/// Sample `k` drives the step from `imu[k].t` to `imu[k + 1].t`. Each pose
/// measurement is applied after the predict step whose end time is nearest to
/// its stamp; stamps further than one IMU period from every step end are
/// rejected.
pub fn run_filter(
    initial: FilterState,
    imu: &[ImuSample],
    poses: &[PoseMeasurement],
    noise: &NoiseDensities,
    gravity: &Vec3,
    opts: UpdateOptions,
) -> Result<FilterRun> {
    let mut estimates = Vec::with_capacity(imu.len());
    let mut updates = Vec::with_capacity(poses.len());
    let mut fs = initial;
    estimates.push(fs);
    let mut next_pose = 0;
    for (k, pair) in imu.windows(2).enumerate() {
        let dt = pair[1].t - pair[0].t;
        fs = predict(&fs, &pair[0], noise, gravity, dt)?;
        fs.t = pair[1].t;
        let step = k + 1;
        let half = 0.5 * dt;
        while let Some(meas) = poses.get(next_pose) {
            if meas.t > fs.t + half {
                break;
            }
            if (meas.t - fs.t).abs() > dt {
                return Err(Error::MisalignedMeasurement { measurement: meas.t, filter: fs.t });
            }
            let report = update_with(&fs, meas, noise, opts)?;
            fs = report.state;
            updates.push((step, report));
            next_pose += 1;
        }
        estimates.push(fs);
    }
    Ok(FilterRun { estimates, updates })
}
