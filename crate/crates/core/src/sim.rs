//! Synthetic ground truth and sensor streams.
//!
//! Trajectories are closed-form, so positions, velocities, accelerations,
//! orientations and angular rates are exact at every sample time. IMU
//! readings come from inverting the IMU measurement model and pose
//! measurements from perturbing the truth; all noise is drawn from seeded
//! [`Prng`] streams.

use serde::{Deserialize, Serialize};

use crate::calculus::gamma;
use crate::error::{Error, Result};
use crate::kinematics::{ImuSample, NavState, NoiseDensities, PoseMeasurement};
use crate::orientation::{Orientation, Vec3};
use crate::sampling::{covariance_sqrt, gaussian_vec3, seeded, Prng};

/// Analytic motion families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TrajectoryKind {
    /// Constant body velocity and body angular rate:
    /// `Φ(t) = Φ0 ∘ exp(tω)`, `r(t) = r0 + Φ0(tΓ(tω)v)`.
    ConstantTwist {
        #[serde(default)]
        position: [f64; 3],
        /// Initial orientation as a rotation vector.
        #[serde(default)]
        orientation: [f64; 3],
        /// `B_v_B`, m/s.
        #[serde(default)]
        velocity: [f64; 3],
        /// `B_ω_IB`, rad/s.
        #[serde(default)]
        angular_rate: [f64; 3],
    },
    /// Horizontal circle about the origin, body x-axis along the velocity.
    Circle {
        /// m.
        radius: f64,
        /// rad/s.
        rate: f64,
        /// Constant height, m.
        #[serde(default)]
        height: f64,
    },
    /// Per-axis sinusoids in position and in the rotation vector of the
    /// orientation: `r_i = A_i sin(ω_i t)`, `φ_i = B_i sin(ν_i t)`.
    SinusoidMix {
        position_amplitude: [f64; 3],
        position_frequency: [f64; 3],
        attitude_amplitude: [f64; 3],
        attitude_frequency: [f64; 3],
    },
}

/// Exact kinematic quantities at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    /// `I_r_IB`, m.
    pub position: Vec3,
    /// `B_v_B`, m/s.
    pub velocity: Vec3,
    /// `I_a_B`, m/s².
    pub acceleration: Vec3,
    pub orientation: Orientation,
    /// `B_ω_IB`, rad/s.
    pub angular_rate: Vec3,
}

impl TruthSample {
    pub fn inertial_velocity(&self) -> Vec3 {
        self.orientation.rotate(&self.velocity)
    }

    /// Navigation state with the given bias values.
    pub fn nav_state(&self, accel_bias: Vec3, gyro_bias: Vec3) -> NavState {
        NavState {
            position: self.position,
            velocity: self.velocity,
            orientation: self.orientation,
            accel_bias,
            gyro_bias,
        }
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::from(a)
}

impl TrajectoryKind {
    /// Evaluates the trajectory at `t`.
    pub fn sample(&self, t: f64) -> TruthSample {
        match self {
            Self::ConstantTwist { position, orientation, velocity, angular_rate } => {
                let q0 = Orientation::exp(&v3(*orientation));
                let w = v3(*angular_rate);
                let v = v3(*velocity);
                let q = q0.compose(&Orientation::exp(&(w * t)));
                TruthSample {
                    t,
                    position: v3(*position) + q0.rotate(&(gamma(&(w * t)) * v * t)),
                    velocity: v,
                    acceleration: q.rotate(&w.cross(&v)),
                    orientation: q,
                    angular_rate: w,
                }
            }
            Self::Circle { radius, rate, height } => {
                let (s, c) = (rate * t).sin_cos();
                let yaw = rate * t + std::f64::consts::FRAC_PI_2;
                TruthSample {
                    t,
                    position: Vec3::new(radius * c, radius * s, *height),
                    velocity: Vec3::new(radius * rate, 0.0, 0.0),
                    acceleration: Vec3::new(c, s, 0.0) * (-radius * rate * rate),
                    orientation: Orientation::exp(&Vec3::new(0.0, 0.0, yaw)),
                    angular_rate: Vec3::new(0.0, 0.0, *rate),
                }
            }
            Self::SinusoidMix {
                position_amplitude,
                position_frequency,
                attitude_amplitude,
                attitude_frequency,
            } => {
                let mut r = Vec3::zeros();
                let mut dr = Vec3::zeros();
                let mut ddr = Vec3::zeros();
                let mut phi = Vec3::zeros();
                let mut dphi = Vec3::zeros();
                for i in 0..3 {
                    let (a, w) = (position_amplitude[i], position_frequency[i]);
                    let (s, c) = (w * t).sin_cos();
                    r[i] = a * s;
                    dr[i] = a * w * c;
                    ddr[i] = -a * w * w * s;
                    let (b, u) = (attitude_amplitude[i], attitude_frequency[i]);
                    let (s, c) = (u * t).sin_cos();
                    phi[i] = b * s;
                    dphi[i] = b * u * c;
                }
                let q = Orientation::exp(&phi);
                let inv = q.inverse();
                TruthSample {
                    t,
                    position: r,
                    velocity: inv.rotate(&dr),
                    acceleration: ddr,
                    orientation: q,
                    angular_rate: inv.rotate(&(gamma(&phi) * dphi)),
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            Self::ConstantTwist { position, orientation, velocity, angular_rate } => {
                finite(position) && finite(orientation) && finite(velocity) && finite(angular_rate)
            }
            Self::Circle { radius, rate, height } => finite(&[*radius, *rate, *height]),
            Self::SinusoidMix {
                position_amplitude,
                position_frequency,
                attitude_amplitude,
                attitude_frequency,
            } => {
                finite(position_amplitude)
                    && finite(position_frequency)
                    && finite(attitude_amplitude)
                    && finite(attitude_frequency)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidTrajectory("non-finite trajectory parameter".into()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub motion: TrajectoryKind,
    /// s.
    pub duration: f64,
    /// Hz.
    pub imu_rate: f64,
    /// Hz.
    pub pose_rate: f64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            motion: TrajectoryKind::Circle { radius: 10.0, rate: 0.3, height: 0.0 },
            duration: 60.0,
            imu_rate: 200.0,
            pose_rate: 10.0,
        }
    }
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidTrajectory(msg.into()));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be positive");
        }
        if !(self.imu_rate > 0.0 && self.imu_rate.is_finite()) {
            return bad("imu_rate must be positive");
        }
        if !(self.pose_rate > 0.0 && self.pose_rate.is_finite()) {
            return bad("pose_rate must be positive");
        }
        if self.pose_rate > self.imu_rate {
            return bad("pose_rate must not exceed imu_rate");
        }
        if self.imu_steps() == 0 {
            return bad("duration is shorter than one imu period");
        }
        self.motion.validate()
    }

    /// Number of IMU intervals, `round(duration · imu_rate)`.
    pub fn imu_steps(&self) -> usize {
        (self.duration * self.imu_rate).round() as usize
    }

    pub fn imu_period(&self) -> f64 {
        1.0 / self.imu_rate
    }
}

/// Truth sampled on the IMU grid `t_k = k / imu_rate`, `k = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub spec: TrajectorySpec,
    pub samples: Vec<TruthSample>,
}

impl GroundTruth {
    pub fn dt(&self) -> f64 {
        self.spec.imu_period()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn generate_trajectory(spec: &TrajectorySpec) -> Result<GroundTruth> {
    spec.validate()?;
    let dt = spec.imu_period();
    let samples = (0..=spec.imu_steps())
        .map(|k| spec.motion.sample(k as f64 * dt))
        .collect();
    Ok(GroundTruth { spec: spec.clone(), samples })
}

/// IMU readings with the bias values that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct ImuStream {
    pub samples: Vec<ImuSample>,
    pub accel_bias: Vec<Vec3>,
    pub gyro_bias: Vec<Vec3>,
}

/// IMU stream starting from zero biases.
pub fn synthesize_imu(gt: &GroundTruth, noise: &NoiseDensities, gravity: &Vec3, seed: u64) -> ImuStream {
    synthesize_imu_with_bias(gt, noise, gravity, Vec3::zeros(), Vec3::zeros(), seed)
}

/// `f̃ = Φ⁻¹(a − g) + b_f + n_f`, `ω̃ = ω + b_ω + n_ω`, biases random-walking
/// as `b_{k+1} = b_k + Δt n_b`. Every discrete noise is drawn from
/// `N(0, R/Δt)`.
pub fn synthesize_imu_with_bias(
    gt: &GroundTruth,
    noise: &NoiseDensities,
    gravity: &Vec3,
    accel_bias: Vec3,
    gyro_bias: Vec3,
    seed: u64,
) -> ImuStream {
    let dt = gt.dt();
    let sf = covariance_sqrt(&(noise.accel / dt));
    let sw = covariance_sqrt(&(noise.gyro / dt));
    let sbf = covariance_sqrt(&(noise.accel_bias / dt));
    let sbw = covariance_sqrt(&(noise.gyro_bias / dt));
    let mut rng = seeded(seed);
    let mut bf = accel_bias;
    let mut bw = gyro_bias;
    let n = gt.len();
    let mut out = ImuStream {
        samples: Vec::with_capacity(n),
        accel_bias: Vec::with_capacity(n),
        gyro_bias: Vec::with_capacity(n),
    };
    for s in &gt.samples {
        let nf = gaussian_vec3(&mut rng, &sf);
        let nw = gaussian_vec3(&mut rng, &sw);
        let nbf = gaussian_vec3(&mut rng, &sbf);
        let nbw = gaussian_vec3(&mut rng, &sbw);
        out.samples.push(ImuSample {
            t: s.t,
            accel: s.orientation.inverse().rotate(&(s.acceleration - gravity)) + bf + nf,
            gyro: s.angular_rate + bw + nw,
        });
        out.accel_bias.push(bf);
        out.gyro_bias.push(bw);
        bf += nbf * dt;
        bw += nbw * dt;
    }
    out
}

/// Pose measurements with the noise draws that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseStream {
    pub measurements: Vec<PoseMeasurement>,
    /// Index into the truth samples of each measurement.
    pub indices: Vec<usize>,
    pub position_noise: Vec<Vec3>,
    pub orientation_noise: Vec<Vec3>,
}

/// `r̃ = r + n_p`, `Φ̃ = Φ ⊞ n_Φ` with `n ~ N(0, R_m)`, at `t = m / pose_rate`
/// for `m ≥ 1`, each stamped with the nearest IMU grid time.
pub fn synthesize_pose(gt: &GroundTruth, noise: &NoiseDensities, seed: u64) -> PoseStream {
    let sp = covariance_sqrt(&noise.position);
    let sq = covariance_sqrt(&noise.orientation);
    let mut rng: Prng = seeded(seed);
    let ratio = gt.spec.imu_rate / gt.spec.pose_rate;
    let last = gt.len() - 1;
    let mut out = PoseStream {
        measurements: Vec::new(),
        indices: Vec::new(),
        position_noise: Vec::new(),
        orientation_noise: Vec::new(),
    };
    for m in 1.. {
        let k = (m as f64 * ratio).round() as usize;
        if k > last {
            break;
        }
        let s = &gt.samples[k];
        let np = gaussian_vec3(&mut rng, &sp);
        let nq = gaussian_vec3(&mut rng, &sq);
        out.measurements.push(PoseMeasurement {
            t: s.t,
            position: s.position + np,
            orientation: s.orientation.boxplus(&nq),
        });
        out.indices.push(k);
        out.position_noise.push(np);
        out.orientation_noise.push(nq);
    }
    out
}

/// One smooth instance of each motion family.
pub fn reference_trajectories() -> Vec<TrajectoryKind> {
    vec![
        TrajectoryKind::ConstantTwist {
            position: [1.0, -2.0, 0.5],
            orientation: [0.3, -0.2, 0.9],
            velocity: [1.2, 0.4, -0.3],
            angular_rate: [0.2, -0.5, 0.7],
        },
        TrajectoryKind::Circle { radius: 10.0, rate: 0.3, height: 2.0 },
        TrajectoryKind::SinusoidMix {
            position_amplitude: [3.0, 2.0, 0.5],
            position_frequency: [0.4, 0.7, 1.1],
            attitude_amplitude: [0.3, 0.2, 1.2],
            attitude_frequency: [0.9, 0.5, 0.3],
        },
    ]
}
