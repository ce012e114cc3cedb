//! Simulate-and-estimate runs with summary statistics.

use crate::error::Result;
use crate::estimator::{nees, nees_band, run_filter, FilterRun, FilterState, UpdateOptions};
use crate::kinematics::{
    ErrorCovariance, ErrorVector, NavState, NoiseDensities, ACCEL_BIAS, ATTITUDE, ERROR_DIM,
    GYRO_BIAS,
};
use crate::orientation::Vec3;
use crate::sampling::{standard_normal_vec3, seeded};
use crate::sim::{
    generate_trajectory, synthesize_imu_with_bias, synthesize_pose, GroundTruth, ImuStream,
    PoseStream, TrajectorySpec,
};

/// Probability mass of the NEES consistency band.
pub const NEES_BAND_MASS: f64 = 0.95;

pub const BLOCK_NAMES: [&str; 5] = ["position", "velocity", "attitude", "accel_bias", "gyro_bias"];

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub trajectory: TrajectorySpec,
    /// Densities used both to synthesize the sensors and inside the filter.
    pub noise: NoiseDensities,
    pub gravity: Vec3,
    /// Diagonal of the initial error covariance.
    pub p0_diag: ErrorVector,
    pub seed: u64,
    /// Sensors without noise or bias and an exactly initialized filter; the
    /// filter keeps its configured densities.
    pub noise_free: bool,
    pub update: UpdateOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeesStats {
    pub count: usize,
    pub mean: f64,
    pub band: (f64, f64),
    pub fraction_in_band: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    /// Root-mean-square error per state block over every grid time.
    pub rmse: [f64; 5],
    /// Largest absolute component error per state block.
    pub max_error: [f64; 5],
    /// NEES after each applied pose update.
    pub nees: NeesStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub truth: GroundTruth,
    pub imu: ImuStream,
    pub poses: PoseStream,
    /// True navigation state (with the true biases) at every grid time.
    pub true_states: Vec<NavState>,
    pub run: FilterRun,
    pub summary: Summary,
}

fn scaled_normal(rng: &mut crate::sampling::Prng, var: &ErrorVector, start: usize) -> Vec3 {
    standard_normal_vec3(rng).component_mul(&var.fixed_rows::<3>(start).map(f64::sqrt))
}

pub fn run(scenario: &Scenario) -> Result<Outcome> {
    let truth = generate_trajectory(&scenario.trajectory)?;
    let sensor_noise = if scenario.noise_free { NoiseDensities::zero() } else { scenario.noise };
    let p0 = &scenario.p0_diag;

    let mut init_rng = seeded(scenario.seed.wrapping_add(2));
    let (bf0, bw0, init_error) = if scenario.noise_free {
        (Vec3::zeros(), Vec3::zeros(), ErrorVector::zeros())
    } else {
        let bf0 = scaled_normal(&mut init_rng, p0, ACCEL_BIAS);
        let bw0 = scaled_normal(&mut init_rng, p0, GYRO_BIAS);
        let mut e = ErrorVector::zeros();
        for start in [0, 3, ATTITUDE] {
            e.fixed_rows_mut::<3>(start).copy_from(&scaled_normal(&mut init_rng, p0, start));
        }
        (bf0, bw0, e)
    };

    let imu = synthesize_imu_with_bias(&truth, &sensor_noise, &scenario.gravity, bf0, bw0, scenario.seed);
    let poses = synthesize_pose(&truth, &sensor_noise, scenario.seed.wrapping_add(1));
    let true_states: Vec<NavState> = truth
        .samples
        .iter()
        .zip(imu.accel_bias.iter().zip(&imu.gyro_bias))
        .map(|(s, (bf, bw))| s.nav_state(*bf, *bw))
        .collect();

    let start = truth.samples[0].nav_state(Vec3::zeros(), Vec3::zeros()).boxplus(&init_error);
    let initial = FilterState::new(start, ErrorCovariance::from_diagonal(p0), truth.samples[0].t);
    let run = run_filter(
        initial,
        &imu.samples,
        &poses.measurements,
        &scenario.noise,
        &scenario.gravity,
        scenario.update,
    )?;
    let summary = summarize(&run, &true_states)?;
    Ok(Outcome { truth, imu, poses, true_states, run, summary })
}

pub fn summarize(run: &FilterRun, truth: &[NavState]) -> Result<Summary> {
    let mut sq = [0.0; 5];
    let mut max_error = [0.0f64; 5];
    for (est, tr) in run.estimates.iter().zip(truth) {
        let e = tr.boxminus(&est.mean);
        for b in 0..5 {
            let blk = e.fixed_rows::<3>(3 * b);
            sq[b] += blk.norm_squared();
            max_error[b] = max_error[b].max(blk.abs().max());
        }
    }
    let n = run.estimates.len().max(1) as f64;
    let rmse = sq.map(|s| (s / n).sqrt());

    let band = nees_band(NEES_BAND_MASS);
    let mut values = Vec::with_capacity(run.updates.len());
    for (k, report) in &run.updates {
        values.push(nees(&report.state, &truth[*k])?);
    }
    let count = values.len();
    let inside = values.iter().filter(|v| (band.0..=band.1).contains(*v)).count();
    let nees = NeesStats {
        count,
        mean: if count > 0 { values.iter().sum::<f64>() / count as f64 } else { f64::NAN },
        band,
        fraction_in_band: if count > 0 { inside as f64 / count as f64 } else { 0.0 },
    };
    debug_assert_eq!(ERROR_DIM, 15);
    Ok(Summary { rmse, max_error, nees })
}
