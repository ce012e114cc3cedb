//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use orikit::estimator::UpdateOptions;
use orikit::experiment::Scenario;
use orikit::kinematics::{ErrorVector, NoiseDensities};
use orikit::sim::TrajectorySpec;
use orikit::Vec3;

use crate::CliError;

/// Environment variable naming the configuration file used when `--config`
/// is absent.
pub const CONFIG_ENV: &str = "ORIKIT_CONFIG";

/// The built-in configuration, also shipped as `config/default.toml`.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

/// Diagonals of the noise densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// `R_v`, (m/s)²·s.
    pub velocity: [f64; 3],
    /// `R_f`, (m/s²)²·s.
    pub accel: [f64; 3],
    /// `R_ω`, (rad/s)²·s.
    pub gyro: [f64; 3],
    /// `R_bf`, (m/s²)²/s.
    pub accel_bias: [f64; 3],
    /// `R_bω`, (rad/s)²/s.
    pub gyro_bias: [f64; 3],
    /// `R_p`, m².
    pub position: [f64; 3],
    /// `R_Φ`, rad².
    pub orientation: [f64; 3],
}

/// Diagonal of the initial error covariance, per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub attitude: [f64; 3],
    pub accel_bias: [f64; 3],
    pub gyro_bias: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Noise-free sensors, zero biases and an exactly initialized filter.
    #[serde(default)]
    pub noise_free: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default)]
    pub joseph: bool,
    #[serde(default)]
    pub gate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub gravity: [f64; 3],
    pub trajectory: TrajectorySpec,
    pub noise: NoiseConfig,
    pub init: InitConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub filter: FilterConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("built-in configuration is valid")
    }
}

fn nonnegative(name: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.iter().all(|x| x.is_finite() && *x >= 0.0) {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite and non-negative")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.trajectory
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(CliError::Config("gravity must be finite".into()));
        }
        let n = &self.noise;
        for (name, v) in [
            ("noise.velocity", n.velocity),
            ("noise.accel", n.accel),
            ("noise.gyro", n.gyro),
            ("noise.accel_bias", n.accel_bias),
            ("noise.gyro_bias", n.gyro_bias),
            ("noise.position", n.position),
            ("noise.orientation", n.orientation),
        ] {
            nonnegative(name, &v)?;
        }
        let i = &self.init;
        for (name, v) in [
            ("init.position", i.position),
            ("init.velocity", i.velocity),
            ("init.attitude", i.attitude),
            ("init.accel_bias", i.accel_bias),
            ("init.gyro_bias", i.gyro_bias),
        ] {
            nonnegative(name, &v)?;
        }
        Ok(())
    }

    pub fn noise_densities(&self) -> NoiseDensities {
        let n = &self.noise;
        NoiseDensities::from_diagonals([
            n.velocity,
            n.accel,
            n.gyro,
            n.accel_bias,
            n.gyro_bias,
            n.position,
            n.orientation,
        ])
    }

    pub fn p0_diag(&self) -> ErrorVector {
        let i = &self.init;
        let mut d = ErrorVector::zeros();
        for (b, v) in [i.position, i.velocity, i.attitude, i.accel_bias, i.gyro_bias]
            .into_iter()
            .enumerate()
        {
            d.fixed_rows_mut::<3>(3 * b).copy_from(&Vec3::from(v));
        }
        d
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            trajectory: self.trajectory.clone(),
            noise: self.noise_densities(),
            gravity: Vec3::from(self.gravity),
            p0_diag: self.p0_diag(),
            seed: self.seed,
            noise_free: self.sim.noise_free,
            update: UpdateOptions { joseph: self.filter.joseph, gate: self.filter.gate },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.trajectory.imu_rate, 200.0);
        assert_eq!(cfg.trajectory.duration, 60.0);
        assert!(!cfg.sim.noise_free);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let cfg = RunConfig::default();
        let once = cfg.to_toml();
        let reparsed = RunConfig::parse(&once).unwrap();
        assert_eq!(reparsed, cfg);
        assert_eq!(reparsed.to_toml(), once);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{DEFAULT_CONFIG}\nunexpected = 1\n");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Config(_))));
        let text = DEFAULT_CONFIG.replace("[sim]", "[sim]\nbogus = true");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let text = DEFAULT_CONFIG.replace("pose_rate = 10.0", "pose_rate = 400.0");
        assert!(RunConfig::parse(&text).is_err());
        let mut cfg = RunConfig::default();
        cfg.noise.accel[1] = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn p0_blocks_are_in_state_order() {
        let cfg = RunConfig::default();
        let d = cfg.p0_diag();
        assert_eq!(d[0], cfg.init.position[0]);
        assert_eq!(d[6], cfg.init.attitude[0]);
        assert_eq!(d[14], cfg.init.gyro_bias[2]);
    }
}
