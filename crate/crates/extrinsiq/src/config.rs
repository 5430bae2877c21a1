//! Experiment configuration: rig, poses, noise, methods, sweep, seed and
//! output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use extrinsiq_core::pipeline::Method;
use extrinsiq_core::sim::{NoiseModel, SensorRig, SimConfig, TargetModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::format::{from_json, read_rig, NoiseDto};

pub const SEED_VAR: &str = "EXTRINSIQ_SEED";

/// Seed from `EXTRINSIQ_SEED`, if set.
pub fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            CliError::Usage(format!("{SEED_VAR} must be an unsigned integer, got `{s}`"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{SEED_VAR}: {e}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// `CAMERA:LIDAR` or any two sensors for msg.
    pub pair: Option<String>,
    pub trials: usize,
    pub sigma_rot_deg: f64,
    pub sigma_t: f64,
    pub tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            pair: None,
            trials: 100,
            sigma_rot_deg: 90.0,
            sigma_t: 0.5,
            tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `default` or a path to a rig JSON file.
    #[serde(default = "default_rig_name")]
    pub rig: String,
    #[serde(default = "default_poses")]
    pub poses: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_range")]
    pub range: [f64; 2],
    #[serde(default)]
    pub noise: BTreeMap<String, NoiseDto>,
    #[serde(default = "all_methods")]
    pub methods: Vec<String>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_rig_name() -> String {
    "default".into()
}

fn default_poses() -> usize {
    30
}

fn default_range() -> [f64; 2] {
    let r = SimConfig::noiseless(0, 0).range;
    [r.0, r.1]
}

fn all_methods() -> Vec<String> {
    Method::ALL.iter().map(|m| m.as_str().to_string()).collect()
}

fn default_out() -> PathBuf {
    PathBuf::from(".")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rig: default_rig_name(),
            poses: default_poses(),
            seed: 0,
            range: default_range(),
            noise: BTreeMap::new(),
            methods: all_methods(),
            sweep: SweepConfig::default(),
            out: default_out(),
        }
    }
}

impl ExperimentConfig {
    /// The noisy benchmark: 100 poses, a 3 cm 64-channel LIDAR, a 1 cm
    /// 32-channel LIDAR, 10% clutter on both and 0.5 px corner noise.
    pub fn benchmark(seed: u64) -> Self {
        let mut noise = BTreeMap::new();
        let lidar = |s| NoiseDto {
            range_sigma: s,
            pixel_sigma: 0.0,
            clutter_fraction: 0.1,
        };
        let camera = NoiseDto {
            range_sigma: 0.0,
            pixel_sigma: 0.5,
            clutter_fraction: 0.0,
        };
        noise.insert("os1_64".to_string(), lidar(0.03));
        noise.insert("vlp_32".to_string(), lidar(0.01));
        for c in ["basler", "stereo_left", "stereo_right"] {
            noise.insert(c.to_string(), camera.clone());
        }
        Self {
            poses: 100,
            seed,
            noise,
            ..Self::default()
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        from_json(&crate::io::read(path)?, &path.display().to_string())
    }

    pub fn rig(&self) -> CliResult<(SensorRig, TargetModel)> {
        if self.rig == "default" {
            Ok((SensorRig::default_rig(), TargetModel::default()))
        } else {
            read_rig(Path::new(&self.rig))
        }
    }

    pub fn methods(&self) -> CliResult<Vec<Method>> {
        self.methods
            .iter()
            .map(|m| {
                Method::parse(m).ok_or_else(|| CliError::Usage(format!("unknown method `{m}`")))
            })
            .collect()
    }

    /// Sets the noise field a sensor's kind uses: range sigma for LIDARs,
    /// pixel sigma for cameras.
    pub fn set_sigma(&mut self, rig: &SensorRig, sensor: &str, sigma: f64) -> CliResult<()> {
        let (_, s) = rig.sensor(sensor)?;
        let n = self
            .noise
            .entry(sensor.to_string())
            .or_insert_with(NoiseDto::zero);
        if s.is_lidar() {
            n.range_sigma = sigma;
        } else {
            n.pixel_sigma = sigma;
        }
        Ok(())
    }

    pub fn set_clutter(&mut self, rig: &SensorRig, sensor: &str, fraction: f64) -> CliResult<()> {
        let (_, s) = rig.sensor(sensor)?;
        if !s.is_lidar() {
            return Err(CliError::Usage(format!(
                "clutter applies to LIDARs; `{sensor}` is a camera"
            )));
        }
        self.noise
            .entry(sensor.to_string())
            .or_insert_with(NoiseDto::zero)
            .clutter_fraction = fraction;
        Ok(())
    }

    /// Rig, target and simulation settings, checked against each other.
    pub fn resolve(&self) -> CliResult<(SensorRig, TargetModel, SimConfig)> {
        let (rig, target) = self.rig()?;
        self.methods()?;
        let mut noise = BTreeMap::new();
        for (name, n) in &self.noise {
            rig.sensor(name)?;
            noise.insert(name.clone(), NoiseModel::from(n).validated()?);
        }
        if let Some(pair) = &self.sweep.pair {
            let (a, b) = parse_pair(pair)?;
            rig.sensor(&a)?;
            rig.sensor(&b)?;
        }
        if self.poses == 0 {
            return Err(CliError::Usage("poses must be at least 1".into()));
        }
        if !(self.range[0] > 0.0 && self.range[0] < self.range[1]) {
            return Err(CliError::Usage("range must satisfy 0 < min < max".into()));
        }
        let sim = SimConfig {
            seed: self.seed,
            poses: self.poses,
            range: (self.range[0], self.range[1]),
            noise,
        };
        Ok((rig, target, sim))
    }
}

/// `A:B` into its two names.
pub fn parse_pair(s: &str) -> CliResult<(String, String)> {
    match s.split_once(':') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(':') => {
            Ok((a.to_string(), b.to_string()))
        }
        _ => Err(CliError::Usage(format!(
            "expected a pair as A:B, got `{s}`"
        ))),
    }
}

/// `NAME=VALUE` into its parts.
pub fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    if name.is_empty() {
        return Err(format!("missing sensor name in `{s}`"));
    }
    Ok((name.to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_resolves_on_the_default_rig() {
        let (_, _, sim) = ExperimentConfig::benchmark(3).resolve().unwrap();
        assert_eq!(sim.poses, 100);
        assert_eq!(sim.noise_for("os1_64").range_sigma, 0.03);
        assert_eq!(sim.noise_for("basler").pixel_sigma, 0.5);
    }

    #[test]
    fn sigma_goes_to_the_field_of_the_sensor_kind() {
        let rig = SensorRig::default_rig();
        let mut c = ExperimentConfig::default();
        c.set_sigma(&rig, "os1_64", 0.03).unwrap();
        c.set_sigma(&rig, "basler", 0.5).unwrap();
        assert_eq!(c.noise["os1_64"].range_sigma, 0.03);
        assert_eq!(c.noise["basler"].pixel_sigma, 0.5);
        assert!(c.set_sigma(&rig, "lidar64", 0.03).is_err());
        assert!(c.set_clutter(&rig, "basler", 0.1).is_err());
    }

    #[test]
    fn unknown_methods_and_bad_pairs_are_usage_errors() {
        let c = ExperimentConfig {
            methods: vec!["icp".into()],
            ..Default::default()
        };
        assert_eq!(c.resolve().unwrap_err().exit_code(), 64);
        assert!(parse_pair("basler").is_err());
        assert!(parse_pair("a:b:c").is_err());
        assert_eq!(
            parse_pair("basler:os1_64").unwrap(),
            ("basler".into(), "os1_64".into())
        );
        assert_eq!(
            parse_assignment("os1_64=0.03").unwrap(),
            ("os1_64".into(), 0.03)
        );
        assert!(parse_assignment("os1_64").is_err());
    }
}
