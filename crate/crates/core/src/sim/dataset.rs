use alloc::collections::BTreeMap;
use alloc::string::String;

use super::{
    sample_target_poses, simulate_camera_view, simulate_lidar_scan, SensorKind, SensorRig,
    TargetModel,
};
use crate::geom::{ImageLine, Plane, Pose};
use crate::prelude::*;
use crate::rng::{self, Purpose};

/// Per-sensor measurement noise.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NoiseModel {
    /// Standard deviation of LIDAR range noise along each ray, meters.
    pub range_sigma: f64,
    /// Standard deviation of image corner noise per axis, pixels.
    pub pixel_sigma: f64,
    /// Fraction of LIDAR returns that are off-target clutter, in [0, 1).
    pub clutter_fraction: f64,
}

impl NoiseModel {
    pub fn validated(self) -> Result<Self> {
        if !(self.range_sigma >= 0.0 && self.pixel_sigma >= 0.0) {
            return Err(Error::InvalidInput(
                "noise sigmas must be non-negative".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.clutter_fraction) {
            return Err(Error::InvalidInput(
                "clutter fraction must be in [0, 1)".into(),
            ));
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub poses: usize,
    /// Target distance range from the rig origin, meters.
    pub range: (f64, f64),
    /// Noise per sensor name; sensors not listed are noiseless.
    pub noise: BTreeMap<String, NoiseModel>,
}

impl SimConfig {
    pub fn noiseless(seed: u64, poses: usize) -> Self {
        Self {
            seed,
            poses,
            range: (2.5, 4.5),
            noise: BTreeMap::new(),
        }
    }

    pub fn noise_for(&self, sensor: &str) -> NoiseModel {
        self.noise.get(sensor).copied().unwrap_or_default()
    }
}

/// A LIDAR return on target edge `edge` (0-based label).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePoint {
    pub edge: usize,
    pub point: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LidarObservation {
    /// Every return on the target, edge returns included.
    pub planar_points: Vec<Vec3>,
    /// Returns where a scan line crosses a target edge, labeled by simulation
    /// truth. Feature extraction does not read these labels.
    pub edge_points: Vec<EdgePoint>,
    pub clutter_points: Vec<Vec3>,
    /// True target plane in the LIDAR frame.
    pub plane: Plane,
}

impl LidarObservation {
    /// Target and clutter returns together, as a sensor would deliver them.
    pub fn all_points(&self) -> Vec<Vec3> {
        let mut pts = self.planar_points.clone();
        pts.extend_from_slice(&self.clutter_points);
        pts
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CameraObservation {
    /// True target plane in the camera frame, origin offset at the target center.
    pub plane: Plane,
    /// Edge lines; line `j` passes through corners `j` and `j + 1`.
    pub lines: [ImageLine; 4],
    /// Measured (noisy) corners in label order.
    pub corners: [Vec2; 4],
    /// Whether each true corner falls inside the image.
    pub visible: [bool; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub enum SensorObservation {
    Lidar(LidarObservation),
    Camera(CameraObservation),
}

impl SensorObservation {
    pub fn as_lidar(&self) -> Option<&LidarObservation> {
        match self {
            SensorObservation::Lidar(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_camera(&self) -> Option<&CameraObservation> {
        match self {
            SensorObservation::Camera(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub index: usize,
    pub rig_from_target: Pose,
    /// One entry per rig sensor, in rig order; `None` when not observed.
    pub sensors: Vec<Option<SensorObservation>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub rig: SensorRig,
    pub target: TargetModel,
    pub config: SimConfig,
    pub observations: Vec<Observation>,
}

impl Dataset {
    /// Indices of observations seen by every listed sensor.
    pub fn covisible(&self, sensors: &[usize]) -> Vec<usize> {
        self.observations
            .iter()
            .enumerate()
            .filter(|(_, o)| {
                sensors
                    .iter()
                    .all(|&s| o.sensors.get(s).is_some_and(|x| x.is_some()))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy restricted to the first `n` observations.
    pub fn truncated(&self, n: usize) -> Self {
        let mut d = self.clone();
        d.observations.truncate(n);
        d.config.poses = d.observations.len();
        d
    }

    /// Copy with one sensor removed from the rig and from every observation.
    pub fn without_sensor(&self, name: &str) -> Result<Self> {
        let (idx, _) = self.rig.sensor(name)?;
        let mut d = self.clone();
        d.rig = self.rig.without(name);
        for o in &mut d.observations {
            o.sensors.remove(idx);
        }
        d.config.noise.remove(name);
        Ok(d)
    }
}

/// Simulates every sensor for one target pose. Each sensor draws from its own
/// stream keyed by `(seed, index, sensor)`, so observations can be generated
/// in any order.
pub fn simulate_observation(
    rig: &SensorRig,
    target: &TargetModel,
    config: &SimConfig,
    index: usize,
    rig_from_target: &Pose,
) -> Result<Observation> {
    let mut sensors = Vec::with_capacity(rig.sensors.len());
    for (s, sensor) in rig.sensors.iter().enumerate() {
        let noise = config.noise_for(&sensor.name);
        let obs = match sensor.kind {
            SensorKind::Lidar(_) => {
                let mut rng = rng::stream(config.seed, Purpose::Lidar, index as u64, s as u64);
                SensorObservation::Lidar(simulate_lidar_scan(
                    rig,
                    s,
                    target,
                    rig_from_target,
                    &noise,
                    &mut rng,
                )?)
            }
            SensorKind::Camera { .. } => {
                let mut rng = rng::stream(config.seed, Purpose::Camera, index as u64, s as u64);
                SensorObservation::Camera(simulate_camera_view(
                    rig,
                    s,
                    target,
                    rig_from_target,
                    &noise,
                    &mut rng,
                )?)
            }
        };
        sensors.push(Some(obs));
    }
    Ok(Observation {
        index,
        rig_from_target: *rig_from_target,
        sensors,
    })
}

/// Samples target poses and simulates all sensors. Pure function of
/// `(rig, target, config)`.
pub fn build_dataset(rig: &SensorRig, target: &TargetModel, config: &SimConfig) -> Result<Dataset> {
    let poses = plan_poses(rig, target, config)?;
    let observations = poses
        .iter()
        .enumerate()
        .map(|(i, p)| simulate_observation(rig, target, config, i, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        rig: rig.clone(),
        target: *target,
        config: config.clone(),
        observations,
    })
}

/// Validates the configuration and samples the target poses of a dataset.
pub fn plan_poses(rig: &SensorRig, target: &TargetModel, config: &SimConfig) -> Result<Vec<Pose>> {
    let rig = rig.clone().validated()?;
    for name in config.noise.keys() {
        rig.sensor(name)?;
    }
    for n in config.noise.values() {
        n.validated()?;
    }
    let mut rng = rng::stream(config.seed, Purpose::TargetPoses, 0, 0);
    sample_target_poses(&rig, target, config.poses, config.range, &mut rng)
}
