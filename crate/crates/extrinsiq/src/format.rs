//! JSON file formats: datasets, rigs and calibration results.
//!
//! Poses are stored as a `wxyz` quaternion plus translation. Floats are
//! written in shortest round-trip form, so a file read back and written again
//! is byte-identical.

use std::collections::BTreeMap;

use extrinsiq_core::sim::{
    CameraObservation, Dataset, EdgePoint, LidarObservation, NoiseModel, Observation, ScanPattern,
    Sensor, SensorKind, SensorObservation, SensorRig, SimConfig, StereoPair, TargetModel,
};
use extrinsiq_core::{CameraIntrinsics, ImageLine, Plane, Pose, Rotation, Vec2, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "extrinsiq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseDto {
    pub quaternion_wxyz: [f64; 4],
    pub translation: [f64; 3],
}

impl From<&Pose> for PoseDto {
    fn from(p: &Pose) -> Self {
        Self {
            quaternion_wxyz: p.rotation.wxyz(),
            translation: p.translation.into(),
        }
    }
}

impl PoseDto {
    pub fn to_pose(&self) -> CliResult<Pose> {
        let [w, x, y, z] = self.quaternion_wxyz;
        Ok(Pose::new(
            Rotation::from_wxyz(w, x, y, z)?,
            Vec3::from(self.translation),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanDto {
    pub channels: usize,
    /// Radians.
    pub elevation_min: f64,
    pub elevation_max: f64,
    pub azimuth_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicsDto {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub skew: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDto {
    Lidar,
    Camera,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorDto {
    pub name: String,
    pub kind: KindDto,
    /// `rig_from_sensor`.
    pub pose: PoseDto,
    #[serde(default = "one")]
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<IntrinsicsDto>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StereoPairDto {
    pub left: String,
    pub right: String,
    pub left_from_right: PoseDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetDto {
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigDto {
    pub sensors: Vec<SensorDto>,
    #[serde(default)]
    pub stereo_pairs: Vec<StereoPairDto>,
    #[serde(default = "default_target")]
    pub target: TargetDto,
}

fn default_target() -> TargetDto {
    let t = TargetModel::default();
    TargetDto {
        width: t.width,
        height: t.height,
    }
}

impl RigDto {
    pub fn new(rig: &SensorRig, target: &TargetModel) -> Self {
        let sensors = rig
            .sensors
            .iter()
            .map(|s| {
                let (kind, scan, intrinsics) = match &s.kind {
                    SensorKind::Lidar(p) => (
                        KindDto::Lidar,
                        Some(ScanDto {
                            channels: p.channels,
                            elevation_min: p.elevation_min,
                            elevation_max: p.elevation_max,
                            azimuth_step: p.azimuth_step,
                        }),
                        None,
                    ),
                    SensorKind::Camera {
                        intrinsics: k,
                        width,
                        height,
                    } => (
                        KindDto::Camera,
                        None,
                        Some(IntrinsicsDto {
                            fx: k.fx,
                            fy: k.fy,
                            cx: k.cx,
                            cy: k.cy,
                            skew: k.skew,
                            width: *width,
                            height: *height,
                        }),
                    ),
                };
                SensorDto {
                    name: s.name.clone(),
                    kind,
                    pose: (&s.rig_from_sensor).into(),
                    confidence: s.confidence,
                    scan,
                    intrinsics,
                }
            })
            .collect();
        let stereo_pairs = rig
            .stereo_pairs
            .iter()
            .map(|p| StereoPairDto {
                left: p.left.clone(),
                right: p.right.clone(),
                left_from_right: (&p.left_from_right).into(),
            })
            .collect();
        Self {
            sensors,
            stereo_pairs,
            target: TargetDto {
                width: target.width,
                height: target.height,
            },
        }
    }

    pub fn to_rig(&self) -> CliResult<(SensorRig, TargetModel)> {
        let mut sensors = Vec::with_capacity(self.sensors.len());
        for s in &self.sensors {
            let kind = match (&s.kind, &s.scan, &s.intrinsics) {
                (KindDto::Lidar, Some(p), _) => SensorKind::Lidar(ScanPattern {
                    channels: p.channels,
                    elevation_min: p.elevation_min,
                    elevation_max: p.elevation_max,
                    azimuth_step: p.azimuth_step,
                }),
                (KindDto::Camera, _, Some(k)) => SensorKind::Camera {
                    intrinsics: CameraIntrinsics {
                        fx: k.fx,
                        fy: k.fy,
                        cx: k.cx,
                        cy: k.cy,
                        skew: k.skew,
                    },
                    width: k.width,
                    height: k.height,
                },
                (KindDto::Lidar, None, _) => {
                    return Err(CliError::Format(format!("LIDAR `{}` has no scan", s.name)))
                }
                (KindDto::Camera, _, None) => {
                    return Err(CliError::Format(format!(
                        "camera `{}` has no intrinsics",
                        s.name
                    )))
                }
            };
            sensors.push(Sensor {
                name: s.name.clone(),
                kind,
                rig_from_sensor: s.pose.to_pose()?,
                confidence: s.confidence,
            });
        }
        let stereo_pairs = self
            .stereo_pairs
            .iter()
            .map(|p| {
                Ok(StereoPair {
                    left: p.left.clone(),
                    right: p.right.clone(),
                    left_from_right: p.left_from_right.to_pose()?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let rig = SensorRig {
            sensors,
            stereo_pairs,
        }
        .validated()?;
        Ok((
            rig,
            TargetModel::new(self.target.width, self.target.height)?,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneDto {
    pub normal: [f64; 3],
    pub offset_vector: [f64; 3],
}

impl From<&Plane> for PlaneDto {
    fn from(p: &Plane) -> Self {
        Self {
            normal: p.normal().into(),
            offset_vector: p.origin_offset().into(),
        }
    }
}

impl PlaneDto {
    fn to_plane(&self) -> CliResult<Plane> {
        Ok(Plane::new(
            Vec3::from(self.normal),
            Vec3::from(self.offset_vector),
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgePointDto {
    /// Edge index, 1 to 4.
    pub edge: u8,
    pub xyz: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SensorObservationDto {
    Lidar {
        planar_points: Vec<[f64; 3]>,
        edge_points: Vec<EdgePointDto>,
        clutter_points: Vec<[f64; 3]>,
        plane: PlaneDto,
    },
    Camera {
        plane: PlaneDto,
        lines: [[f64; 3]; 4],
        corners: [[f64; 2]; 4],
        visible: [bool; 4],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationDto {
    pub index: usize,
    /// `rig_from_target`.
    pub target_pose: PoseDto,
    /// Keyed by sensor name; sensors that missed the target are absent.
    pub sensors: BTreeMap<String, SensorObservationDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseDto {
    pub range_sigma: f64,
    pub pixel_sigma: f64,
    pub clutter_fraction: f64,
}

impl NoiseDto {
    pub fn zero() -> Self {
        Self {
            range_sigma: 0.0,
            pixel_sigma: 0.0,
            clutter_fraction: 0.0,
        }
    }
}

impl From<&NoiseDto> for NoiseModel {
    fn from(n: &NoiseDto) -> Self {
        NoiseModel {
            range_sigma: n.range_sigma,
            pixel_sigma: n.pixel_sigma,
            clutter_fraction: n.clutter_fraction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaDto {
    pub seed: u64,
    pub poses: usize,
    pub range: [f64; 2],
    pub noise: BTreeMap<String, NoiseDto>,
    pub tool: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub rig: RigDto,
    pub observations: Vec<ObservationDto>,
    pub meta: MetaDto,
}

fn v3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl DatasetFile {
    pub fn new(ds: &Dataset) -> Self {
        let observations = ds
            .observations
            .iter()
            .map(|o| {
                let mut sensors = BTreeMap::new();
                for (s, obs) in ds.rig.sensors.iter().zip(&o.sensors) {
                    let Some(obs) = obs else { continue };
                    let dto = match obs {
                        SensorObservation::Lidar(l) => SensorObservationDto::Lidar {
                            planar_points: l.planar_points.iter().map(v3).collect(),
                            edge_points: l
                                .edge_points
                                .iter()
                                .map(|e| EdgePointDto {
                                    edge: e.edge as u8 + 1,
                                    xyz: v3(&e.point),
                                })
                                .collect(),
                            clutter_points: l.clutter_points.iter().map(v3).collect(),
                            plane: (&l.plane).into(),
                        },
                        SensorObservation::Camera(c) => SensorObservationDto::Camera {
                            plane: (&c.plane).into(),
                            lines: c.lines.map(|l| v3(&l.coeffs())),
                            corners: c.corners.map(|p| [p.x, p.y]),
                            visible: c.visible,
                        },
                    };
                    sensors.insert(s.name.clone(), dto);
                }
                ObservationDto {
                    index: o.index,
                    target_pose: (&o.rig_from_target).into(),
                    sensors,
                }
            })
            .collect();
        let noise = ds
            .config
            .noise
            .iter()
            .map(|(k, n)| {
                (
                    k.clone(),
                    NoiseDto {
                        range_sigma: n.range_sigma,
                        pixel_sigma: n.pixel_sigma,
                        clutter_fraction: n.clutter_fraction,
                    },
                )
            })
            .collect();
        Self {
            rig: RigDto::new(&ds.rig, &ds.target),
            observations,
            meta: MetaDto {
                seed: ds.config.seed,
                poses: ds.config.poses,
                range: [ds.config.range.0, ds.config.range.1],
                noise,
                tool: TOOL.into(),
                version: VERSION.into(),
            },
        }
    }

    pub fn to_dataset(&self) -> CliResult<Dataset> {
        let (rig, target) = self.rig.to_rig()?;
        let mut noise = BTreeMap::new();
        for (k, n) in &self.meta.noise {
            noise.insert(k.clone(), NoiseModel::from(n).validated()?);
        }
        let config = SimConfig {
            seed: self.meta.seed,
            poses: self.meta.poses,
            range: (self.meta.range[0], self.meta.range[1]),
            noise,
        };
        let mut observations = Vec::with_capacity(self.observations.len());
        for o in &self.observations {
            for name in o.sensors.keys() {
                rig.sensor(name)?;
            }
            let mut sensors = Vec::with_capacity(rig.sensors.len());
            for s in &rig.sensors {
                let obs = match (o.sensors.get(&s.name), s.is_lidar()) {
                    (None, _) => None,
                    (
                        Some(SensorObservationDto::Lidar {
                            planar_points,
                            edge_points,
                            clutter_points,
                            plane,
                        }),
                        true,
                    ) => {
                        let edge_points = edge_points
                            .iter()
                            .map(|e| {
                                if !(1..=4).contains(&e.edge) {
                                    return Err(CliError::Format(format!(
                                        "edge index {} outside 1..4",
                                        e.edge
                                    )));
                                }
                                Ok(EdgePoint {
                                    edge: e.edge as usize - 1,
                                    point: Vec3::from(e.xyz),
                                })
                            })
                            .collect::<CliResult<Vec<_>>>()?;
                        Some(SensorObservation::Lidar(LidarObservation {
                            planar_points: planar_points.iter().map(|p| Vec3::from(*p)).collect(),
                            edge_points,
                            clutter_points: clutter_points.iter().map(|p| Vec3::from(*p)).collect(),
                            plane: plane.to_plane()?,
                        }))
                    }
                    (
                        Some(SensorObservationDto::Camera {
                            plane,
                            lines,
                            corners,
                            visible,
                        }),
                        false,
                    ) => {
                        let mut ls = [ImageLine::new(1.0, 0.0, 0.0)?; 4];
                        for (dst, src) in ls.iter_mut().zip(lines) {
                            *dst = ImageLine::from_homogeneous(Vec3::from(*src))?;
                        }
                        Some(SensorObservation::Camera(CameraObservation {
                            plane: plane.to_plane()?,
                            lines: ls,
                            corners: corners.map(|c| Vec2::new(c[0], c[1])),
                            visible: *visible,
                        }))
                    }
                    _ => {
                        return Err(CliError::Format(format!(
                            "observation {} of `{}` does not match the sensor kind",
                            o.index, s.name
                        )))
                    }
                };
                sensors.push(obs);
            }
            observations.push(Observation {
                index: o.index,
                rig_from_target: o.target_pose.to_pose()?,
                sensors,
            });
        }
        Ok(Dataset {
            rig,
            target,
            config,
            observations,
        })
    }
}

/// One solved sensor pair: `pose` is `a_from_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResultDto {
    pub a: String,
    pub b: String,
    pub pose: PoseDto,
    pub converged: bool,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub termination: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalResultDto {
    pub sensors: Vec<String>,
    /// `sensor_from_global` per sensor; the first is the gauge.
    pub nodes: Vec<PoseDto>,
    pub converged: bool,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub termination: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub method: String,
    pub init: String,
    pub dataset_seed: u64,
    /// Final extrinsics; for a global solve, every pair derived from the graph.
    pub pairs: Vec<PairResultDto>,
    /// Pairwise solves that seeded the graph.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairwise: Vec<PairResultDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<GlobalResultDto>,
    pub tool: String,
    pub version: String,
}

impl CalibrationFile {
    /// `a_from_b` from the stored pairs, inverting a stored `b_from_a` if needed.
    pub fn extrinsic(&self, a: &str, b: &str) -> CliResult<Option<Pose>> {
        for p in &self.pairs {
            if p.a == a && p.b == b {
                return Ok(Some(p.pose.to_pose()?));
            }
            if p.a == b && p.b == a {
                return Ok(Some(p.pose.to_pose()?.inverse()));
            }
        }
        Ok(None)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Single-line JSON, for datasets where indentation would dominate the size.
pub fn to_compact_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string(value).map_err(|e| CliError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Format(format!("{what}: {e}")))
}

pub fn read_dataset(path: &std::path::Path) -> CliResult<Dataset> {
    let text = crate::io::read(path)?;
    from_json::<DatasetFile>(&text, &path.display().to_string())?.to_dataset()
}

pub fn read_rig(path: &std::path::Path) -> CliResult<(SensorRig, TargetModel)> {
    let text = crate::io::read(path)?;
    from_json::<RigDto>(&text, &path.display().to_string())?.to_rig()
}

pub fn read_calibration(path: &std::path::Path) -> CliResult<CalibrationFile> {
    let text = crate::io::read(path)?;
    from_json(&text, &path.display().to_string())
}
