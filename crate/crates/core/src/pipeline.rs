//! Dataset-level calibration: feature extraction per view, then the three
//! formulations over a named sensor pair or the whole rig.

use alloc::string::{String, ToString};

use nalgebra::Matrix6;

use crate::features::{
    boundary_candidates, canonical_corner_order, edge_threshold, extract_edge_lines, fit_plane_lsq,
    image_lines_from_corners, planar_pnp, ransac_plane, ransac_threshold, restrict_to_board,
    PnpSolution,
};
use crate::geom::{ImageLine, Plane, Pose};
use crate::metrics::{mlre, MlreFrame, MlreLine, MlreReport};
use crate::prelude::*;
use crate::rng::{stream, Purpose};
use crate::sim::{Dataset, SensorKind};
use crate::solvers::{
    self, optimize_graph, EdgeCorrespondence, PairwiseEdge, PbpcView, PlaneEdge, PlanePair,
    PlaneView, PoseGraph, SolveReport, SolverOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ppc,
    Pbpc,
    Msg,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ppc, Method::Pbpc, Method::Msg];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ppc => "ppc",
            Method::Pbpc => "pbpc",
            Method::Msg => "msg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    pub solver: SolverOptions,
    pub ransac_iterations: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            ransac_iterations: 200,
        }
    }
}

/// What one LIDAR yields for one view.
#[derive(Clone, Debug, PartialEq)]
pub struct LidarFeatures {
    /// Least-squares plane through `board_points`, facing the sensor.
    pub plane: Plane,
    pub board_points: Vec<Vec3>,
    /// Boundary points per board edge, indexed by edge label, or the reason
    /// the edges could not be recovered.
    pub edges: Result<[Vec<Vec3>; 4]>,
}

/// What one camera yields for one view.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraFeatures {
    /// Corners in canonical order: counterclockwise, edge 0 on top.
    pub corners: [Vec2; 4],
    pub lines: [ImageLine; 4],
    /// Board plane from planar PnP on `corners`.
    pub pnp: Result<PnpSolution>,
    /// Board plane as a checkerboard detector would report it.
    pub checkerboard_plane: Plane,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SensorFeatures {
    Lidar(Result<LidarFeatures>),
    Camera(Result<CameraFeatures>),
}

/// Features per view, per sensor in rig order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub views: Vec<Vec<Option<SensorFeatures>>>,
}

impl FeatureSet {
    pub fn lidar(&self, view: usize, sensor: usize) -> Option<&LidarFeatures> {
        match self.views.get(view)?.get(sensor)? {
            Some(SensorFeatures::Lidar(Ok(f))) => Some(f),
            _ => None,
        }
    }

    pub fn camera(&self, view: usize, sensor: usize) -> Option<&CameraFeatures> {
        match self.views.get(view)?.get(sensor)? {
            Some(SensorFeatures::Camera(Ok(f))) => Some(f),
            _ => None,
        }
    }

    /// Board plane used by the plane-pair formulation: RANSAC for LIDARs,
    /// fiducial board plane for cameras.
    fn msg_plane(&self, view: usize, sensor: usize) -> Option<Plane> {
        match self.views.get(view)?.get(sensor)? {
            Some(SensorFeatures::Lidar(Ok(f))) => Some(f.plane),
            Some(SensorFeatures::Camera(Ok(f))) => Some(f.checkerboard_plane),
            _ => None,
        }
    }
}

/// LIDAR feature extraction with RANSAC thresholds multiplied by `scale`.
pub fn extract_lidar(
    dataset: &Dataset,
    view: usize,
    sensor: usize,
    scale: f64,
    opts: &PipelineOptions,
) -> Result<LidarFeatures> {
    let s = &dataset.rig.sensors[sensor];
    let pattern = s.scan_pattern()?;
    let obs = dataset.observations[view].sensors[sensor]
        .as_ref()
        .and_then(|o| o.as_lidar())
        .ok_or_else(|| Error::TargetNotVisible(s.name.clone()))?;
    let points = obs.all_points();
    let seed = dataset.config.seed;
    let thr = ransac_threshold(dataset.config.noise_for(&s.name).range_sigma, scale);
    let fit = ransac_plane(
        &points,
        thr,
        opts.ransac_iterations,
        &mut stream(seed, Purpose::Ransac, view as u64, 2 * sensor as u64),
    )?;
    let board = restrict_to_board(&points, &fit, dataset.target.half_diagonal());
    let board_points: Vec<Vec3> = board.iter().map(|&i| points[i]).collect();
    let plane = fit_plane_lsq(&board_points)
        .unwrap_or(fit.plane)
        .facing_origin();
    let candidates: Vec<Vec3> = boundary_candidates(&points, &board, pattern)
        .iter()
        .map(|&i| points[i])
        .collect();
    let edges = extract_edge_lines(
        &candidates,
        &plane,
        &s.up(),
        edge_threshold(&candidates, pattern.azimuth_step, scale),
        &mut stream(seed, Purpose::Ransac, view as u64, 2 * sensor as u64 + 1),
    )
    .map(|fits| fits.map(|f| f.inliers.iter().map(|&i| candidates[i]).collect()));
    Ok(LidarFeatures {
        plane,
        board_points,
        edges,
    })
}

pub fn extract_camera(dataset: &Dataset, view: usize, sensor: usize) -> Result<CameraFeatures> {
    let s = &dataset.rig.sensors[sensor];
    let k = s.intrinsics()?;
    let obs = dataset.observations[view].sensors[sensor]
        .as_ref()
        .and_then(|o| o.as_camera())
        .ok_or_else(|| Error::TargetNotVisible(s.name.clone()))?;
    let order = canonical_corner_order(&obs.corners);
    let corners = order.map(|i| obs.corners[i]);
    let lines = image_lines_from_corners(&corners)?;
    let pnp = planar_pnp(&corners, &dataset.target, k);
    Ok(CameraFeatures {
        corners,
        lines,
        pnp,
        checkerboard_plane: obs.plane,
    })
}

/// Features of every sensor in one view.
pub fn extract_view(
    dataset: &Dataset,
    view: usize,
    opts: &PipelineOptions,
) -> Vec<Option<SensorFeatures>> {
    dataset
        .rig
        .sensors
        .iter()
        .enumerate()
        .map(|(s, sensor)| {
            dataset.observations[view].sensors[s].as_ref()?;
            Some(match sensor.kind {
                SensorKind::Lidar(_) => {
                    SensorFeatures::Lidar(extract_lidar(dataset, view, s, 1.0, opts))
                }
                SensorKind::Camera { .. } => {
                    SensorFeatures::Camera(extract_camera(dataset, view, s))
                }
            })
        })
        .collect()
}

pub fn extract_features(dataset: &Dataset, opts: &PipelineOptions) -> FeatureSet {
    FeatureSet {
        views: (0..dataset.observations.len())
            .map(|v| extract_view(dataset, v, opts))
            .collect(),
    }
}

/// A calibrated `a_from_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCalibration {
    pub sensor_a: String,
    pub sensor_b: String,
    pub method: Method,
    pub pose: Pose,
    pub report: SolveReport,
}

fn camera_lidar(dataset: &Dataset, camera: &str, lidar: &str) -> Result<(usize, usize)> {
    let (c, cs) = dataset.rig.sensor(camera)?;
    let (l, ls) = dataset.rig.sensor(lidar)?;
    if !cs.is_camera() {
        return Err(Error::WrongSensorKind(camera.to_string()));
    }
    if !ls.is_lidar() {
        return Err(Error::WrongSensorKind(lidar.to_string()));
    }
    Ok((c, l))
}

/// Point-to-plane views: board points with the checkerboard plane.
pub fn ppc_views(features: &FeatureSet, camera: usize, lidar: usize) -> Vec<PlaneView> {
    (0..features.views.len())
        .filter_map(|v| {
            let l = features.lidar(v, lidar)?;
            let c = features.camera(v, camera)?;
            Some(PlaneView {
                points: l.board_points.clone(),
                plane: c.checkerboard_plane,
            })
        })
        .collect()
}

/// Edge views: board points with the PnP plane, and extracted LIDAR edges
/// matched to image lines by label.
pub fn pbpc_views(features: &FeatureSet, camera: usize, lidar: usize) -> Vec<PbpcView> {
    (0..features.views.len())
        .filter_map(|v| {
            let l = features.lidar(v, lidar)?;
            let c = features.camera(v, camera)?;
            let pnp = c.pnp.as_ref().ok()?;
            let edges = match &l.edges {
                Ok(e) => e
                    .iter()
                    .zip(&c.lines)
                    .map(|(points, line)| EdgeCorrespondence {
                        line: *line,
                        points: points.clone(),
                    })
                    .collect(),
                Err(_) => Vec::new(),
            };
            Some(PbpcView {
                plane: PlaneView {
                    points: l.board_points.clone(),
                    plane: pnp.plane,
                },
                edges,
            })
        })
        .collect()
}

pub fn calibrate_ppc(
    dataset: &Dataset,
    features: &FeatureSet,
    camera: &str,
    lidar: &str,
    init: &Pose,
    opts: &PipelineOptions,
) -> Result<PairCalibration> {
    let (c, l) = camera_lidar(dataset, camera, lidar)?;
    let (pose, report) = solvers::calibrate_ppc(&ppc_views(features, c, l), init, &opts.solver)?;
    Ok(PairCalibration {
        sensor_a: camera.to_string(),
        sensor_b: lidar.to_string(),
        method: Method::Ppc,
        pose,
        report,
    })
}

pub fn calibrate_pbpc(
    dataset: &Dataset,
    features: &FeatureSet,
    camera: &str,
    lidar: &str,
    init: &Pose,
    opts: &PipelineOptions,
) -> Result<PairCalibration> {
    let (c, l) = camera_lidar(dataset, camera, lidar)?;
    let k = dataset.rig.sensors[c].intrinsics()?;
    let sol = solvers::calibrate_pbpc(&pbpc_views(features, c, l), k, init, &opts.solver)?;
    Ok(PairCalibration {
        sensor_a: camera.to_string(),
        sensor_b: lidar.to_string(),
        method: Method::Pbpc,
        pose: sol.pose,
        report: sol.stage2,
    })
}

/// Threshold scale for a pair: `2 / (conf_a + conf_b)`.
fn confidence_scale(dataset: &Dataset, a: usize, b: usize) -> f64 {
    2.0 / (dataset.rig.sensors[a].confidence + dataset.rig.sensors[b].confidence)
}

/// Shared-view plane pairs for sensors `a` and `b`, re-fitting LIDAR planes
/// when confidences change the RANSAC threshold.
pub fn plane_pairs(
    dataset: &Dataset,
    features: &FeatureSet,
    a: usize,
    b: usize,
    opts: &PipelineOptions,
) -> Vec<PlanePair> {
    let scale = confidence_scale(dataset, a, b);
    let plane = |v: usize, s: usize| -> Option<Plane> {
        if dataset.rig.sensors[s].is_lidar() && (scale - 1.0).abs() > 1e-12 {
            extract_lidar(dataset, v, s, scale, opts)
                .ok()
                .map(|f| f.plane)
        } else {
            features.msg_plane(v, s)
        }
    };
    (0..features.views.len())
        .filter_map(|v| {
            Some(PlanePair {
                a: plane(v, a)?,
                b: plane(v, b)?,
            })
        })
        .collect()
}

/// Plane-pair calibration of `a_from_b` with its information matrix.
pub fn calibrate_msg_pairwise(
    dataset: &Dataset,
    features: &FeatureSet,
    a: &str,
    b: &str,
    init: &Pose,
    opts: &PipelineOptions,
) -> Result<(PairCalibration, Matrix6<f64>)> {
    let (ia, _) = dataset.rig.sensor(a)?;
    let (ib, _) = dataset.rig.sensor(b)?;
    if ia == ib {
        return Err(Error::InvalidInput(
            "a sensor cannot be calibrated against itself".into(),
        ));
    }
    let pairs = plane_pairs(dataset, features, ia, ib, opts);
    let sol = solvers::calibrate_msg_pair(&pairs, init, 1.0, &opts.solver)?;
    let cal = PairCalibration {
        sensor_a: a.to_string(),
        sensor_b: b.to_string(),
        method: Method::Msg,
        pose: sol.pose,
        report: sol.report,
    };
    Ok((cal, sol.information))
}

/// Result of the global graph over a set of sensors.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalCalibration {
    pub sensors: Vec<String>,
    /// `sensor_from_global` per sensor; the first sensor is the gauge.
    pub nodes: Vec<Pose>,
    pub report: SolveReport,
    /// The pairwise solves that seeded the graph.
    pub pairwise: Vec<PairCalibration>,
}

impl GlobalCalibration {
    pub fn extrinsic(&self, a: &str, b: &str) -> Result<Pose> {
        let find = |n: &str| {
            self.sensors
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| Error::UnknownSensor(n.to_string()))
        };
        let (ia, ib) = (find(a)?, find(b)?);
        Ok(self.nodes[ia] * self.nodes[ib].inverse())
    }

    /// Every `a_from_b` with `a` before `b` in sensor order.
    pub fn derived_pairs(&self) -> Vec<PairCalibration> {
        let mut out = Vec::new();
        for a in 0..self.sensors.len() {
            for b in a + 1..self.sensors.len() {
                out.push(PairCalibration {
                    sensor_a: self.sensors[a].clone(),
                    sensor_b: self.sensors[b].clone(),
                    method: Method::Msg,
                    pose: self.nodes[a] * self.nodes[b].inverse(),
                    report: self.report.clone(),
                });
            }
        }
        out
    }
}

/// Pairwise plane-pair solves from the identity for every sensor pair with
/// enough shared views, then one graph optimization over all sensors.
pub fn calibrate_msg_global(
    dataset: &Dataset,
    features: &FeatureSet,
    sensors: &[&str],
    opts: &PipelineOptions,
) -> Result<GlobalCalibration> {
    let idx: Vec<usize> = sensors
        .iter()
        .map(|s| dataset.rig.sensor(s).map(|x| x.0))
        .collect::<Result<_>>()?;
    for (i, a) in idx.iter().enumerate() {
        if idx[..i].contains(a) {
            return Err(Error::InvalidInput(format!(
                "sensor `{}` listed twice",
                sensors[i]
            )));
        }
    }
    let mut graph = PoseGraph {
        nodes: idx.len(),
        gauge: 0,
        pairwise: Vec::new(),
        planes: Vec::new(),
    };
    let mut pairwise = Vec::new();
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let pairs = plane_pairs(dataset, features, idx[a], idx[b], opts);
            let sol =
                match solvers::calibrate_msg_pair(&pairs, &Pose::identity(), 1.0, &opts.solver) {
                    Ok(s) => s,
                    Err(Error::InsufficientViews(_)) => continue,
                    Err(e) => return Err(e),
                };
            let (ca, cb) = (
                dataset.rig.sensors[idx[a]].confidence,
                dataset.rig.sensors[idx[b]].confidence,
            );
            graph.pairwise.push(PairwiseEdge {
                a,
                b,
                a_from_b: sol.pose,
                information: sol.information * (ca * cb).powi(2),
            });
            for p in &pairs {
                graph.planes.push(PlaneEdge {
                    a,
                    b,
                    plane_a: p.a,
                    plane_b: p.b,
                    weight: ca * cb,
                });
            }
            pairwise.push(PairCalibration {
                sensor_a: sensors[a].to_string(),
                sensor_b: sensors[b].to_string(),
                method: Method::Msg,
                pose: sol.pose,
                report: sol.report,
            });
        }
    }
    let sol = optimize_graph(&graph, None, &opts.solver)?;
    Ok(GlobalCalibration {
        sensors: sensors.iter().map(|s| s.to_string()).collect(),
        nodes: sol.nodes,
        report: sol.report,
        pairwise,
    })
}

/// Evaluation frames for a camera/LIDAR pair: the camera's image lines with
/// the LIDAR returns that lie on each edge.
pub fn mlre_frames(dataset: &Dataset, camera: &str, lidar: &str) -> Result<Vec<MlreFrame>> {
    let (c, l) = camera_lidar(dataset, camera, lidar)?;
    Ok(dataset
        .observations
        .iter()
        .filter_map(|o| {
            let cam = o.sensors[c].as_ref()?.as_camera()?;
            let lid = o.sensors[l].as_ref()?.as_lidar()?;
            let lines = (0..4)
                .map(|j| MlreLine {
                    line: cam.lines[j],
                    points: lid
                        .edge_points
                        .iter()
                        .filter(|e| e.edge == j)
                        .map(|e| e.point)
                        .collect(),
                })
                .collect();
            Some(MlreFrame { lines })
        })
        .collect())
}

/// Line reprojection error of a `camera_from_lidar` estimate.
pub fn evaluate_mlre(
    dataset: &Dataset,
    camera: &str,
    lidar: &str,
    camera_from_lidar: &Pose,
) -> Result<MlreReport> {
    let (c, _) = camera_lidar(dataset, camera, lidar)?;
    mlre(
        camera_from_lidar,
        dataset.rig.sensors[c].intrinsics()?,
        &mlre_frames(dataset, camera, lidar)?,
    )
}
