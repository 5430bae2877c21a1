use rand::Rng;

use super::{SensorKind, SensorRig, TargetModel};
use crate::geom::{Mat3, Pose, Rotation, Vec3};
use crate::prelude::*;

pub const MAX_POSE_ATTEMPTS_PER_VIEW: usize = 5000;

/// Minimum height difference between the topmost edge midpoint and the
/// runner-up, so edge labels are unambiguous for every sensor.
const TOP_EDGE_MARGIN: f64 = 0.05;
const MIN_EDGE_CHANNELS: usize = 4;
const IMAGE_MARGIN_PX: f64 = 10.0;
const MAX_INCIDENCE: f64 = 60.0;

/// Samples target poses held diagonally in front of the rig.
///
/// In-plane roll is drawn from [30, 60] degrees so no edge runs along a LIDAR
/// scan line. Every pose keeps all four corners inside every camera image and
/// every LIDAR's vertical field of view, and gives each edge at least four
/// scan-line crossings per LIDAR.
pub fn sample_target_poses<R: Rng>(
    rig: &SensorRig,
    target: &TargetModel,
    n: usize,
    range: (f64, f64),
    rng: &mut R,
) -> Result<Vec<Pose>> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "at least one target pose is required".into(),
        ));
    }
    if !(range.0 > 0.0 && range.1 >= range.0) {
        return Err(Error::InvalidInput(
            "range interval must be positive and ordered".into(),
        ));
    }
    let cap = MAX_POSE_ATTEMPTS_PER_VIEW * n;
    let mut attempts = 0;
    loop {
        let mut poses = Vec::with_capacity(n);
        while poses.len() < n {
            attempts += 1;
            if attempts > cap {
                return Err(Error::InfeasibleScene(attempts - 1));
            }
            let pose = draw_pose(range, rng);
            if is_feasible(rig, target, &pose) {
                poses.push(pose);
            }
        }
        if n < 3 || normals_span_space(&poses) {
            return Ok(poses);
        }
    }
}

fn draw_pose<R: Rng>(range: (f64, f64), rng: &mut R) -> Pose {
    let deg = |d: f64| d.to_radians();
    let r = if range.1 > range.0 {
        rng.random_range(range.0..range.1)
    } else {
        range.0
    };
    let az = rng.random_range(deg(-15.0)..deg(15.0));
    let el = rng.random_range(deg(-5.0)..deg(5.0));
    let center = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()) * r;
    let forward = center.normalize();
    let z0 = -forward;
    let x0 = forward.cross(&Vec3::z()).normalize();
    let y0 = z0.cross(&x0);
    let facing =
        Rotation::from_matrix(&Mat3::from_columns(&[x0, y0, z0])).expect("orthonormal frame");
    let yaw = rng.random_range(deg(-35.0)..deg(35.0));
    let pitch = rng.random_range(deg(-30.0)..deg(30.0));
    let roll = rng.random_range(deg(30.0)..deg(60.0));
    let rotation = facing * Rotation::ry(yaw) * Rotation::rx(pitch) * Rotation::rz(roll);
    Pose::new(rotation, center)
}

fn is_feasible(rig: &SensorRig, target: &TargetModel, rig_from_target: &Pose) -> bool {
    if target.top_edge(rig_from_target, &Vec3::z()).1 < TOP_EDGE_MARGIN {
        return false;
    }
    let local = target.corners();
    for sensor in &rig.sensors {
        let sensor_from_target = sensor.sensor_from_rig() * *rig_from_target;
        let center = sensor_from_target.translation;
        let normal = sensor_from_target.rotation * Vec3::z();
        let cos_incidence = -normal.dot(&center) / center.norm();
        if cos_incidence < MAX_INCIDENCE.to_radians().cos() {
            return false;
        }
        let corners = local.map(|c| sensor_from_target.transform_point(&c));
        match &sensor.kind {
            SensorKind::Camera {
                intrinsics,
                width,
                height,
            } => {
                for c in &corners {
                    if c.z < 0.3 {
                        return false;
                    }
                    let px = match intrinsics.project_camera(c) {
                        Ok(px) => px,
                        Err(_) => return false,
                    };
                    if px.x < IMAGE_MARGIN_PX
                        || px.y < IMAGE_MARGIN_PX
                        || px.x > *width as f64 - IMAGE_MARGIN_PX
                        || px.y > *height as f64 - IMAGE_MARGIN_PX
                    {
                        return false;
                    }
                }
            }
            SensorKind::Lidar(pattern) => {
                let spacing = pattern.channel_spacing();
                let elevation = |c: &Vec3| c.z.atan2(c.x.hypot(c.y));
                for c in &corners {
                    let e = elevation(c);
                    if c.x <= 0.0 || c.y.atan2(c.x).abs() > 80f64.to_radians() {
                        return false;
                    }
                    if e < pattern.elevation_min + spacing || e > pattern.elevation_max - spacing {
                        return false;
                    }
                }
                for j in 0..4 {
                    let (a, b) = (elevation(&corners[j]), elevation(&corners[(j + 1) % 4]));
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    let crossings = (0..pattern.channels).filter(|&k| {
                        let e = pattern.elevation(k);
                        e > lo && e < hi
                    });
                    if crossings.count() < MIN_EDGE_CHANNELS {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Smallest singular value of the stacked target normals exceeds 1e-3.
fn normals_span_space(poses: &[Pose]) -> bool {
    let mut gram = Mat3::zeros();
    for p in poses {
        let n = p.rotation * Vec3::z();
        gram += n * n.transpose();
    }
    let eig = gram.symmetric_eigenvalues();
    eig.min().max(0.0).sqrt() > 1e-3
}
