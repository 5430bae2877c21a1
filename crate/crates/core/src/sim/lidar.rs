use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::{EdgePoint, LidarObservation, NoiseModel};
use super::{SensorRig, TargetModel};
use crate::geom::{Plane, Pose};
use crate::prelude::*;

const CLUTTER_RANGE: (f64, f64) = (1.0, 8.0);
const CLUTTER_AZIMUTH_PAD: f64 = 30.0;

fn ray(elevation: f64, azimuth: f64) -> Vec3 {
    Vec3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    )
}

/// Range along a unit ray (LIDAR frame) to the target rectangle, if hit.
fn hit_target(target_from_lidar: &Pose, target: &TargetModel, dir: &Vec3) -> Option<f64> {
    let o = target_from_lidar.translation;
    let d = target_from_lidar.rotation * *dir;
    if d.z.abs() < 1e-12 {
        return None;
    }
    let s = -o.z / d.z;
    if s <= 0.0 {
        return None;
    }
    let p = o + d * s;
    (p.x.abs() <= 0.5 * target.width && p.y.abs() <= 0.5 * target.height).then_some(s)
}

/// Points of segment `a + tau (b - a)`, `tau` in [0, 1], at the given elevation.
fn segment_at_elevation(a: &Vec3, b: &Vec3, elevation: f64) -> Vec<Vec3> {
    let d = b - a;
    let (c2, s2) = (elevation.cos().powi(2), elevation.sin().powi(2));
    let qa = c2 * d.z * d.z - s2 * (d.x * d.x + d.y * d.y);
    let qb = 2.0 * (c2 * a.z * d.z - s2 * (a.x * d.x + a.y * d.y));
    let qc = c2 * a.z * a.z - s2 * (a.x * a.x + a.y * a.y);
    let mut roots = Vec::new();
    if qa.abs() < 1e-14 {
        if qb.abs() > 1e-14 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            roots.push(q / qa);
            if q != 0.0 {
                roots.push(qc / q);
            }
        }
    }
    roots
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .map(|t| a + d * t)
        .filter(|x| x.z * elevation.sin() >= 0.0)
        .collect()
}

/// Ray-casts one LIDAR's scan grid against the target.
///
/// Each scan line contributes its grid returns on the target plus the two
/// returns where it crosses the target boundary; the latter are the labeled
/// edge points. Range noise is applied along each ray. Clutter returns are
/// drawn on the scan grid at uniform ranges in a shell around the scene.
pub fn simulate_lidar_scan<R: Rng>(
    rig: &SensorRig,
    sensor: usize,
    target: &TargetModel,
    rig_from_target: &Pose,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<LidarObservation> {
    let s = rig
        .sensors
        .get(sensor)
        .ok_or_else(|| Error::InvalidInput("sensor index out of range".into()))?;
    let pattern = s.scan_pattern()?;
    let lidar_from_target = s.sensor_from_rig() * *rig_from_target;
    let target_from_lidar = lidar_from_target.inverse();
    let plane = Plane::new(
        lidar_from_target.rotation * Vec3::z(),
        lidar_from_target.translation,
    )?;
    let corners = target
        .corners()
        .map(|c| lidar_from_target.transform_point(&c));

    let range_noise = if noise.range_sigma > 0.0 {
        Some(
            Normal::new(0.0, noise.range_sigma)
                .map_err(|_| Error::InvalidInput("bad range sigma".into()))?,
        )
    } else {
        None
    };
    let perturb = |dir: Vec3, range: f64, rng: &mut R| {
        dir * (range + range_noise.map_or(0.0, |n| n.sample(rng)))
    };

    let azimuths = corners.map(|c| c.y.atan2(c.x));
    let az_min = azimuths.iter().copied().fold(f64::INFINITY, f64::min);
    let az_max = azimuths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let step = pattern.azimuth_step;
    let (col_lo, col_hi) = (
        (az_min / step).floor() as i64,
        (az_max / step).ceil() as i64,
    );

    let mut planar_points = Vec::new();
    let mut edge_points = Vec::new();
    for k in 0..pattern.channels {
        let elevation = pattern.elevation(k);
        let mut ring: Vec<(f64, Vec3, Option<usize>)> = Vec::new();
        for col in col_lo..=col_hi {
            let az = col as f64 * step;
            let dir = ray(elevation, az);
            if let Some(range) = hit_target(&target_from_lidar, target, &dir) {
                ring.push((az, perturb(dir, range, rng), None));
            }
        }
        for j in 0..4 {
            for x in segment_at_elevation(&corners[j], &corners[(j + 1) % 4], elevation) {
                let range = x.norm();
                let label = target.edge_label(rig_from_target, j);
                ring.push((x.y.atan2(x.x), perturb(x / range, range, rng), Some(label)));
            }
        }
        ring.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, p, label) in ring {
            planar_points.push(p);
            if let Some(edge) = label {
                edge_points.push(EdgePoint { edge, point: p });
            }
        }
    }
    if planar_points.is_empty() {
        return Err(Error::NoReturns);
    }

    let mut clutter_points = Vec::new();
    if noise.clutter_fraction > 0.0 {
        let f = noise.clutter_fraction;
        let count = (planar_points.len() as f64 * f / (1.0 - f)).round() as usize;
        let pad = (CLUTTER_AZIMUTH_PAD.to_radians() / step).ceil() as i64;
        while clutter_points.len() < count {
            let k = rng.random_range(0..pattern.channels);
            let col = rng.random_range(col_lo - pad..=col_hi + pad);
            let range = rng.random_range(CLUTTER_RANGE.0..CLUTTER_RANGE.1);
            let dir = ray(pattern.elevation(k), col as f64 * step);
            if hit_target(&target_from_lidar, target, &dir).is_none() {
                clutter_points.push(dir * range);
            }
        }
    }
    Ok(LidarObservation {
        planar_points,
        edge_points,
        clutter_points,
        plane,
    })
}
