use alloc::string::ToString;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::{CameraObservation, NoiseModel};
use super::{SensorKind, SensorRig, TargetModel};
use crate::geom::{ImageLine, Plane, Pose};
use crate::prelude::*;

/// Projects the target corners into one camera, perturbs them with pixel
/// noise, and fits the four edge lines through the noisy corners.
pub fn simulate_camera_view<R: Rng>(
    rig: &SensorRig,
    sensor: usize,
    target: &TargetModel,
    rig_from_target: &Pose,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<CameraObservation> {
    let s = rig
        .sensors
        .get(sensor)
        .ok_or_else(|| Error::InvalidInput("sensor index out of range".into()))?;
    let SensorKind::Camera {
        intrinsics,
        width,
        height,
    } = &s.kind
    else {
        return Err(Error::WrongSensorKind(s.name.clone()));
    };
    let camera_from_target = s.sensor_from_rig() * *rig_from_target;
    let pixel_noise = if noise.pixel_sigma > 0.0 {
        Some(
            Normal::new(0.0, noise.pixel_sigma)
                .map_err(|_| Error::InvalidInput("bad pixel sigma".into()))?,
        )
    } else {
        None
    };

    let labeled = target.labeled_corners(rig_from_target);
    let mut corners = [Vec2::zeros(); 4];
    let mut visible = [false; 4];
    for (j, c) in labeled.iter().enumerate() {
        let px = intrinsics
            .project_camera(&camera_from_target.transform_point(c))
            .map_err(|_| Error::TargetNotVisible(s.name.to_string()))?;
        visible[j] = px.x >= 0.0 && px.y >= 0.0 && px.x < *width as f64 && px.y < *height as f64;
        let jitter = match &pixel_noise {
            Some(n) => Vec2::new(n.sample(rng), n.sample(rng)),
            None => Vec2::zeros(),
        };
        corners[j] = px + jitter;
    }
    if !visible.iter().any(|v| *v) {
        return Err(Error::TargetNotVisible(s.name.to_string()));
    }
    let mut lines = [ImageLine::new(1.0, 0.0, 0.0)?; 4];
    for j in 0..4 {
        lines[j] = ImageLine::through(&corners[j], &corners[(j + 1) % 4])?;
    }
    let plane = Plane::new(
        camera_from_target.rotation * Vec3::z(),
        camera_from_target.translation,
    )?;
    Ok(CameraObservation {
        plane,
        lines,
        corners,
        visible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::sim::sample_target_poses;

    fn setup() -> (SensorRig, TargetModel, Vec<Pose>) {
        let rig = SensorRig::default_rig();
        let target = TargetModel::default();
        let poses = sample_target_poses(
            &rig,
            &target,
            10,
            (2.5, 4.5),
            &mut stream(21, Purpose::TargetPoses, 0, 0),
        )
        .unwrap();
        (rig, target, poses)
    }

    #[test]
    fn noiseless_lines_pass_through_corners() {
        let (rig, target, poses) = setup();
        let (cam, sensor) = rig.sensor("basler").unwrap();
        for pose in &poses {
            let obs = simulate_camera_view(
                &rig,
                cam,
                &target,
                pose,
                &NoiseModel::default(),
                &mut stream(0, Purpose::Camera, 0, 0),
            )
            .unwrap();
            for j in 0..4 {
                assert!(obs.lines[j].distance(&obs.corners[j]) < 1e-10);
                assert!(obs.lines[j].distance(&obs.corners[(j + 1) % 4]) < 1e-10);
            }
            let z = (sensor.sensor_from_rig() * *pose).rotation * Vec3::z();
            assert!((obs.plane.normal() - z).norm() < 1e-14);
            assert!(obs.visible.iter().all(|v| *v));
        }
    }

    #[test]
    fn pixel_noise_statistics() {
        let (rig, target, poses) = setup();
        let (cam, sensor) = rig.sensor("stereo_left").unwrap();
        let k = sensor.intrinsics().unwrap();
        let noise = NoiseModel {
            pixel_sigma: 0.5,
            ..Default::default()
        };
        let (mut sum, mut count) = (0.0, 0usize);
        for i in 0..250 {
            let pose = &poses[i % poses.len()];
            let obs = simulate_camera_view(
                &rig,
                cam,
                &target,
                pose,
                &noise,
                &mut stream(3, Purpose::Camera, i as u64, 0),
            )
            .unwrap();
            let truth = target
                .labeled_corners(pose)
                .map(|c| crate::geom::project(k, &(sensor.sensor_from_rig() * *pose), &c).unwrap());
            for j in 0..4 {
                let d = obs.corners[j] - truth[j];
                sum += d.norm_squared() / 2.0;
                count += 1;
            }
        }
        assert_eq!(count, 1000);
        let rms = (sum / count as f64).sqrt();
        assert!((0.35..=0.65).contains(&rms), "rms {rms}");
    }

    #[test]
    fn rejects_lidar_and_hidden_targets() {
        let (rig, target, poses) = setup();
        let (lidar, _) = rig.sensor("os1_64").unwrap();
        let mut rng = stream(0, Purpose::Camera, 0, 0);
        assert!(matches!(
            simulate_camera_view(
                &rig,
                lidar,
                &target,
                &poses[0],
                &NoiseModel::default(),
                &mut rng
            ),
            Err(Error::WrongSensorKind(_))
        ));
        let (cam, _) = rig.sensor("basler").unwrap();
        let behind = Pose::new(poses[0].rotation, -poses[0].translation);
        assert!(matches!(
            simulate_camera_view(
                &rig,
                cam,
                &target,
                &behind,
                &NoiseModel::default(),
                &mut rng
            ),
            Err(Error::TargetNotVisible(_))
        ));
    }
}
