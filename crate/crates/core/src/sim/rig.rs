use alloc::string::{String, ToString};

use crate::geom::{CameraIntrinsics, Mat3, Pose, Rotation, Vec3};
use crate::prelude::*;

/// Spinning-LIDAR scan grid: evenly spaced channels between two elevations,
/// fixed azimuth step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPattern {
    pub channels: usize,
    pub elevation_min: f64,
    pub elevation_max: f64,
    pub azimuth_step: f64,
}

impl ScanPattern {
    pub fn validated(self) -> Result<Self> {
        if self.channels < 2
            || !(self.azimuth_step > 0.0)
            || !(self.elevation_max > self.elevation_min)
        {
            return Err(Error::InvalidInput(
                "scan pattern needs >= 2 channels, positive step, ordered FoV".into(),
            ));
        }
        Ok(self)
    }

    pub fn channel_spacing(&self) -> f64 {
        (self.elevation_max - self.elevation_min) / (self.channels - 1) as f64
    }

    pub fn elevation(&self, channel: usize) -> f64 {
        self.elevation_min + channel as f64 * self.channel_spacing()
    }

    /// Channel a direction belongs to, if it lies on the grid.
    pub fn channel_of(&self, dir: &Vec3) -> Option<usize> {
        let el = dir.z.atan2(dir.x.hypot(dir.y));
        let k = ((el - self.elevation_min) / self.channel_spacing()).round();
        if k < 0.0 || k >= self.channels as f64 {
            return None;
        }
        Some(k as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SensorKind {
    Lidar(ScanPattern),
    Camera {
        intrinsics: CameraIntrinsics,
        width: u32,
        height: u32,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sensor {
    pub name: String,
    pub kind: SensorKind,
    /// Pose of the sensor in the rig frame.
    pub rig_from_sensor: Pose,
    /// Relative trust in this sensor's measurements, in (0, 1].
    pub confidence: f64,
}

impl Sensor {
    pub fn is_lidar(&self) -> bool {
        matches!(self.kind, SensorKind::Lidar(_))
    }

    pub fn is_camera(&self) -> bool {
        matches!(self.kind, SensorKind::Camera { .. })
    }

    pub fn sensor_from_rig(&self) -> Pose {
        self.rig_from_sensor.inverse()
    }

    pub fn scan_pattern(&self) -> Result<&ScanPattern> {
        match &self.kind {
            SensorKind::Lidar(p) => Ok(p),
            _ => Err(Error::WrongSensorKind(self.name.clone())),
        }
    }

    pub fn intrinsics(&self) -> Result<&CameraIntrinsics> {
        match &self.kind {
            SensorKind::Camera { intrinsics, .. } => Ok(intrinsics),
            _ => Err(Error::WrongSensorKind(self.name.clone())),
        }
    }

    /// Up direction in the sensor frame, assuming the sensor is mounted upright.
    pub fn up(&self) -> Vec3 {
        match self.kind {
            SensorKind::Lidar(_) => Vec3::z(),
            SensorKind::Camera { .. } => -Vec3::y(),
        }
    }
}

/// Two cameras with a manufacturer-supplied relative pose.
#[derive(Clone, Debug, PartialEq)]
pub struct StereoPair {
    pub left: String,
    pub right: String,
    pub left_from_right: Pose,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SensorRig {
    pub sensors: Vec<Sensor>,
    pub stereo_pairs: Vec<StereoPair>,
}

impl SensorRig {
    pub fn validated(self) -> Result<Self> {
        for (i, s) in self.sensors.iter().enumerate() {
            if self.sensors[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::InvalidInput(alloc::format!(
                    "duplicate sensor `{}`",
                    s.name
                )));
            }
            if !(s.confidence > 0.0 && s.confidence <= 1.0) {
                return Err(Error::InvalidInput(alloc::format!(
                    "confidence of `{}` must be in (0, 1]",
                    s.name
                )));
            }
            match &s.kind {
                SensorKind::Lidar(p) => {
                    p.validated()?;
                }
                SensorKind::Camera { intrinsics, .. } => {
                    intrinsics.validated()?;
                }
            }
        }
        for pair in &self.stereo_pairs {
            for name in [&pair.left, &pair.right] {
                if !self.sensor(name)?.1.is_camera() {
                    return Err(Error::WrongSensorKind(name.clone()));
                }
            }
        }
        Ok(self)
    }

    pub fn sensor(&self, name: &str) -> Result<(usize, &Sensor)> {
        self.sensors
            .iter()
            .enumerate()
            .find(|(_, s)| s.name == name)
            .ok_or_else(|| Error::UnknownSensor(name.to_string()))
    }

    /// Ground-truth `a_from_b`.
    pub fn extrinsic(&self, a: &str, b: &str) -> Result<Pose> {
        let (_, sa) = self.sensor(a)?;
        let (_, sb) = self.sensor(b)?;
        Ok(sa.sensor_from_rig() * sb.rig_from_sensor)
    }

    pub fn without(&self, name: &str) -> Self {
        Self {
            sensors: self
                .sensors
                .iter()
                .filter(|s| s.name != name)
                .cloned()
                .collect(),
            stereo_pairs: self
                .stereo_pairs
                .iter()
                .filter(|p| p.left != name && p.right != name)
                .cloned()
                .collect(),
        }
    }

    /// Desk-scale stand-in for a two-LIDAR, three-camera suite: a noisy
    /// 64-channel LIDAR, a 32-channel LIDAR, a 1600x1200 camera and an
    /// 800x600 stereo pair with a 10 cm baseline.
    pub fn default_rig() -> Self {
        let deg = |d: f64| d.to_radians();
        // Columns are the camera axes (right, down, forward) in rig coordinates.
        let camera_base =
            Rotation::from_matrix(&Mat3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0))
                .expect("rotation");
        let stereo_rot = Rotation::rz(deg(-1.2)) * camera_base * Rotation::rx(deg(0.8));
        let left = Pose::new(stereo_rot, Vec3::new(0.12, -0.12, 0.10));
        let baseline = Pose::from_translation(Vec3::new(0.10, 0.0, 0.0));
        let right = left * baseline;
        let camera = |name: &str, k: CameraIntrinsics, w, h, pose| Sensor {
            name: name.to_string(),
            kind: SensorKind::Camera {
                intrinsics: k,
                width: w,
                height: h,
            },
            rig_from_sensor: pose,
            confidence: 1.0,
        };
        let stereo_k = CameraIntrinsics {
            fx: 720.0,
            fy: 720.0,
            cx: 400.0,
            cy: 300.0,
            skew: 0.0,
        };
        SensorRig {
            sensors: vec![
                Sensor {
                    name: "os1_64".to_string(),
                    kind: SensorKind::Lidar(ScanPattern {
                        channels: 64,
                        elevation_min: deg(-16.6),
                        elevation_max: deg(16.6),
                        azimuth_step: deg(0.35),
                    }),
                    rig_from_sensor: Pose::new(
                        Rotation::rz(deg(2.0)) * Rotation::ry(deg(-1.0)),
                        Vec3::new(0.0, 0.0, 0.25),
                    ),
                    confidence: 1.0,
                },
                Sensor {
                    name: "vlp_32".to_string(),
                    kind: SensorKind::Lidar(ScanPattern {
                        channels: 32,
                        elevation_min: deg(-25.0),
                        elevation_max: deg(15.0),
                        azimuth_step: deg(0.2),
                    }),
                    rig_from_sensor: Pose::new(
                        Rotation::rx(deg(0.8)),
                        Vec3::new(0.05, 0.02, -0.05),
                    ),
                    confidence: 1.0,
                },
                camera(
                    "basler",
                    CameraIntrinsics {
                        fx: 1450.0,
                        fy: 1450.0,
                        cx: 800.0,
                        cy: 600.0,
                        skew: 0.0,
                    },
                    1600,
                    1200,
                    Pose::new(
                        Rotation::rz(deg(1.5)) * camera_base * Rotation::rx(deg(-1.0)),
                        Vec3::new(0.12, 0.18, 0.12),
                    ),
                ),
                camera("stereo_left", stereo_k, 800, 600, left),
                camera("stereo_right", stereo_k, 800, 600, right),
            ],
            stereo_pairs: vec![StereoPair {
                left: "stereo_left".to_string(),
                right: "stereo_right".to_string(),
                left_from_right: baseline,
            }],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rig_is_consistent() {
        let rig = SensorRig::default_rig().validated().unwrap();
        let pair = &rig.stereo_pairs[0];
        let truth = rig.extrinsic(&pair.left, &pair.right).unwrap();
        let err = truth.inverse() * pair.left_from_right;
        assert!(err.rotation.angle() < 1e-12 && err.translation.norm() < 1e-12);
        // Cameras look along rig +x.
        let (_, basler) = rig.sensor("basler").unwrap();
        assert!((basler.rig_from_sensor.rotation * Vec3::z()).x > 0.99);
    }

    #[test]
    fn pairwise_truth_is_consistent() {
        let rig = SensorRig::default_rig();
        for a in &rig.sensors {
            for b in &rig.sensors {
                let direct = rig.extrinsic(&a.name, &b.name).unwrap();
                let via = a.sensor_from_rig() * b.sensor_from_rig().inverse();
                let err = direct.inverse() * via;
                assert!(err.rotation.angle() < 1e-12 && err.translation.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_rigs() {
        let mut rig = SensorRig::default_rig();
        rig.sensors[1].name = "os1_64".into();
        assert!(rig.validated().is_err());
        let mut rig = SensorRig::default_rig();
        rig.stereo_pairs[0].right = "vlp_32".into();
        assert!(matches!(rig.validated(), Err(Error::WrongSensorKind(_))));
        assert!(matches!(
            SensorRig::default_rig().sensor("nope"),
            Err(Error::UnknownSensor(_))
        ));
    }

    #[test]
    fn channel_lookup() {
        let p = ScanPattern {
            channels: 5,
            elevation_min: -0.2,
            elevation_max: 0.2,
            azimuth_step: 0.01,
        };
        for k in 0..5 {
            let e = p.elevation(k);
            let dir = Vec3::new(e.cos() * 0.3f64.cos(), e.cos() * 0.3f64.sin(), e.sin()) * 4.2;
            assert_eq!(p.channel_of(&dir), Some(k));
        }
        assert_eq!(p.channel_of(&Vec3::new(0.0, 0.0, 1.0)), None);
    }
}
