use nalgebra::Vector4;

use super::{ImageLine, Mat3, Plane, Pose, Vec2, Vec3};
use crate::prelude::*;

const MIN_DEPTH: f64 = 1e-9;

/// Ideal pinhole intrinsics (no distortion).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub skew: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        Self {
            fx,
            fy,
            cx,
            cy,
            skew: 0.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.fx > 0.0 && self.fy > 0.0)
            || ![self.cx, self.cy, self.skew].iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidInput(
                "focal lengths must be positive and finite".into(),
            ));
        }
        Ok(self)
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::new(
            self.fx, self.skew, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0,
        )
    }

    /// Pixel of a point already expressed in the camera frame.
    pub fn project_camera(&self, xc: &Vec3) -> Result<Vec2> {
        if xc.z <= MIN_DEPTH {
            return Err(Error::NonPositiveDepth(xc.z));
        }
        let (u, v) = (xc.x / xc.z, xc.y / xc.z);
        Ok(Vec2::new(
            self.fx * u + self.skew * v + self.cx,
            self.fy * v + self.cy,
        ))
    }

    /// Ray direction (not normalized, z = 1) through a pixel.
    pub fn unproject(&self, px: &Vec2) -> Vec3 {
        let y = (px.y - self.cy) / self.fy;
        let x = (px.x - self.cx - self.skew * y) / self.fx;
        Vec3::new(x, y, 1.0)
    }
}

/// Projects a point given in the sensor frame through `camera_from_sensor`.
pub fn project(k: &CameraIntrinsics, camera_from_sensor: &Pose, x: &Vec3) -> Result<Vec2> {
    k.project_camera(&camera_from_sensor.transform_point(x))
}

/// Projection of a homogeneous point `[X; w]`, `w > 0`.
pub fn project_homogeneous(
    k: &CameraIntrinsics,
    camera_from_sensor: &Pose,
    x: &Vector4<f64>,
) -> Result<Vec2> {
    let r = camera_from_sensor.rotation.matrix();
    let h = k.matrix() * (r * x.xyz() + camera_from_sensor.translation * x.w);
    if h.z <= MIN_DEPTH * x.w.abs() {
        return Err(Error::NonPositiveDepth(h.z));
    }
    Ok(Vec2::new(h.x / h.z, h.y / h.z))
}

/// Plane through the camera center containing every ray that images onto `l`;
/// its normal is `K^T l`.
pub fn backprojected_plane(k: &CameraIntrinsics, l: &ImageLine) -> Result<Plane> {
    let n = k.matrix().transpose() * l.coeffs();
    if n.norm() < 1e-12 {
        return Err(Error::DegenerateLine);
    }
    Plane::new(n, Vec3::zeros())
}
