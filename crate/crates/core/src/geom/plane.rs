use super::{Vec3, UNIT_SLACK};
use crate::prelude::*;

/// Plane `[n; d]`: unit normal `n` and a vector `d` from the frame origin to
/// some point of the plane (the target's own origin, when known).
///
/// Only the scalar offset `n . d` enters distances; moving `d` within the
/// plane changes nothing observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    normal: Vec3,
    origin_offset: Vec3,
}

impl Plane {
    pub fn new(normal: Vec3, origin_offset: Vec3) -> Result<Self> {
        let n = normal.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidInput("plane normal must be non-zero".into()));
        }
        let normal = if (n - 1.0).abs() <= UNIT_SLACK {
            normal
        } else {
            normal / n
        };
        Ok(Self {
            normal,
            origin_offset,
        })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn origin_offset(&self) -> Vec3 {
        self.origin_offset
    }

    /// Scalar offset `n . d`.
    pub fn offset(&self) -> f64 {
        self.normal.dot(&self.origin_offset)
    }

    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        self.normal.dot(&(x - self.origin_offset))
    }

    /// Same plane with the normal flipped, if needed, so the frame origin lies
    /// on its positive side.
    pub fn facing_origin(self) -> Self {
        if self.offset() > 0.0 {
            Self {
                normal: -self.normal,
                ..self
            }
        } else {
            self
        }
    }

    pub fn transformed(&self, pose: &crate::Pose) -> Self {
        Self {
            normal: pose.rotation * self.normal,
            origin_offset: pose.transform_point(&self.origin_offset),
        }
    }
}
