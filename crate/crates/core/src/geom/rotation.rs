use nalgebra::{Quaternion, UnitQuaternion};

use super::{Mat3, Vec3, UNIT_SLACK};
use crate::prelude::*;

/// Angles above `PI - LOG_PI_MARGIN` have no well-conditioned logarithm.
const LOG_PI_MARGIN: f64 = 1e-6;

/// A 3D rotation stored as a unit quaternion with non-negative scalar part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    q: UnitQuaternion<f64>,
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub fn identity() -> Self {
        Self {
            q: UnitQuaternion::identity(),
        }
    }

    fn canonical(q: Quaternion<f64>) -> Self {
        let q = if q.w < 0.0 { -q } else { q };
        if (q.norm() - 1.0).abs() <= UNIT_SLACK {
            return Self {
                q: UnitQuaternion::new_unchecked(q),
            };
        }
        Self {
            q: UnitQuaternion::new_normalize(q),
        }
    }

    /// Builds a rotation from quaternion components, normalizing them.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidInput(
                "quaternion has zero or non-finite norm".into(),
            ));
        }
        Ok(Self::canonical(q))
    }

    /// Nearest rotation to an arbitrary 3x3 matrix (polar projection).
    pub fn from_matrix(m: &Mat3) -> Result<Self> {
        let svd = m.svd(true, true);
        let (u, vt) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(Error::NumericalFailure),
        };
        let mut d = Mat3::identity();
        if (u * vt).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        let r = u * d * vt;
        let q =
            UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(r));
        Ok(Self::canonical(*q.quaternion()))
    }

    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        exp_so3(&(axis * (angle / n)))
    }

    pub fn rx(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::x(), angle)
    }

    pub fn ry(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::y(), angle)
    }

    pub fn rz(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::z(), angle)
    }

    /// Components as `[w, x, y, z]`.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.q.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn matrix(&self) -> Mat3 {
        self.q.to_rotation_matrix().into_inner()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.q * v
    }

    pub fn inverse(&self) -> Self {
        Self::canonical(*self.q.inverse().quaternion())
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Self {
        Self::canonical(*(self.q * other.q).quaternion())
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let q = self.q.quaternion();
        2.0 * q.vector().norm().atan2(q.w.abs())
    }

    /// Rotation vector with no restriction near pi. Used by residuals, where
    /// the branch cut is harmless.
    pub(crate) fn log_unchecked(&self) -> Vec3 {
        let q = self.q.quaternion();
        let v = q.vector().into_owned();
        let s = v.norm();
        let w = q.w;
        if s < 1e-8 {
            // 2 atan(s/w)/s expanded around s = 0.
            let ws = w * w;
            v * (2.0 / w - 2.0 * s * s / (3.0 * ws * w))
        } else {
            v * (2.0 * s.atan2(w) / s)
        }
    }
}

impl core::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

impl core::ops::Mul<Vec3> for Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.rotate(&rhs)
    }
}

/// Exponential map from a rotation vector (radians) to a rotation.
pub fn exp_so3(omega: &Vec3) -> Rotation {
    let theta = omega.norm();
    let half = 0.5 * theta;
    let k = if theta < 1e-6 {
        0.5 - theta * theta / 48.0
    } else {
        half.sin() / theta
    };
    Rotation::canonical(Quaternion::new(
        half.cos(),
        k * omega.x,
        k * omega.y,
        k * omega.z,
    ))
}

/// Logarithm map. Fails for angles within 1e-6 of pi, where the axis sign is
/// ambiguous.
pub fn log_so3(r: &Rotation) -> Result<Vec3> {
    if r.angle() > core::f64::consts::PI - LOG_PI_MARGIN {
        return Err(Error::NearPiAngle);
    }
    Ok(r.log_unchecked())
}

pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of the left Jacobian of SO(3): maps a left perturbation of the
/// rotation to the induced change in its logarithm.
pub(crate) fn left_jacobian_inverse(phi: &Vec3) -> Mat3 {
    let theta = phi.norm();
    let k = skew(phi);
    let c = if theta < 1e-5 {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        let half = 0.5 * theta;
        (1.0 - half * half.cos() / half.sin()) / (theta * theta)
    };
    Mat3::identity() - 0.5 * k + c * k * k
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn rodrigues(omega: &Vec3) -> Mat3 {
        let theta = omega.norm();
        if theta == 0.0 {
            return Mat3::identity();
        }
        let k = skew(&(omega / theta));
        Mat3::identity() + theta.sin() * k + (1.0 - theta.cos()) * k * k
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(exp_so3(&Vec3::zeros()).wxyz(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn exp_matches_rodrigues() {
        let r = exp_so3(&Vec3::new(0.0, 0.0, FRAC_PI_2));
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_relative_eq!(r.matrix(), expected, epsilon = 1e-15);
        for w in [
            Vec3::new(0.3, -1.2, 0.7),
            Vec3::new(2.0, 1.0, -0.5),
            Vec3::new(1e-7, 0.0, 2e-7),
        ] {
            assert_relative_eq!(exp_so3(&w).matrix(), rodrigues(&w), epsilon = 1e-14);
        }
    }

    #[test]
    fn log_inverts_exp() {
        let w = Vec3::new(0.1, -0.2, 0.3);
        let back = log_so3(&exp_so3(&w)).unwrap();
        assert!((back - w).norm() < 1e-12);
    }

    #[test]
    fn log_rejects_half_turn() {
        assert_eq!(log_so3(&Rotation::rz(PI)), Err(Error::NearPiAngle));
        assert!(log_so3(&Rotation::rz(PI - 1e-3)).is_ok());
    }

    #[test]
    fn canonical_scalar_part_is_non_negative() {
        let r = exp_so3(&Vec3::new(0.0, 0.0, 1.5 * PI));
        assert!(r.wxyz()[0] >= 0.0);
        assert_relative_eq!(
            r.matrix(),
            rodrigues(&Vec3::new(0.0, 0.0, 1.5 * PI)),
            epsilon = 1e-14
        );
    }

    #[test]
    fn left_jacobian_inverse_matches_finite_differences() {
        let phi = Vec3::new(0.4, -0.9, 1.3);
        let r = exp_so3(&phi);
        let jinv = left_jacobian_inverse(&phi);
        let h = 1e-6;
        for i in 0..3 {
            let mut d = Vec3::zeros();
            d[i] = h;
            let plus = (exp_so3(&d) * r).log_unchecked();
            let minus = (exp_so3(&-d) * r).log_unchecked();
            let col = (plus - minus) / (2.0 * h);
            assert!((col - jinv.column(i)).norm() < 1e-8);
        }
    }

    #[test]
    fn from_matrix_recovers_rotation() {
        let r = exp_so3(&Vec3::new(0.2, 0.5, -2.0));
        let back = Rotation::from_matrix(&r.matrix()).unwrap();
        assert!((back.inverse() * r).angle() < 1e-14);
    }

    proptest! {
        #[test]
        fn exp_log_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, mag in 0.0f64..(PI - 0.01)) {
            let axis = Vec3::new(x, y, z);
            prop_assume!(axis.norm() > 1e-3);
            let w = axis.normalize() * mag;
            let r = exp_so3(&w);
            let n = r.wxyz().iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-12);
            prop_assert!(r.wxyz()[0] >= 0.0);
            prop_assert!((log_so3(&r).unwrap() - w).norm() < 1e-10);
        }
    }
}
