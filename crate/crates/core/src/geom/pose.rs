use nalgebra::Matrix4;

use super::{exp_so3, Rotation, Vec3};

/// Rigid transform `x -> R x + t`.
///
/// A pose named `a_from_b` maps coordinates expressed in frame `b` into frame
/// `a`; `compose(a_from_b, b_from_c)` is then `a_from_c`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self::new(Rotation::identity(), t)
    }

    pub fn from_rotation(r: Rotation) -> Self {
        Self::new(r, Vec3::zeros())
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let r = self.rotation.inverse();
        Pose {
            rotation: r,
            translation: -(r * self.translation),
        }
    }

    pub fn transform_point(&self, x: &Vec3) -> Vec3 {
        self.rotation * *x + self.translation
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Manifold update: `R <- exp(dw) R`, `t <- t + dt` with `delta = [dw, dt]`.
    pub fn retract(&self, delta: &[f64]) -> Pose {
        let dw = Vec3::new(delta[0], delta[1], delta[2]);
        let dt = Vec3::new(delta[3], delta[4], delta[5]);
        Pose {
            rotation: exp_so3(&dw) * self.rotation,
            translation: self.translation + dt,
        }
    }

    /// Six-vector `[log(R), t]`, handy for reports.
    pub fn to_vector(&self) -> [f64; 6] {
        let w = self.rotation.log_unchecked();
        let t = self.translation;
        [w.x, w.y, w.z, t.x, t.y, t.z]
    }
}

impl core::ops::Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn pose_strategy() -> impl Strategy<Value = Pose> {
        (
            prop::array::uniform3(-3.0f64..3.0),
            prop::array::uniform3(-5.0f64..5.0),
        )
            .prop_map(|(w, t)| Pose::new(exp_so3(&Vec3::from(w)), Vec3::from(t)))
    }

    fn distance(a: &Pose, b: &Pose) -> (f64, f64) {
        (
            (a.rotation.inverse() * b.rotation).angle(),
            (a.translation - b.translation).norm(),
        )
    }

    #[test]
    fn identity_composition() {
        assert_eq!(Pose::identity() * Pose::identity(), Pose::identity());
    }

    #[test]
    fn composition_matches_matrix_product() {
        let a = Pose::new(Rotation::rz(FRAC_PI_2), Vec3::new(1.0, 0.0, 0.0));
        let b = Pose::new(Rotation::rz(FRAC_PI_2), Vec3::zeros());
        let c = a * b;
        assert_relative_eq!(c.matrix(), a.matrix() * b.matrix(), epsilon = 1e-15);
        let (angle, dist) = distance(&c, &Pose::new(Rotation::rz(PI), Vec3::new(1.0, 0.0, 0.0)));
        assert!(angle < 1e-15 && dist < 1e-15);
    }

    #[test]
    fn transform_point_cases() {
        let x = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(Pose::identity().transform_point(&x), x);
        let t = Pose::from_translation(Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(t.transform_point(&Vec3::zeros()), Vec3::new(0.0, 0.0, 1.0));
        let r = Pose::from_rotation(Rotation::rz(FRAC_PI_2));
        let m = r.matrix();
        let expected = m.fixed_view::<3, 3>(0, 0) * Vec3::x();
        assert_relative_eq!(r.transform_point(&Vec3::x()), expected, epsilon = 1e-15);
        assert_relative_eq!(r.transform_point(&Vec3::x()), Vec3::y(), epsilon = 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn group_laws(a in pose_strategy(), b in pose_strategy(), c in pose_strategy()) {
            let (ang, dist) = distance(&(a * a.inverse()), &Pose::identity());
            prop_assert!(ang < 1e-10 && dist < 1e-10);
            let (ang, dist) = distance(&((a * b) * c), &(a * (b * c)));
            prop_assert!(ang < 1e-10 && dist < 1e-10);
        }
    }
}
