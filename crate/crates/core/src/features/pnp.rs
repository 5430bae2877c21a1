use nalgebra::{SMatrix, SVector};

use crate::geom::{skew, CameraIntrinsics, Mat3, Plane, Pose, Rotation};
use crate::prelude::*;
use crate::sim::TargetModel;
use crate::solvers::{solve_nlls, Problem, ResidualBlock, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct PnpSolution {
    /// `camera_from_board`. The board frame is centered with +z toward the
    /// camera; its in-plane axes are fixed up to the rectangle's symmetry.
    pub pose: Pose,
    /// Board plane in the camera frame.
    pub plane: Plane,
    /// RMS corner reprojection error, pixels.
    pub rms: f64,
}

/// Pixel residual of one board corner under `camera_from_board`.
struct Reprojection {
    k: CameraIntrinsics,
    corner: Vec3,
    observed: Vec2,
    param: [usize; 1],
}

impl ResidualBlock for Reprojection {
    fn dim(&self) -> usize {
        2
    }

    fn parameters(&self) -> &[usize] {
        &self.param
    }

    fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>) {
        let pose = &poses[0];
        let rx = pose.rotation * self.corner;
        let x = rx + pose.translation;
        if x.z < 1e-9 {
            // Behind the camera: a flat penalty the damping steps away from.
            residual[0] = 1e6;
            residual[1] = 1e6;
            if let Some(j) = jacobian {
                j.iter_mut().for_each(|v| *v = 0.0);
            }
            return;
        }
        let k = &self.k;
        let iz = 1.0 / x.z;
        residual[0] = k.fx * x.x * iz + k.skew * x.y * iz + k.cx - self.observed.x;
        residual[1] = k.fy * x.y * iz + k.cy - self.observed.y;
        if let Some(j) = jacobian {
            let dp = SMatrix::<f64, 2, 3>::new(
                k.fx * iz,
                k.skew * iz,
                -(k.fx * x.x + k.skew * x.y) * iz * iz,
                0.0,
                k.fy * iz,
                -k.fy * x.y * iz * iz,
            );
            let dw = dp * -skew(&rx);
            for row in 0..2 {
                for c in 0..3 {
                    j[row * 6 + c] = dw[(row, c)];
                    j[row * 6 + 3 + c] = dp[(row, c)];
                }
            }
        }
    }
}

fn collinear(a: &Vec2, b: &Vec2, c: &Vec2, scale: f64) -> bool {
    let area = (b - a).perp(&(c - a)).abs();
    area <= 1e-9 * scale * scale
}

/// Homography from board-plane coordinates to normalized image coordinates,
/// as the null vector of the 8x9 DLT system.
fn homography(model: &[Vec2; 4], image: &[Vec2; 4]) -> Option<Mat3> {
    let mut a = SMatrix::<f64, 9, 9>::zeros();
    for i in 0..4 {
        let (x, y) = (model[i].x, model[i].y);
        let (u, v) = (image[i].x, image[i].y);
        let r1 = SVector::<f64, 9>::from([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u]);
        let r2 = SVector::<f64, 9>::from([0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, -v]);
        a.set_row(2 * i, &r1.transpose());
        a.set_row(2 * i + 1, &r2.transpose());
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    let i = svd.singular_values.imin();
    let h = vt.row(i);
    let m = Mat3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    m.iter().all(|v| v.is_finite()).then_some(m)
}

/// Pose from a plane-to-image homography: `H ~ [r1 r2 t]`.
fn decompose(h: &Mat3) -> Option<Pose> {
    let (h1, h2, h3) = (
        h.column(0).into_owned(),
        h.column(1).into_owned(),
        h.column(2).into_owned(),
    );
    let scale = 2.0 / (h1.norm() + h2.norm());
    let sign = if h3.z < 0.0 { -1.0 } else { 1.0 };
    let (r1, r2, t) = (h1 * scale * sign, h2 * scale * sign, h3 * scale * sign);
    let r = Mat3::from_columns(&[r1, r2, r1.cross(&r2)]);
    let rotation = Rotation::from_matrix(&r).ok()?;
    Some(Pose::new(rotation, t))
}

fn solve_model(
    corners_px: &[Vec2; 4],
    model: &[Vec3; 4],
    k: &CameraIntrinsics,
    opts: &SolverOptions,
) -> Result<(Pose, f64, bool)> {
    let normalized = corners_px.map(|p| {
        let r = k.unproject(&p);
        Vec2::new(r.x / r.z, r.y / r.z)
    });
    let plane2d = model.map(|m| m.xy());
    let h =
        homography(&plane2d, &normalized).ok_or(Error::DegenerateConfiguration("homography"))?;
    let init = decompose(&h).ok_or(Error::DegenerateConfiguration("homography decomposition"))?;
    let mut problem = Problem::new(1);
    for (corner, observed) in model.iter().zip(corners_px) {
        problem.add_residual(Reprojection {
            k: *k,
            corner: *corner,
            observed: *observed,
            param: [0],
        });
    }
    let (poses, report) = solve_nlls(&problem, &[init], opts)?;
    let rms = (report.final_cost / 4.0).sqrt();
    Ok((poses[0], rms, report.converged))
}

/// Board pose and plane from four corners ordered counterclockwise as seen
/// by the camera, edge 0 on top. The top edge may be either a long or a
/// short side, so both assignments are solved and the better fit kept.
pub fn planar_pnp(
    corners_px: &[Vec2; 4],
    target: &TargetModel,
    k: &CameraIntrinsics,
) -> Result<PnpSolution> {
    let scale = corners_px
        .iter()
        .map(|p| (p - corners_px[0]).norm())
        .fold(0.0, f64::max);
    for i in 0..4 {
        let (a, b, c) = (
            &corners_px[i],
            &corners_px[(i + 1) % 4],
            &corners_px[(i + 2) % 4],
        );
        if scale <= 0.0 || collinear(a, b, c, scale) {
            return Err(Error::DegenerateConfiguration("collinear corners"));
        }
    }
    let base = target.corners();
    let opts = SolverOptions::default();
    let mut best: Option<(Pose, f64, bool)> = None;
    for shift in 0..2 {
        let model = [
            base[shift],
            base[shift + 1],
            base[(shift + 2) % 4],
            base[(shift + 3) % 4],
        ];
        let sol = solve_model(corners_px, &model, k, &opts)?;
        if best.as_ref().is_none_or(|b| sol.1 < b.1) {
            best = Some(sol);
        }
    }
    let (pose, rms, converged) = best.expect("two candidates solved");
    if !converged {
        return Err(Error::DidNotConverge);
    }
    let normal = pose.rotation * Vec3::z();
    let in_front = base.iter().all(|c| pose.transform_point(c).z > 0.0);
    if normal.dot(&pose.translation) >= 0.0 || !in_front {
        return Err(Error::Chirality);
    }
    Ok(PnpSolution {
        pose,
        plane: Plane::new(normal, pose.translation)?,
        rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{exp_so3, project};
    use crate::rng::{stream, Purpose};
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn facing_pose(rng: &mut impl Rng, distance: f64) -> Pose {
        // Board +z toward the camera, then a modest random tilt and roll.
        let base = Rotation::rx(core::f64::consts::PI);
        let tilt = exp_so3(&Vec3::new(
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            0.0,
        ));
        let roll = Rotation::rz(rng.random_range(0.5..1.0));
        let t = Vec3::new(
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
            distance,
        );
        Pose::new(tilt * base * roll, t)
    }

    fn corners_of(pose: &Pose, target: &TargetModel, k: &CameraIntrinsics) -> [Vec2; 4] {
        target.corners().map(|c| project(k, pose, &c).unwrap())
    }

    #[test]
    fn exact_corners_recover_pose() {
        let target = TargetModel::default();
        let k = CameraIntrinsics::new(1450.0, 1450.0, 800.0, 600.0).unwrap();
        let mut rng = stream(1, Purpose::Features, 0, 0);
        for _ in 0..20 {
            let distance = rng.random_range(2.0..4.5);
            let truth = facing_pose(&mut rng, distance);
            let sol = planar_pnp(&corners_of(&truth, &target, &k), &target, &k).unwrap();
            let d = sol.pose.inverse() * truth;
            assert!(
                d.rotation.angle() < 1e-8 && d.translation.norm() < 1e-8,
                "{d:?}"
            );
            assert!(sol.rms < 1e-8);
            assert!((sol.plane.normal() - truth.rotation * Vec3::z()).norm() < 1e-8);
            assert!(sol.plane.offset() < 0.0);
        }
    }

    #[test]
    fn short_top_edge_is_handled() {
        let target = TargetModel::default();
        let k = CameraIntrinsics::new(900.0, 900.0, 400.0, 300.0).unwrap();
        let truth = Pose::new(
            Rotation::rx(core::f64::consts::PI) * Rotation::rz(0.4),
            Vec3::new(0.1, 0.0, 3.0),
        );
        let c = corners_of(&truth, &target, &k);
        let shifted = [c[1], c[2], c[3], c[0]];
        let sol = planar_pnp(&shifted, &target, &k).unwrap();
        assert!((sol.plane.normal() - truth.rotation * Vec3::z()).norm() < 1e-8);
        assert!((sol.plane.offset() - truth.translation.dot(&sol.plane.normal())).abs() < 1e-8);
    }

    #[test]
    fn reflected_corner_order_is_rejected() {
        let target = TargetModel::default();
        let k = CameraIntrinsics::new(900.0, 900.0, 400.0, 300.0).unwrap();
        let truth = Pose::new(
            Rotation::rx(core::f64::consts::PI) * Rotation::rz(0.7),
            Vec3::new(0.0, 0.1, 3.0),
        );
        let c = corners_of(&truth, &target, &k);
        let reflected = [c[1], c[0], c[3], c[2]];
        assert_eq!(
            planar_pnp(&reflected, &target, &k).unwrap_err(),
            Error::Chirality
        );
    }

    #[test]
    fn collinear_corners_are_degenerate() {
        let k = CameraIntrinsics::new(900.0, 900.0, 400.0, 300.0).unwrap();
        let c = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(3.0, 3.0),
        ];
        assert!(matches!(
            planar_pnp(&c, &TargetModel::default(), &k),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn noisy_corners_give_accurate_normals() {
        // Default-rig main camera; the board spans about 390 px at 3 m.
        let target = TargetModel::default();
        let k = CameraIntrinsics::new(1450.0, 1450.0, 800.0, 600.0).unwrap();
        let mut rng = stream(2, Purpose::Features, 0, 0);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let trials = 200;
        let (mut good_normal, mut good_fit) = (0, 0);
        for _ in 0..trials {
            let truth = facing_pose(&mut rng, 3.0);
            let c = corners_of(&truth, &target, &k)
                .map(|p| p + Vec2::new(noise.sample(&mut rng), noise.sample(&mut rng)));
            let sol = planar_pnp(&c, &target, &k).unwrap();
            let err = sol
                .plane
                .normal()
                .dot(&(truth.rotation * Vec3::z()))
                .clamp(-1.0, 1.0)
                .acos();
            good_normal += usize::from(err.to_degrees() < 2.0);
            let mean_px = target
                .corners()
                .iter()
                .zip(&c)
                .map(|(m, o)| (project(&k, &sol.pose, m).unwrap() - o).norm())
                .sum::<f64>()
                / 4.0;
            good_fit += usize::from(mean_px <= 2.0 * 0.5);
        }
        assert!(good_fit * 100 >= 95 * trials, "{good_fit}");
        assert!(good_normal * 100 >= 95 * trials, "{good_normal}");
    }
}
