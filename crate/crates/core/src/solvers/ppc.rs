use nalgebra::{Matrix3, SymmetricEigen};

use crate::geom::{Plane, Pose};
use crate::prelude::*;

use super::lm::{solve_nlls, Problem, SolveReport, SolverOptions};
use super::residuals::PointToPlaneBlock;

const RANK_THRESHOLD: f64 = 1e-6;

/// One target view: LIDAR points on the board and the board plane in the
/// camera frame.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneView {
    pub points: Vec<Vec3>,
    pub plane: Plane,
}

/// True when the stacked normals span 3D: smallest singular value > 1e-6.
pub fn check_normal_rank(normals: &[Vec3]) -> bool {
    if normals.len() < 3 {
        return false;
    }
    let gram: Matrix3<f64> = normals.iter().map(|n| n * n.transpose()).sum();
    let min = SymmetricEigen::new(gram).eigenvalues.min().max(0.0);
    min.sqrt() > RANK_THRESHOLD
}

/// Point-to-plane calibration of `camera_from_lidar`. Each view's points are
/// weighted by the inverse of its point count.
pub fn calibrate_ppc(
    views: &[PlaneView],
    init: &Pose,
    opts: &SolverOptions,
) -> Result<(Pose, SolveReport)> {
    let used: Vec<&PlaneView> = views.iter().filter(|v| !v.points.is_empty()).collect();
    let normals: Vec<Vec3> = used.iter().map(|v| v.plane.normal()).collect();
    if used.len() < 3 || !check_normal_rank(&normals) {
        return Err(Error::InsufficientViews(format!(
            "point-to-plane needs 3 non-coplanar views, got {}",
            used.len()
        )));
    }
    let mut problem = Problem::new(1);
    for v in used {
        let weight = (1.0 / v.points.len() as f64).sqrt();
        for p in &v.points {
            problem.add_residual(PointToPlaneBlock {
                point: *p,
                plane: v.plane,
                weight,
                param: [0],
            });
        }
    }
    let (poses, report) = solve_nlls(&problem, &[*init], opts)?;
    Ok((poses[0], report))
}
