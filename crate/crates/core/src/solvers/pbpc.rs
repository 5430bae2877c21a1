use crate::geom::{CameraIntrinsics, ImageLine, Pose};
use crate::prelude::*;

use super::lm::{solve_nlls, Problem, SolveReport, SolverOptions};
use super::ppc::{calibrate_ppc, PlaneView};
use super::residuals::BackprojectedPlaneBlock;

const MIN_LINES: usize = 6;
const MIN_VIEWS: usize = 2;

/// LIDAR boundary points matched to one image edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCorrespondence {
    pub line: ImageLine,
    pub points: Vec<Vec3>,
}

impl EdgeCorrespondence {
    /// Two points fix a 3D line, the least that constrains the pose usefully.
    pub fn is_usable(&self) -> bool {
        self.points.len() >= 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PbpcView {
    pub plane: PlaneView,
    pub edges: Vec<EdgeCorrespondence>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PbpcSolution {
    pub pose: Pose,
    /// Point-to-plane initialization.
    pub stage1: SolveReport,
    /// Edge refinement; this is the reported solve.
    pub stage2: SolveReport,
}

/// Minimizes the point to back-projected plane cost alone, starting at
/// `init`. With no edge points the problem is empty and `init` comes back
/// unchanged.
pub fn refine_pbpc(
    views: &[PbpcView],
    k: &CameraIntrinsics,
    init: &Pose,
    opts: &SolverOptions,
) -> Result<(Pose, SolveReport)> {
    let mut problem = Problem::new(1);
    for view in views {
        for edge in &view.edges {
            if edge.points.is_empty() {
                continue;
            }
            let weight = (1.0 / edge.points.len() as f64).sqrt();
            for q in &edge.points {
                problem.add_residual(BackprojectedPlaneBlock::new(*q, &edge.line, k, weight, 0)?);
            }
        }
    }
    let (poses, report) = solve_nlls(&problem, &[*init], opts)?;
    Ok((poses[0], report))
}

/// Two-stage calibration: point-to-plane from `init`, then edge refinement.
pub fn calibrate_pbpc(
    views: &[PbpcView],
    k: &CameraIntrinsics,
    init: &Pose,
    opts: &SolverOptions,
) -> Result<PbpcSolution> {
    let with_lines = views
        .iter()
        .filter(|v| v.edges.iter().any(|e| e.is_usable()))
        .count();
    let lines: usize = views
        .iter()
        .map(|v| v.edges.iter().filter(|e| e.is_usable()).count())
        .sum();
    if with_lines < MIN_VIEWS || lines < MIN_LINES {
        return Err(Error::InsufficientViews(format!(
            "edge refinement needs {MIN_VIEWS} views and {MIN_LINES} line correspondences, got {with_lines} and {lines}"
        )));
    }
    let planes: Vec<PlaneView> = views.iter().map(|v| v.plane.clone()).collect();
    let (seed, stage1) = calibrate_ppc(&planes, init, opts)?;
    let (pose, stage2) = refine_pbpc(views, k, &seed, opts)?;
    Ok(PbpcSolution {
        pose,
        stage1,
        stage2,
    })
}
