use nalgebra::Matrix6;

use crate::geom::{Plane, Pose};
use crate::prelude::*;

use super::lm::{solve_nlls, Problem, SolveReport, SolverOptions};
use super::ppc::check_normal_rank;
use super::residuals::PlanePairBlock;

/// The same target plane seen by sensors A and B, each in its own frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanePair {
    pub a: Plane,
    pub b: Plane,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MsgPairSolution {
    /// `a_from_b`.
    pub pose: Pose,
    pub report: SolveReport,
    /// `J^T J` at the solution, in the solver's tangent coordinates.
    pub information: Matrix6<f64>,
}

/// Plane-pair calibration of `a_from_b`; `weight` scales every residual.
pub fn calibrate_msg_pair(
    pairs: &[PlanePair],
    init: &Pose,
    weight: f64,
    opts: &SolverOptions,
) -> Result<MsgPairSolution> {
    let normals: Vec<Vec3> = pairs.iter().map(|p| p.a.normal()).collect();
    if pairs.len() < 3 || !check_normal_rank(&normals) {
        return Err(Error::InsufficientViews(format!(
            "plane-pair calibration needs 3 non-coplanar shared views, got {}",
            pairs.len()
        )));
    }
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::InvalidInput(
            "plane-pair weight must be positive".into(),
        ));
    }
    let mut problem = Problem::new(1);
    for p in pairs {
        problem.add_residual(PlanePairBlock {
            plane_a: p.a,
            plane_b: p.b,
            weight,
            param: [0],
        });
    }
    let (poses, report) = solve_nlls(&problem, &[*init], opts)?;
    let information = Matrix6::from_iterator(report.information.iter().copied());
    Ok(MsgPairSolution {
        pose: poses[0],
        report,
        information,
    })
}
