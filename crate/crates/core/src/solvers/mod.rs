//! Nonlinear least squares over SE(3) and the calibration formulations.

mod graph;
mod jacobian;
mod lm;
mod msg;
mod pbpc;
mod ppc;
mod residuals;

pub use graph::{optimize_graph, GraphSolution, PairwiseEdge, PlaneEdge, PoseGraph};
pub use jacobian::{check_jacobians, JacobianReport};
pub use lm::{
    solve_nlls, Loss, Problem, ResidualBlock, SolveReport, SolverOptions, Termination,
    MAX_BLOCK_DIM,
};
pub use msg::{calibrate_msg_pair, MsgPairSolution, PlanePair};
pub use pbpc::{calibrate_pbpc, refine_pbpc, EdgeCorrespondence, PbpcSolution, PbpcView};
pub use ppc::{calibrate_ppc, check_normal_rank, PlaneView};
pub use residuals::{
    residual_msg_pair, residual_pbpc, residual_ppc, BackprojectedPlaneBlock, PlanePairBlock,
    PointToPlaneBlock,
};
