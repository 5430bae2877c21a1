//! Global pose graph over sensor nodes.
//!
//! Node `i` holds `sensor_from_global`. A derived extrinsic is
//! `a_from_b = X_a * X_b^-1`, so a common right-multiplication of all nodes
//! leaves every derived extrinsic unchanged.

use alloc::collections::VecDeque;

use nalgebra::{Matrix6, SMatrix};

use crate::geom::{left_jacobian_inverse, skew, Mat3, Plane, Pose};
use crate::prelude::*;

use super::lm::{solve_nlls, Problem, ResidualBlock, SolveReport, SolverOptions};
use super::residuals::residual_msg_pair;

type Mat4x6 = SMatrix<f64, 4, 6>;

/// A measured `a_from_b` with information in the solver's tangent coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseEdge {
    pub a: usize,
    pub b: usize,
    pub a_from_b: Pose,
    pub information: Matrix6<f64>,
}

/// A target plane observed by nodes `a` and `b` in the same view.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneEdge {
    pub a: usize,
    pub b: usize,
    pub plane_a: Plane,
    pub plane_b: Plane,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoseGraph {
    pub nodes: usize,
    pub gauge: usize,
    pub pairwise: Vec<PairwiseEdge>,
    pub planes: Vec<PlaneEdge>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSolution {
    pub nodes: Vec<Pose>,
    pub report: SolveReport,
}

impl GraphSolution {
    pub fn extrinsic(&self, a: usize, b: usize) -> Pose {
        self.nodes[a] * self.nodes[b].inverse()
    }
}

/// `a_from_b` from two node poses, with its tangent Jacobians with respect to
/// each node.
fn relative(xa: &Pose, xb: &Pose) -> (Pose, Matrix6<f64>, Matrix6<f64>) {
    let t = *xa * xb.inverse();
    let r = t.rotation.matrix();
    let mut ja = Matrix6::identity();
    ja.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&skew(&(r * xb.translation)));
    let mut jb = Matrix6::zeros();
    jb.fixed_view_mut::<3, 3>(0, 0).copy_from(&-r);
    jb.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(-r * skew(&xb.translation)));
    jb.fixed_view_mut::<3, 3>(3, 3).copy_from(&-r);
    (t, ja, jb)
}

fn write_jacobian<const R: usize>(
    out: &mut [f64],
    dr_dt: &SMatrix<f64, R, 6>,
    ja: &Matrix6<f64>,
    jb: &Matrix6<f64>,
) {
    let a = dr_dt * ja;
    let b = dr_dt * jb;
    for row in 0..R {
        for c in 0..6 {
            out[row * 6 + c] = a[(row, c)];
            out[(R + row) * 6 + c] = b[(row, c)];
        }
    }
}

struct PairwiseBlock {
    params: [usize; 2],
    measured: Pose,
    /// Upper Cholesky factor `L^T` of the information.
    sqrt_info: Matrix6<f64>,
}

impl ResidualBlock for PairwiseBlock {
    fn dim(&self) -> usize {
        6
    }

    fn parameters(&self) -> &[usize] {
        &self.params
    }

    fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>) {
        let (t, ja, jb) = relative(&poses[self.params[0]], &poses[self.params[1]]);
        let e_rot = (t.rotation * self.measured.rotation.inverse()).log_unchecked();
        let e_t = t.translation - self.measured.translation;
        let e = nalgebra::Vector6::new(e_rot.x, e_rot.y, e_rot.z, e_t.x, e_t.y, e_t.z);
        let r = self.sqrt_info * e;
        residual.copy_from_slice(r.as_slice());
        if let Some(out) = jacobian {
            let mut de = Matrix6::identity();
            let jl: Mat3 = left_jacobian_inverse(&e_rot);
            de.fixed_view_mut::<3, 3>(0, 0).copy_from(&jl);
            write_jacobian(out, &(self.sqrt_info * de), &ja, &jb);
        }
    }
}

struct GraphPlaneBlock {
    params: [usize; 2],
    plane_a: Plane,
    plane_b: Plane,
    weight: f64,
}

impl ResidualBlock for GraphPlaneBlock {
    fn dim(&self) -> usize {
        4
    }

    fn parameters(&self) -> &[usize] {
        &self.params
    }

    fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>) {
        let (t, ja, jb) = relative(&poses[self.params[0]], &poses[self.params[1]]);
        let (r, j) = residual_msg_pair(&t, &self.plane_a, &self.plane_b);
        for (o, v) in residual.iter_mut().zip(r) {
            *o = self.weight * v;
        }
        if let Some(out) = jacobian {
            let dr = Mat4x6::from_fn(|row, c| self.weight * j[row][c]);
            write_jacobian(out, &dr, &ja, &jb);
        }
    }
}

impl PoseGraph {
    fn validate(&self) -> Result<()> {
        if self.gauge >= self.nodes {
            return Err(Error::InvalidInput("gauge node out of range".into()));
        }
        let bad = |a: usize, b: usize| a >= self.nodes || b >= self.nodes || a == b;
        if self.pairwise.iter().any(|e| bad(e.a, e.b)) || self.planes.iter().any(|e| bad(e.a, e.b))
        {
            return Err(Error::InvalidInput(
                "graph edge references an invalid node pair".into(),
            ));
        }
        Ok(())
    }

    /// The least-squares problem over all nodes, with the gauge node fixed.
    pub fn problem(&self) -> Result<Problem<'static>> {
        self.validate()?;
        let mut problem = Problem::new(self.nodes);
        problem.set_fixed(self.gauge, true);
        for e in &self.pairwise {
            let chol = e.information.cholesky().ok_or(Error::NumericalFailure)?;
            problem.add_residual(PairwiseBlock {
                params: [e.a, e.b],
                measured: e.a_from_b,
                sqrt_info: chol.l().transpose(),
            });
        }
        for e in &self.planes {
            problem.add_residual(GraphPlaneBlock {
                params: [e.a, e.b],
                plane_a: e.plane_a,
                plane_b: e.plane_b,
                weight: e.weight,
            });
        }
        Ok(problem)
    }

    /// Breadth-first composition of pairwise measurements from the gauge
    /// node, which sits at the identity.
    pub fn spanning_tree_init(&self) -> Result<Vec<Pose>> {
        self.validate()?;
        let mut nodes: Vec<Option<Pose>> = vec![None; self.nodes];
        nodes[self.gauge] = Some(Pose::identity());
        let mut queue = VecDeque::from([self.gauge]);
        while let Some(i) = queue.pop_front() {
            let xi = nodes[i].expect("queued nodes are placed");
            for e in &self.pairwise {
                // X_b = Z^-1 X_a, X_a = Z X_b.
                let next = if e.a == i {
                    (e.b, e.a_from_b.inverse() * xi)
                } else if e.b == i {
                    (e.a, e.a_from_b * xi)
                } else {
                    continue;
                };
                if nodes[next.0].is_none() {
                    nodes[next.0] = Some(next.1);
                    queue.push_back(next.0);
                }
            }
        }
        nodes
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::DisconnectedGraph)
    }
}

/// Optimizes all non-gauge nodes. Without `init`, nodes start from the
/// pairwise spanning tree.
pub fn optimize_graph(
    graph: &PoseGraph,
    init: Option<&[Pose]>,
    opts: &SolverOptions,
) -> Result<GraphSolution> {
    let tree = graph.spanning_tree_init()?;
    let start = match init {
        Some(p) if p.len() == graph.nodes => p.to_vec(),
        Some(_) => {
            return Err(Error::InvalidInput(
                "graph init has the wrong node count".into(),
            ))
        }
        None => tree,
    };
    let (nodes, report) = solve_nlls(&graph.problem()?, &start, opts)?;
    Ok(GraphSolution { nodes, report })
}
