use crate::geom::Pose;
use crate::prelude::*;

use super::lm::{Problem, MAX_BLOCK_DIM};

const STEP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct JacobianReport {
    /// Relative Frobenius error of each block's Jacobian, in insertion order.
    pub per_block: Vec<f64>,
    pub max_relative_error: f64,
}

/// Compares analytic Jacobians with central differences (step 1e-6 in each
/// tangent coordinate of each parameter pose).
pub fn check_jacobians(problem: &Problem<'_>, poses: &[Pose]) -> JacobianReport {
    let mut per_block = Vec::with_capacity(problem.residual_count());
    let mut r0 = [0.0; MAX_BLOCK_DIM];
    let mut rp = [0.0; MAX_BLOCK_DIM];
    let mut rm = [0.0; MAX_BLOCK_DIM];
    let mut work = poses.to_vec();
    for block in problem.blocks() {
        let dim = block.dim();
        let params = block.parameters();
        let mut analytic = vec![0.0; dim * params.len() * 6];
        block.evaluate(poses, &mut r0[..dim], Some(&mut analytic));
        let mut num = 0.0;
        let mut den = 0.0;
        for (pi, &p) in params.iter().enumerate() {
            for c in 0..6 {
                let mut d = [0.0; 6];
                d[c] = STEP;
                work[p] = poses[p].retract(&d);
                block.evaluate(&work, &mut rp[..dim], None);
                d[c] = -STEP;
                work[p] = poses[p].retract(&d);
                block.evaluate(&work, &mut rm[..dim], None);
                work[p] = poses[p];
                for row in 0..dim {
                    let fd = (rp[row] - rm[row]) / (2.0 * STEP);
                    let a = analytic[(pi * dim + row) * 6 + c];
                    num += (a - fd) * (a - fd);
                    den += fd * fd;
                }
            }
        }
        per_block.push(num.sqrt() / den.sqrt().max(1e-8));
    }
    let max_relative_error = per_block.iter().copied().fold(0.0, f64::max);
    JacobianReport {
        per_block,
        max_relative_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::lm::tests::LinearBlock;
    use crate::solvers::ResidualBlock;

    struct Corrupted;

    impl ResidualBlock for Corrupted {
        fn dim(&self) -> usize {
            2
        }
        fn parameters(&self) -> &[usize] {
            &[0]
        }
        fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>) {
            let t = poses[0].translation;
            residual[0] = t.x * t.y;
            residual[1] = t.z;
            if let Some(j) = jacobian {
                j[3] = t.y;
                j[4] = t.x * 1.5;
                j[6 + 5] = 1.0;
            }
        }
    }

    #[test]
    fn linear_residual_is_exact() {
        let mut problem = Problem::new(1);
        problem.add_residual(LinearBlock {
            target: 3.0,
            param: [0],
        });
        let pose = Pose::from_translation(Vec3::new(0.7, -2.0, 1.0));
        assert!(check_jacobians(&problem, &[pose]).max_relative_error < 1e-9);
    }

    #[test]
    fn corrupted_jacobian_is_flagged() {
        let mut problem = Problem::new(1);
        problem.add_residual(LinearBlock {
            target: 3.0,
            param: [0],
        });
        problem.add_residual(Corrupted);
        let pose = Pose::from_translation(Vec3::new(0.7, -2.0, 1.0));
        let report = check_jacobians(&problem, &[pose]);
        assert!(report.per_block[0] < 1e-9);
        assert!(report.per_block[1] > 1e-2);
        assert_eq!(report.max_relative_error, report.per_block[1]);
    }
}
