use alloc::boxed::Box;

use nalgebra::{DMatrix, DVector};

use crate::geom::Pose;
use crate::prelude::*;

/// Largest residual dimension a block may have.
pub const MAX_BLOCK_DIM: usize = 8;
const MAX_BLOCK_PARAMS: usize = 2;
const MAX_DAMPING: f64 = 1e32;

/// A residual term with an analytic Jacobian.
///
/// Jacobians are taken with respect to the tangent update used by the solver:
/// `R <- exp(dw) R`, `t <- t + dt`, ordered `[dw, dt]`.
pub trait ResidualBlock {
    fn dim(&self) -> usize;

    /// Indices of the poses this residual depends on (at most two).
    fn parameters(&self) -> &[usize];

    /// Writes the residual and, when requested, the Jacobian laid out as
    /// `jacobian[(param * dim + row) * 6 + col]`.
    fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Loss {
    Trivial,
    /// Quadratic below `delta`, linear above.
    Huber(f64),
}

impl Loss {
    /// `rho(s)` and `rho'(s)` for squared norm `s`.
    fn apply(&self, s: f64) -> (f64, f64) {
        match *self {
            Loss::Trivial => (s, 1.0),
            Loss::Huber(delta) => {
                let d2 = delta * delta;
                if s <= d2 {
                    (s, 1.0)
                } else {
                    let r = s.sqrt();
                    (2.0 * delta * r - d2, delta / r)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub parameter_tolerance: f64,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    /// Loss for blocks that do not carry their own.
    pub loss: Loss,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            parameter_tolerance: 1e-12,
            initial_damping: 1e-4,
            damping_increase: 10.0,
            damping_decrease: 0.1,
            loss: Loss::Trivial,
        }
    }
}

impl SolverOptions {
    pub fn validated(self) -> Result<Self> {
        let ok = self.gradient_tolerance > 0.0
            && self.parameter_tolerance > 0.0
            && self.initial_damping > 0.0
            && self.damping_increase > 1.0
            && self.damping_decrease > 0.0
            && self.damping_decrease < 1.0
            && match self.loss {
                Loss::Huber(d) => d > 0.0,
                Loss::Trivial => true,
            };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidInput(
                "solver tolerances and damping factors must be positive".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    ParameterTolerance,
    /// Damping grew without finding a decrease: a minimum at working precision.
    NoFurtherDecrease,
    MaxIterations,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::GradientTolerance => "gradient_tolerance",
            Termination::ParameterTolerance => "parameter_tolerance",
            Termination::NoFurtherDecrease => "no_further_decrease",
            Termination::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Infinity norm of the gradient at the returned point.
    pub gradient_norm: f64,
    pub termination: Termination,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
    /// Gauss-Newton information `J^T J` at the returned point, over free poses.
    pub information: DMatrix<f64>,
}

struct Block<'a> {
    residual: Box<dyn ResidualBlock + 'a>,
    loss: Option<Loss>,
}

/// Structure of a least-squares problem over a set of poses. The cost is
/// `sum rho(|r_i|^2)`, with no factor of one half.
#[derive(Default)]
pub struct Problem<'a> {
    fixed: Vec<bool>,
    blocks: Vec<Block<'a>>,
}

impl<'a> Problem<'a> {
    pub fn new(pose_count: usize) -> Self {
        Self {
            fixed: vec![false; pose_count],
            blocks: Vec::new(),
        }
    }

    pub fn pose_count(&self) -> usize {
        self.fixed.len()
    }

    pub fn residual_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn set_fixed(&mut self, pose: usize, fixed: bool) {
        self.fixed[pose] = fixed;
    }

    pub fn is_fixed(&self, pose: usize) -> bool {
        self.fixed[pose]
    }

    pub fn add_residual(&mut self, block: impl ResidualBlock + 'a) {
        self.blocks.push(Block {
            residual: Box::new(block),
            loss: None,
        });
    }

    pub fn add_residual_with_loss(&mut self, block: impl ResidualBlock + 'a, loss: Loss) {
        self.blocks.push(Block {
            residual: Box::new(block),
            loss: Some(loss),
        });
    }

    /// The residual blocks, in insertion order.
    pub fn blocks(&self) -> impl Iterator<Item = &dyn ResidualBlock> {
        self.blocks.iter().map(|b| b.residual.as_ref())
    }

    fn validate(&self, poses: &[Pose]) -> Result<()> {
        if poses.len() != self.fixed.len() {
            return Err(Error::InvalidInput(
                "initial pose count does not match the problem".into(),
            ));
        }
        for b in &self.blocks {
            let r = &b.residual;
            if r.dim() == 0 || r.dim() > MAX_BLOCK_DIM || r.parameters().len() > MAX_BLOCK_PARAMS {
                return Err(Error::InvalidInput(
                    "residual block dimensions out of range".into(),
                ));
            }
            if r.parameters().iter().any(|&p| p >= self.fixed.len()) {
                return Err(Error::InvalidInput(
                    "residual references a missing pose".into(),
                ));
            }
        }
        Ok(())
    }

    /// Column offset of each pose in the reduced system, `None` when fixed.
    fn layout(&self) -> (Vec<Option<usize>>, usize) {
        let mut next = 0;
        let offsets = self
            .fixed
            .iter()
            .map(|&f| {
                if f {
                    None
                } else {
                    next += 6;
                    Some(next - 6)
                }
            })
            .collect();
        (offsets, next)
    }

    pub fn cost(&self, poses: &[Pose], default_loss: Loss) -> f64 {
        let mut r = [0.0; MAX_BLOCK_DIM];
        let mut total = 0.0;
        for b in &self.blocks {
            let dim = b.residual.dim();
            b.residual.evaluate(poses, &mut r[..dim], None);
            let s: f64 = r[..dim].iter().map(|v| v * v).sum();
            total += b.loss.unwrap_or(default_loss).apply(s).0;
        }
        total
    }

    /// Cost at `poses` and its change from the stored residuals `old`. The
    /// change is summed term by term so constant terms cancel exactly.
    fn trial(&self, poses: &[Pose], old: &[f64], default_loss: Loss) -> (f64, f64) {
        let mut r = [0.0; MAX_BLOCK_DIM];
        let mut total = 0.0;
        let mut change = 0.0;
        for (b, o) in self.blocks.iter().zip(old.chunks_exact(MAX_BLOCK_DIM)) {
            let dim = b.residual.dim();
            b.residual.evaluate(poses, &mut r[..dim], None);
            let loss = b.loss.unwrap_or(default_loss);
            let s_new: f64 = r[..dim].iter().map(|v| v * v).sum();
            let s_old: f64 = o[..dim].iter().map(|v| v * v).sum();
            let ds: f64 = r[..dim]
                .iter()
                .zip(&o[..dim])
                .map(|(n, o)| (n - o) * (n + o))
                .sum();
            let (rho_new, _) = loss.apply(s_new);
            let (rho_old, _) = loss.apply(s_old);
            total += rho_new;
            change += match loss {
                Loss::Huber(d) if s_new > d * d || s_old > d * d => rho_new - rho_old,
                _ => ds,
            };
        }
        (total, change)
    }

    /// Cost, normal matrix `J^T W J`, gradient `J^T W r` and the raw
    /// residuals at stride `MAX_BLOCK_DIM`.
    fn linearize(
        &self,
        poses: &[Pose],
        default_loss: Loss,
    ) -> (f64, DMatrix<f64>, DVector<f64>, Vec<f64>) {
        let (offsets, n) = self.layout();
        let mut h = DMatrix::zeros(n, n);
        let mut g = DVector::zeros(n);
        let mut r = [0.0; MAX_BLOCK_DIM];
        let mut jac = [0.0; MAX_BLOCK_DIM * MAX_BLOCK_PARAMS * 6];
        let mut total = 0.0;
        let mut stored = vec![0.0; self.blocks.len() * MAX_BLOCK_DIM];
        for (b, slot) in self
            .blocks
            .iter()
            .zip(stored.chunks_exact_mut(MAX_BLOCK_DIM))
        {
            let block = b.residual.as_ref();
            let dim = block.dim();
            let params = block.parameters();
            let jl = dim * params.len() * 6;
            jac[..jl].iter_mut().for_each(|v| *v = 0.0);
            block.evaluate(poses, &mut r[..dim], Some(&mut jac[..jl]));
            slot[..dim].copy_from_slice(&r[..dim]);
            let s: f64 = r[..dim].iter().map(|v| v * v).sum();
            let (rho, w) = b.loss.unwrap_or(default_loss).apply(s);
            total += rho;
            for (pa, &ia) in params.iter().enumerate() {
                let Some(oa) = offsets[ia] else { continue };
                let ja = &jac[pa * dim * 6..(pa + 1) * dim * 6];
                for c in 0..6 {
                    let mut acc = 0.0;
                    for row in 0..dim {
                        acc += ja[row * 6 + c] * r[row];
                    }
                    g[oa + c] += w * acc;
                }
                for (pb, &ib) in params.iter().enumerate() {
                    let Some(ob) = offsets[ib] else { continue };
                    let jb = &jac[pb * dim * 6..(pb + 1) * dim * 6];
                    for c1 in 0..6 {
                        for c2 in 0..6 {
                            let mut acc = 0.0;
                            for row in 0..dim {
                                acc += ja[row * 6 + c1] * jb[row * 6 + c2];
                            }
                            h[(oa + c1, ob + c2)] += w * acc;
                        }
                    }
                }
            }
        }
        (total, h, g, stored)
    }
}

fn retract_all(poses: &[Pose], offsets: &[Option<usize>], delta: &DVector<f64>) -> Vec<Pose> {
    poses
        .iter()
        .zip(offsets)
        .map(|(p, o)| match o {
            Some(o) => p.retract(&delta.as_slice()[*o..*o + 6]),
            None => *p,
        })
        .collect()
}

fn state_norm(poses: &[Pose], offsets: &[Option<usize>]) -> f64 {
    poses
        .iter()
        .zip(offsets)
        .filter(|(_, o)| o.is_some())
        .map(|(p, _)| p.to_vector().iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// Levenberg-Marquardt over the free poses of `problem`, starting at `init`.
///
/// Accepted steps never increase the cost. Hitting `max_iterations` is
/// reported through `SolveReport::converged`, not as an error.
pub fn solve_nlls(
    problem: &Problem<'_>,
    init: &[Pose],
    opts: &SolverOptions,
) -> Result<(Vec<Pose>, SolveReport)> {
    let opts = opts.validated()?;
    problem.validate(init)?;
    let (offsets, n) = problem.layout();
    let mut poses = init.to_vec();
    let (mut cost, mut h, mut g, mut residuals) = problem.linearize(&poses, opts.loss);
    if !cost.is_finite() || h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure);
    }
    let initial_cost = cost;
    let mut history = vec![cost];
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    if n == 0 {
        termination = Termination::GradientTolerance;
    }
    while n > 0 {
        if g.amax() <= opts.gradient_tolerance {
            termination = Termination::GradientTolerance;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;
        let max_diag = h.diagonal().amax().max(1e-300);
        let mut damped = h.clone();
        for i in 0..n {
            damped[(i, i)] += lambda * h[(i, i)].max(1e-9 * max_diag);
        }
        let step = damped.cholesky().map(|c| c.solve(&(-&g)));
        let Some(delta) = step else {
            lambda *= opts.damping_increase;
            if lambda > MAX_DAMPING {
                termination = Termination::NoFurtherDecrease;
                break;
            }
            continue;
        };
        let scale = state_norm(&poses, &offsets);
        if delta.norm() <= opts.parameter_tolerance * (scale + opts.parameter_tolerance) {
            termination = Termination::ParameterTolerance;
            break;
        }
        let candidate = retract_all(&poses, &offsets, &delta);
        let (new_cost, change) = problem.trial(&candidate, &residuals, opts.loss);
        if new_cost.is_finite() && change < 0.0 && new_cost <= cost {
            poses = candidate;
            let (c, h2, g2, r2) = problem.linearize(&poses, opts.loss);
            if !c.is_finite() || h2.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalFailure);
            }
            cost = c;
            h = h2;
            g = g2;
            residuals = r2;
            history.push(cost);
            lambda = (lambda * opts.damping_decrease).max(1e-15);
        } else {
            lambda *= opts.damping_increase;
            if lambda > MAX_DAMPING {
                termination = Termination::NoFurtherDecrease;
                break;
            }
        }
    }
    let report = SolveReport {
        converged: termination != Termination::MaxIterations,
        iterations,
        initial_cost,
        final_cost: cost,
        gradient_norm: if n == 0 { 0.0 } else { g.amax() },
        termination,
        cost_history: history,
        information: h,
    };
    Ok((poses, report))
}
