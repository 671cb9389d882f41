//! Minimization over a convex hull in either representation.
//!
//! Over a V-representation the problem is re-parameterized by convex weights,
//! `min f(Σ α_i v_i)` over the standard simplex, and solved with projected
//! gradient or Frank–Wolfe. Over an H-representation a log-barrier method
//! keeps iterates strictly inside `Av ≤ b`. Extra constraints `g_j(v) ≥ 0`
//! are handled by a quadratic penalty in both.

mod hrep;
mod simplex;
mod vrep;

use std::fmt;
use std::sync::Arc;
use std::time::Duration;

pub use hrep::{chebyshev_center, solve_hrep, ChebyshevBall};
pub use simplex::project_to_simplex;
pub use vrep::{linear_minimizer, solve_vrep, Method};

use crate::error::{HullError, Result};
use crate::hull::{combine, Weights};
use crate::numeric::dot;
use crate::polytope::VRep;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Default finite-difference step for objectives without a gradient.
pub const FD_STEP: f64 = 1e-6;

/// A smooth scalar function of `dim` variables, optionally with its gradient.
#[derive(Clone)]
pub struct Objective {
    dim: usize,
    eval: ScalarFn,
    grad: Option<GradientFn>,
    /// Function evaluations charged per gradient call when `grad` is set.
    grad_cost: usize,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("dim", &self.dim)
            .field("has_gradient", &self.grad.is_some())
            .finish()
    }
}

impl Objective {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            grad: None,
            grad_cost: 1,
        }
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self.grad_cost = 1;
        self
    }

    /// `c·x`.
    pub fn linear(c: Vec<f64>) -> Self {
        let g = c.clone();
        Self::new(c.len(), move |x| dot(&c, x)).with_gradient(move |_| g.clone())
    }

    /// `Σ w_i (x_i − center_i)² + base`.
    pub fn weighted_quadratic(center: Vec<f64>, weights: Vec<f64>, base: f64) -> Self {
        assert_eq!(center.len(), weights.len());
        let (c2, w2) = (center.clone(), weights.clone());
        Self::new(center.len(), move |x| {
            base + x
                .iter()
                .zip(&center)
                .zip(&weights)
                .map(|((xi, ci), wi)| wi * (xi - ci) * (xi - ci))
                .sum::<f64>()
        })
        .with_gradient(move |x| {
            x.iter()
                .zip(&c2)
                .zip(&w2)
                .map(|((xi, ci), wi)| 2.0 * wi * (xi - ci))
                .collect()
        })
    }

    /// `‖x − target‖²`.
    pub fn squared_distance(target: Vec<f64>) -> Self {
        let n = target.len();
        Self::weighted_quadratic(target, vec![1.0; n], 0.0)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Gradient at `x` and the number of function evaluations it cost.
    /// Without an analytic gradient this is a central difference with
    /// per-coordinate step `clamp(FD_STEP·max(1,|x_i|), step_min, step_max)`.
    pub fn gradient_counted(&self, x: &[f64], step_min: f64, step_max: f64) -> (Vec<f64>, usize) {
        match &self.grad {
            Some(g) => (g(x), self.grad_cost),
            None => (
                central_difference(&*self.eval, x, step_min, step_max),
                2 * x.len(),
            ),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.gradient_counted(x, 1e-8, 0.1).0
    }
}

pub(crate) fn central_difference(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    step_min: f64,
    step_max: f64,
) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = (FD_STEP * x[i].abs().max(1.0)).clamp(step_min, step_max);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Inequality `g(v) ≥ 0`.
#[derive(Clone)]
pub struct Constraint {
    dim: usize,
    eval: ScalarFn,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint")
            .field("dim", &self.dim)
            .finish()
    }
}

impl Constraint {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// `max(0, −g(x))`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        (-self.value(x)).max(0.0)
    }
}

/// Budgets and tolerances shared by all solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_fun_evals: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub constraint_tol: f64,
    pub objective_tol: f64,
    pub fd_step_max: f64,
    pub fd_step_min: f64,
}

impl SolveOptions {
    /// Budget for the weight-space (V-representation) solvers.
    pub fn vrep_defaults() -> Self {
        Self {
            max_fun_evals: 20_000,
            ..Self::hrep_defaults()
        }
    }

    /// Budget for the barrier (H-representation) solver.
    pub fn hrep_defaults() -> Self {
        Self {
            max_fun_evals: 5_000,
            max_iters: 500,
            step_tol: 1e-6,
            constraint_tol: 1e-6,
            objective_tol: 1e-6,
            fd_step_max: 0.1,
            fd_step_min: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.max_fun_evals > 0
            && self.max_iters > 0
            && [
                self.step_tol,
                self.constraint_tol,
                self.objective_tol,
                self.fd_step_max,
                self.fd_step_min,
            ]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive {
            return Err(HullError::InvalidInput(
                "solver options must be positive".into(),
            ));
        }
        if self.fd_step_min >= self.fd_step_max {
            return Err(HullError::InvalidInput(
                "fd_step_min must be below fd_step_max".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self::vrep_defaults()
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub minimizer: Vec<f64>,
    /// Convex weights of `minimizer` (weight-space solvers only).
    pub weights: Option<Weights>,
    pub objective: f64,
    pub iterations: usize,
    pub fun_evals: usize,
    pub elapsed: Duration,
    pub converged: bool,
    /// Largest constraint violation `max_j max(0, −g_j)` at the minimizer.
    pub max_violation: f64,
    /// Best objective seen after each iteration.
    pub history: Vec<f64>,
}

/// `F(α) = f(Σ α_i v_i)` over `R^m`, with chain-rule gradient
/// `∂F/∂α_i = ∇f(x)·v_i`.
///
/// Without an analytic `∇f` the chain rule is applied to a central difference
/// of `f` in `R^n`, which costs `2n` evaluations instead of `2m`.
pub fn compose_objective(f: &Objective, v: &VRep) -> Result<Objective> {
    if f.dim() != v.dim() {
        return Err(HullError::Dimension(format!(
            "objective has dimension {}, hull has {}",
            f.dim(),
            v.dim()
        )));
    }
    let points: Arc<Vec<Vec<f64>>> = Arc::new(v.points().to_vec());
    let m = points.len();
    let n = v.dim();

    let eval_pts = Arc::clone(&points);
    let eval_f = f.clone();
    let grad_pts = Arc::clone(&points);
    let grad_f = f.clone();
    let mut composed = Objective::new(m, move |alpha| eval_f.value(&combine(alpha, &eval_pts)))
        .with_gradient(move |alpha| {
            let x = combine(alpha, &grad_pts);
            let gx = grad_f.gradient_counted(&x, 1e-8, 0.1).0;
            grad_pts.iter().map(|p| dot(&gx, p)).collect()
        });
    if !f.has_gradient() {
        composed.grad_cost = 2 * n;
    }
    Ok(composed)
}

/// Shared bookkeeping: evaluation budget and best-so-far tracking.
struct Budget {
    opts: SolveOptions,
    fun_evals: usize,
    iterations: usize,
}

impl Budget {
    fn new(opts: SolveOptions) -> Self {
        Self {
            opts,
            fun_evals: 0,
            iterations: 0,
        }
    }

    fn exhausted(&self) -> bool {
        self.fun_evals >= self.opts.max_fun_evals || self.iterations >= self.opts.max_iters
    }
}

/// `f(x) + ρ Σ_j max(0, −g_j(x))²` with its gradient; constraint gradients
/// come from central differences.
struct Penalized<'a> {
    f: &'a Objective,
    cons: &'a [Constraint],
    rho: f64,
}

impl Penalized<'_> {
    fn value(&self, x: &[f64], budget: &mut Budget) -> f64 {
        budget.fun_evals += 1;
        let pen: f64 = self
            .cons
            .iter()
            .map(|g| {
                let v = g.violation(x);
                v * v
            })
            .sum();
        self.f.value(x) + self.rho * pen
    }

    fn gradient(&self, x: &[f64], budget: &mut Budget) -> Vec<f64> {
        let (mut g, cost) =
            self.f
                .gradient_counted(x, budget.opts.fd_step_min, budget.opts.fd_step_max);
        budget.fun_evals += cost;
        for c in self.cons {
            let v = c.violation(x);
            if v > 0.0 {
                let dg = central_difference(
                    &*c.eval,
                    x,
                    budget.opts.fd_step_min,
                    budget.opts.fd_step_max,
                );
                for (gi, di) in g.iter_mut().zip(dg) {
                    *gi -= 2.0 * self.rho * v * di;
                }
            }
        }
        g
    }
}

fn max_violation(cons: &[Constraint], x: &[f64]) -> f64 {
    cons.iter().map(|c| c.violation(x)).fold(0.0, f64::max)
}

/// Penalty weights tried in turn until constraints hold.
const PENALTY_START: f64 = 10.0;
const PENALTY_GROWTH: f64 = 10.0;
const PENALTY_ROUNDS: usize = 3;

fn check_dims(f: &Objective, cons: &[Constraint], dim: usize) -> Result<()> {
    if f.dim() != dim {
        return Err(HullError::Dimension(format!(
            "objective has dimension {}, feasible set has {dim}",
            f.dim()
        )));
    }
    if let Some(c) = cons.iter().find(|c| c.dim() != dim) {
        return Err(HullError::Dimension(format!(
            "constraint has dimension {}, feasible set has {dim}",
            c.dim()
        )));
    }
    Ok(())
}
