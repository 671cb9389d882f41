use std::time::Instant;

use super::{
    check_dims, max_violation, Budget, Constraint, Objective, Penalized, SolveOptions, SolveResult,
    PENALTY_GROWTH, PENALTY_ROUNDS, PENALTY_START,
};
use crate::error::{HullError, Result};
use crate::lp::{lp_solve, LpOutcome, LpProblem};
use crate::numeric::{dot, gaussian_solve, norm_inf, Matrix, EPS};
use crate::polytope::HRep;

const ARMIJO: f64 = 1e-4;
/// Barrier weights: 1, 0.1, …, 1e-6.
const MU_START: f64 = 1.0;
const MU_FACTOR: f64 = 0.1;
const MU_ROUNDS: usize = 7;
/// Fraction of the distance to the nearest facet a step may cover.
const BOUNDARY_FRACTION: f64 = 0.99;

/// Largest inscribed ball of a polyhedron.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Chebyshev center of `h`: `max r  s.t.  normal_i·x + r ≤ offset_i`.
///
/// The LP is solved in its dual form `min offset·y  s.t.  Σ y_i normal_i = 0,
/// Σ y_i = 1, y ≥ 0`, which has `n + 1` rows regardless of the facet count;
/// `(x, r)` are the equality multipliers of that dual.
pub fn chebyshev_center(h: &HRep) -> Result<ChebyshevBall> {
    let n = h.dim();
    let k = h.len();
    let mut a = Matrix::zeros(n + 1, k);
    for (j, hs) in h.halfspaces().iter().enumerate() {
        for r in 0..n {
            a[(r, j)] = hs.normal[r];
        }
        a[(n, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let cost: Vec<f64> = h.halfspaces().iter().map(|hs| hs.offset).collect();
    let lp = LpProblem::new(cost, a, rhs)?;
    match lp_solve(&lp)? {
        LpOutcome::Optimal { duals, .. } => {
            let center = duals[..n].to_vec();
            let radius = h.slacks(&center).into_iter().fold(f64::INFINITY, f64::min);
            if radius <= EPS {
                return Err(HullError::EmptyInterior { radius });
            }
            Ok(ChebyshevBall { center, radius })
        }
        // The inscribed-ball LP is infeasible: the polyhedron is empty.
        LpOutcome::Unbounded => Err(HullError::EmptyInterior {
            radius: f64::NEG_INFINITY,
        }),
        LpOutcome::Infeasible { .. } => {
            Err(HullError::Degenerate("polyhedron is unbounded".into()))
        }
    }
}

struct Barrier<'a> {
    h: &'a HRep,
    pen: Penalized<'a>,
    mu: f64,
}

impl Barrier<'_> {
    fn value(&self, x: &[f64], budget: &mut Budget) -> f64 {
        let mut log_sum = 0.0;
        for s in self.h.slacks(x) {
            if s <= 0.0 {
                return f64::INFINITY;
            }
            log_sum += s.ln();
        }
        self.pen.value(x, budget) - self.mu * log_sum
    }
}

/// Minimizes `f` over the H-representation by a log-barrier method.
///
/// Each barrier subproblem is solved by gradient descent in the metric
/// `μ Σ a_i a_iᵀ / s_i² + λI`, where the first term is the exact barrier
/// Hessian and `λ` is a Barzilai–Borwein curvature estimate of the
/// objective. Steps backtrack (Armijo) and never cross a facet.
pub fn solve_hrep(
    f: &Objective,
    cons: &[Constraint],
    h: &HRep,
    start: &[f64],
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let clock = Instant::now();
    opts.validate()?;
    let n = h.dim();
    check_dims(f, cons, n)?;
    if start.len() != n {
        return Err(HullError::Dimension(format!(
            "start has dimension {}, polytope has {n}",
            start.len()
        )));
    }
    if h.slacks(start).iter().any(|&s| s <= EPS) {
        return Err(HullError::InfeasibleStart);
    }

    let mut budget = Budget::new(*opts);
    let mut x = start.to_vec();
    let mut best_x = x.clone();
    let mut best_f = f.value(&x);
    let mut best_viol = max_violation(cons, &x);
    budget.fun_evals += 1;
    let mut history = Vec::new();
    let mut curvature = 1.0;
    let tol = opts.constraint_tol;

    let mut converged = false;
    let mut rho = PENALTY_START;
    let mut out_of_budget = false;
    'penalty: for round in 0..PENALTY_ROUNDS {
        let mus: Vec<f64> = if round == 0 {
            (0..MU_ROUNDS)
                .map(|i| MU_START * MU_FACTOR.powi(i as i32))
                .collect()
        } else {
            vec![MU_START * MU_FACTOR.powi(MU_ROUNDS as i32 - 1)]
        };
        for mu in mus {
            let barrier = Barrier {
                h,
                pen: Penalized { f, cons, rho },
                mu,
            };
            let mut value = barrier.value(&x, &mut budget);
            let mut grad_pen = barrier.pen.gradient(&x, &mut budget);
            loop {
                if budget.exhausted() {
                    out_of_budget = true;
                    break 'penalty;
                }
                budget.iterations += 1;

                let slacks = h.slacks(&x);
                let mut grad = grad_pen.clone();
                let mut metric = Matrix::zeros(n, n);
                for (hs, s) in h.halfspaces().iter().zip(&slacks) {
                    let w = mu / s;
                    for i in 0..n {
                        grad[i] += w * hs.normal[i];
                        let wi = w / s * hs.normal[i];
                        for j in 0..n {
                            metric[(i, j)] += wi * hs.normal[j];
                        }
                    }
                }
                for i in 0..n {
                    metric[(i, i)] += curvature;
                }
                let dir: Vec<f64> = match gaussian_solve(&metric, &grad) {
                    Ok(d) => d.into_iter().map(|v| -v).collect(),
                    Err(_) => grad.iter().map(|g| -g / curvature).collect(),
                };
                let slope = dot(&grad, &dir);
                if slope >= 0.0 {
                    break;
                }

                // Longest step that stays strictly inside every facet.
                let mut t: f64 = 1.0;
                for (hs, s) in h.halfspaces().iter().zip(&slacks) {
                    let rate = dot(&hs.normal, &dir);
                    if rate > 0.0 {
                        t = t.min(BOUNDARY_FRACTION * s / rate);
                    }
                }
                let (next, next_value) = loop {
                    let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
                    let v = barrier.value(&trial, &mut budget);
                    if v <= value + ARMIJO * t * slope {
                        break (Some(trial), v);
                    }
                    t *= 0.5;
                    if t * norm_inf(&dir) < f64::EPSILON || budget.exhausted() {
                        break (None, value);
                    }
                };
                let Some(next) = next else {
                    break;
                };

                let step: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
                let next_grad = barrier.pen.gradient(&next, &mut budget);
                let dg: Vec<f64> = next_grad
                    .iter()
                    .zip(&grad_pen)
                    .map(|(a, b)| a - b)
                    .collect();
                let ss = dot(&step, &step);
                if ss > 0.0 {
                    curvature = (dot(&dg, &step) / ss).clamp(1e-8, 1e8);
                }
                let decrease = value - next_value;
                x = next;
                value = next_value;
                grad_pen = next_grad;

                let fx = f.value(&x);
                let viol = max_violation(cons, &x);
                let better = match (viol <= tol, best_viol <= tol) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => fx < best_f,
                    (false, false) => viol < best_viol,
                };
                if better {
                    best_x.clone_from(&x);
                    best_f = fx;
                    best_viol = viol;
                }
                history.push(best_f);

                if norm_inf(&step) < opts.step_tol
                    || decrease < opts.objective_tol * value.abs().max(1.0)
                {
                    break;
                }
            }
        }
        if best_viol <= tol {
            converged = true;
            break;
        }
        rho *= PENALTY_GROWTH;
    }
    if out_of_budget {
        converged = false;
    }

    Ok(SolveResult {
        minimizer: best_x,
        weights: None,
        objective: best_f,
        iterations: budget.iterations,
        fun_evals: budget.fun_evals,
        elapsed: clock.elapsed(),
        converged,
        max_violation: best_viol,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::{solve_vrep, Method};
    use crate::polytope::{
        cross_polytope, hrep_contains, random_point_set, unit_cube, vrep_to_hrep, VRep,
    };

    fn cube2() -> HRep {
        unit_cube(2).unwrap().1
    }

    #[test]
    fn chebyshev_of_square() {
        let ball = chebyshev_center(&cube2()).unwrap();
        assert!((ball.center[0] - 0.5).abs() < 1e-9 && (ball.center[1] - 0.5).abs() < 1e-9);
        assert!((ball.radius - 0.5).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_of_diamond() {
        let h = cross_polytope(2).unwrap().1.unwrap();
        let ball = chebyshev_center(&h).unwrap();
        assert!(ball.center.iter().all(|c| c.abs() < 1e-9));
        assert!((ball.radius - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_of_quadrilateral() {
        let v = VRep::new(
            2,
            vec![
                vec![0.0, 0.0],
                vec![2.0, 0.0],
                vec![3.0, 2.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        let h = vrep_to_hrep(&v).unwrap().hrep;
        let ball = chebyshev_center(&h).unwrap();
        assert!(ball.radius > 0.0);
        for s in h.slacks(&ball.center) {
            assert!(s >= ball.radius - 1e-9);
        }
        assert!(hrep_contains(&h, &ball.center).unwrap());
    }

    #[test]
    fn chebyshev_flat_polytope() {
        // 0 ≤ x ≤ 1 and y = 0 written as two inequalities.
        let hs =
            |nx: f64, ny: f64, o: f64| crate::numeric::Hyperplane::new(vec![nx, ny], o).unwrap();
        let h = HRep::new(
            2,
            vec![
                hs(1.0, 0.0, 1.0),
                hs(-1.0, 0.0, 0.0),
                hs(0.0, 1.0, 0.0),
                hs(0.0, -1.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            chebyshev_center(&h),
            Err(HullError::EmptyInterior { .. })
        ));
    }

    #[test]
    fn linear_objective_on_square() {
        let f = Objective::new(2, |x| x[0]);
        let r = solve_hrep(
            &f,
            &[],
            &cube2(),
            &[0.5, 0.5],
            &SolveOptions::hrep_defaults(),
        )
        .unwrap();
        assert!(r.objective <= 1e-4, "{}", r.objective);
        assert!(hrep_contains(&cube2(), &r.minimizer).unwrap());
    }

    #[test]
    fn interior_target() {
        let f = Objective::squared_distance(vec![0.4, 0.3]);
        let r = solve_hrep(
            &f,
            &[],
            &cube2(),
            &[0.5, 0.5],
            &SolveOptions::hrep_defaults(),
        )
        .unwrap();
        assert!(r.objective <= 1e-6, "{}", r.objective);
        assert!(r.converged);
    }

    #[test]
    fn agrees_with_weight_space_solver() {
        let v = random_point_set(20, 2, 3).unwrap();
        let f = Objective::linear(vec![1.0, 1.0]);
        let oracle = v
            .points()
            .iter()
            .map(|p| p[0] + p[1])
            .fold(f64::INFINITY, f64::min);
        let h = vrep_to_hrep(&v).unwrap().hrep;
        let start = chebyshev_center(&h).unwrap().center;
        let rh = solve_hrep(&f, &[], &h, &start, &SolveOptions::hrep_defaults()).unwrap();
        let rv = solve_vrep(
            &f,
            &[],
            &v,
            &SolveOptions::vrep_defaults(),
            Method::ProjGrad,
        )
        .unwrap();
        assert!((rh.objective - rv.objective).abs() <= 1e-3);
        assert!((rh.objective - oracle).abs() <= 1e-3);
    }

    #[test]
    fn rejects_boundary_start() {
        let f = Objective::linear(vec![1.0, 0.0]);
        assert!(matches!(
            solve_hrep(
                &f,
                &[],
                &cube2(),
                &[0.0, 0.5],
                &SolveOptions::hrep_defaults()
            ),
            Err(HullError::InfeasibleStart)
        ));
        assert!(matches!(
            solve_hrep(&f, &[], &cube2(), &[0.5], &SolveOptions::hrep_defaults()),
            Err(HullError::Dimension(_))
        ));
    }

    #[test]
    fn history_is_monotone() {
        let f = Objective::squared_distance(vec![2.0, -1.0]);
        let r = solve_hrep(
            &f,
            &[],
            &cube2(),
            &[0.5, 0.5],
            &SolveOptions::hrep_defaults(),
        )
        .unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(hrep_contains(&cube2(), &r.minimizer).unwrap());
        // Nearest square point to (2, −1) is (1, 0).
        assert!((r.objective - 2.0).abs() < 1e-3, "{}", r.objective);
    }

    #[test]
    fn penalty_constraint() {
        let f = Objective::linear(vec![1.0, 0.0]);
        let g = Constraint::new(2, |x| x[0] - 0.5);
        let r = solve_hrep(
            &f,
            &[g],
            &cube2(),
            &[0.75, 0.5],
            &SolveOptions::hrep_defaults(),
        )
        .unwrap();
        // The reported point is the best feasible iterate.
        assert!(r.max_violation <= 1e-6);
        assert!(
            r.minimizer[0] >= 0.5 - 1e-6 && r.minimizer[0] < 0.6,
            "{:?}",
            r.minimizer
        );
    }
}
