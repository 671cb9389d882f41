use std::time::Instant;

use super::{
    check_dims, max_violation, project_to_simplex, Budget, Constraint, Objective, Penalized,
    SolveOptions, SolveResult, PENALTY_GROWTH, PENALTY_ROUNDS, PENALTY_START,
};
use crate::error::{HullError, Result};
use crate::hull::{combine, Weights};
use crate::numeric::{axpy, dot, norm_inf};
use crate::polytope::VRep;

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    /// Projected gradient with backtracking.
    #[default]
    ProjGrad,
    /// Conditional gradient with step `2/(t+2)`.
    FrankWolfe,
}

/// Frank–Wolfe oracle over the simplex: the vertex `e_i` minimizing `g·e_i`,
/// lowest index on ties.
pub fn linear_minimizer(grad: &[f64]) -> usize {
    grad.iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, &g)| if g < best.1 { (i, g) } else { best },
        )
        .0
}

struct Iterate {
    alpha: Vec<f64>,
    x: Vec<f64>,
}

struct Best {
    alpha: Vec<f64>,
    x: Vec<f64>,
    objective: f64,
    violation: f64,
}

impl Best {
    /// Feasible points beat infeasible ones; ties break on objective.
    fn offer(&mut self, it: &Iterate, objective: f64, violation: f64, tol: f64) {
        let key = |v: f64, f: f64| (v > tol, if v > tol { v } else { f });
        let (new_bad, new_val) = key(violation, objective);
        let (old_bad, old_val) = key(self.violation, self.objective);
        if (new_bad, new_val) < (old_bad, old_val) {
            self.alpha.clone_from(&it.alpha);
            self.x.clone_from(&it.x);
            self.objective = objective;
            self.violation = violation;
        }
    }
}

struct Run<'a> {
    f: &'a Objective,
    cons: &'a [Constraint],
    points: &'a [Vec<f64>],
    budget: Budget,
    best: Best,
    history: Vec<f64>,
}

impl Run<'_> {
    fn alpha_gradient(&mut self, pen: &Penalized, x: &[f64]) -> Vec<f64> {
        let gx = pen.gradient(x, &mut self.budget);
        self.points.iter().map(|p| dot(&gx, p)).collect()
    }

    fn record(&mut self, it: &Iterate) {
        let objective = self.f.value(&it.x);
        let violation = max_violation(self.cons, &it.x);
        let tol = self.budget.opts.constraint_tol;
        self.best.offer(it, objective, violation, tol);
        self.history.push(self.best.objective);
    }

    /// Projected gradient on the penalized objective; returns whether it
    /// stopped on a tolerance rather than the budget.
    fn projected_gradient(&mut self, pen: &Penalized, it: &mut Iterate) -> bool {
        let opts = self.budget.opts;
        let mut value = pen.value(&it.x, &mut self.budget);
        let mut grad = self.alpha_gradient(pen, &it.x);
        let mut step = 1.0 / norm_inf(&grad).max(1e-12);
        loop {
            if self.budget.exhausted() {
                return false;
            }
            self.budget.iterations += 1;

            let (cand, cand_x, cand_value) = loop {
                let trial: Vec<f64> = it
                    .alpha
                    .iter()
                    .zip(&grad)
                    .map(|(a, g)| a - step * g)
                    .collect();
                let cand = project_to_simplex(&trial).into_vec();
                let d: Vec<f64> = cand.iter().zip(&it.alpha).map(|(c, a)| c - a).collect();
                if norm_inf(&d) <= f64::EPSILON {
                    // Projected gradient step vanished: stationary.
                    self.record(it);
                    return true;
                }
                let cand_x = combine(&cand, self.points);
                let cand_value = pen.value(&cand_x, &mut self.budget);
                if cand_value <= value + ARMIJO * dot(&grad, &d) {
                    break (cand, cand_x, cand_value);
                }
                step *= 0.5;
                if self.budget.exhausted() {
                    self.record(it);
                    return false;
                }
            };

            let moved = cand
                .iter()
                .zip(&it.alpha)
                .fold(0.0f64, |m, (c, a)| m.max((c - a).abs()));
            let prev_alpha = std::mem::replace(&mut it.alpha, cand);
            it.x = cand_x;
            value = cand_value;
            self.record(it);
            let prev_grad = std::mem::replace(&mut grad, self.alpha_gradient(pen, &it.x));
            // The Frank–Wolfe gap bounds the suboptimality of a convex
            // objective, so it is a certificate rather than a heuristic.
            let gap = dot(&grad, &it.alpha) - grad[linear_minimizer(&grad)];
            if moved < opts.step_tol * 1e-3 || gap <= opts.objective_tol * value.abs().max(1.0) {
                return true;
            }
            // Barzilai–Borwein step from the last displacement, falling back
            // to doubling where the curvature estimate is unusable.
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..it.alpha.len() {
                let s = it.alpha[i] - prev_alpha[i];
                ss += s * s;
                sy += s * (grad[i] - prev_grad[i]);
            }
            step = if sy > 0.0 && ss > 0.0 {
                ss / sy
            } else {
                2.0 * step
            };
        }
    }

    fn frank_wolfe(&mut self, pen: &Penalized, it: &mut Iterate) -> bool {
        let opts = self.budget.opts;
        for t in 0.. {
            if self.budget.exhausted() {
                return false;
            }
            self.budget.iterations += 1;
            let value = pen.value(&it.x, &mut self.budget);
            let grad = self.alpha_gradient(pen, &it.x);
            let k = linear_minimizer(&grad);
            let gap = dot(&grad, &it.alpha) - grad[k];
            if gap <= opts.objective_tol * value.abs().max(1.0) {
                self.record(it);
                return true;
            }
            let gamma = 2.0 / (t as f64 + 2.0);
            it.alpha.iter_mut().for_each(|a| *a *= 1.0 - gamma);
            it.alpha[k] += gamma;
            it.x.iter_mut().for_each(|x| *x *= 1.0 - gamma);
            axpy(gamma, &self.points[k], &mut it.x);
            self.record(it);
        }
        unreachable!()
    }
}

/// Minimizes `f` over `conv(V)` in weight space, starting from the
/// barycenter.
pub fn solve_vrep(
    f: &Objective,
    cons: &[Constraint],
    v: &VRep,
    opts: &SolveOptions,
    method: Method,
) -> Result<SolveResult> {
    let start = Instant::now();
    opts.validate()?;
    check_dims(f, cons, v.dim())?;
    let m = v.len();
    if m < 1 {
        return Err(HullError::TooFewPoints { needed: 1, got: m });
    }

    let points = v.points();
    let alpha = Weights::barycenter(m).into_vec();
    let x = combine(&alpha, points);
    let mut it = Iterate { alpha, x };
    let mut run = Run {
        f,
        cons,
        points,
        budget: Budget::new(*opts),
        best: Best {
            alpha: it.alpha.clone(),
            x: it.x.clone(),
            objective: f.value(&it.x),
            violation: max_violation(cons, &it.x),
        },
        history: Vec::new(),
    };
    run.budget.fun_evals += 1;

    let mut converged = false;
    let mut rho = PENALTY_START;
    for _ in 0..PENALTY_ROUNDS {
        let pen = Penalized { f, cons, rho };
        let stopped_on_tol = if m == 1 {
            true
        } else {
            match method {
                Method::ProjGrad => run.projected_gradient(&pen, &mut it),
                Method::FrankWolfe => run.frank_wolfe(&pen, &mut it),
            }
        };
        let feasible = run.best.violation <= opts.constraint_tol;
        converged = stopped_on_tol && feasible;
        if feasible || !stopped_on_tol {
            break;
        }
        rho *= PENALTY_GROWTH;
    }

    let Run {
        budget,
        best,
        history,
        ..
    } = run;
    Ok(SolveResult {
        minimizer: best.x,
        weights: Some(Weights::from_nearly_simplex(best.alpha)),
        objective: best.objective,
        iterations: budget.iterations,
        fun_evals: budget.fun_evals,
        elapsed: start.elapsed(),
        converged,
        max_violation: best.violation,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::contains;
    use crate::polytope::{random_point_set, unit_cube};

    fn cube2() -> VRep {
        unit_cube(2).unwrap().0.unwrap()
    }

    #[test]
    fn lmo_picks_argmin() {
        assert_eq!(linear_minimizer(&[3.0, -1.0, 2.0, -1.0]), 1);
        assert_eq!(linear_minimizer(&[0.5]), 0);
    }

    #[test]
    fn linear_objective_on_square() {
        for method in [Method::ProjGrad, Method::FrankWolfe] {
            let f = Objective::new(2, |x| x[0]);
            let r = solve_vrep(&f, &[], &cube2(), &SolveOptions::default(), method).unwrap();
            assert!(r.objective.abs() <= 1e-6, "{method:?}: {}", r.objective);
            assert!(r.minimizer[0].abs() <= 1e-6);
        }
    }

    #[test]
    fn interior_target() {
        let f = Objective::squared_distance(vec![0.4, 0.3]);
        let r = solve_vrep(
            &f,
            &[],
            &cube2(),
            &SolveOptions::default(),
            Method::ProjGrad,
        )
        .unwrap();
        assert!(r.objective <= 1e-6, "{}", r.objective);
        assert!(r.converged);
    }

    #[test]
    fn linear_objective_matches_vertex_scan() {
        let v = random_point_set(20, 2, 3).unwrap();
        // Oracle: a linear function over a polytope is minimized at a vertex.
        let oracle = v
            .points()
            .iter()
            .map(|p| p[0] + p[1])
            .fold(f64::INFINITY, f64::min);
        let f = Objective::linear(vec![1.0, 1.0]);
        let r = solve_vrep(&f, &[], &v, &SolveOptions::default(), Method::ProjGrad).unwrap();
        assert!(
            (r.objective - oracle).abs() <= 1e-5,
            "{} vs {oracle}",
            r.objective
        );
        assert!(contains(&v, &r.minimizer).unwrap().is_inside());
    }

    #[test]
    fn history_is_monotone() {
        let v = random_point_set(15, 3, 8).unwrap();
        let f = Objective::squared_distance(vec![2.0, -0.5, 0.1]);
        for method in [Method::ProjGrad, Method::FrankWolfe] {
            let r = solve_vrep(&f, &[], &v, &SolveOptions::default(), method).unwrap();
            assert!(!r.history.is_empty());
            assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
            let w = r.weights.unwrap();
            let x = w.combine(v.points());
            for (a, b) in x.iter().zip(&r.minimizer) {
                assert!((a - b).abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn penalty_constraint_moves_minimizer() {
        // min x0 over the unit square subject to x0 ≥ 0.5.
        let f = Objective::linear(vec![1.0, 0.0]);
        let g = Constraint::new(2, |x| x[0] - 0.5);
        let r = solve_vrep(
            &f,
            &[g],
            &cube2(),
            &SolveOptions::default(),
            Method::ProjGrad,
        )
        .unwrap();
        assert!((r.minimizer[0] - 0.5).abs() < 0.05, "{:?}", r.minimizer);
    }

    #[test]
    fn budget_exhaustion_reports_not_converged() {
        let v = random_point_set(30, 3, 2).unwrap();
        let f = Objective::squared_distance(vec![3.0, 3.0, 3.0]);
        let opts = SolveOptions {
            max_iters: 2,
            ..SolveOptions::default()
        };
        let r = solve_vrep(&f, &[], &v, &opts, Method::FrankWolfe).unwrap();
        assert!(!r.converged);
        assert!(r.iterations <= 2);
    }

    #[test]
    fn dimension_checks() {
        let f = Objective::linear(vec![1.0]);
        assert!(matches!(
            solve_vrep(
                &f,
                &[],
                &cube2(),
                &SolveOptions::default(),
                Method::ProjGrad
            ),
            Err(HullError::Dimension(_))
        ));
    }
}
