//! Two-phase primal simplex for standard-form linear programs
//!
//! ```text
//!     min cᵀx  s.t.  A x = b,  x ≥ 0
//! ```
//!
//! The tableau is dense. Pricing uses Bland's rule in both phases, so the pivot
//! sequence is deterministic and cannot cycle. When phase 1 ends with a
//! positive artificial sum, the phase-1 duals give a Farkas vector `y` with
//! `yᵀA ≥ 0` and `yᵀb < 0`.

use crate::error::{HullError, Result};
use crate::numeric::{dot, Matrix};

/// Phase-1 optimum above this is reported as infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Reduced-cost threshold for an improving column.
const PRICE_TOL: f64 = 1e-9;
/// Smallest admissible pivot element in the ratio test.
const PIVOT_TOL: f64 = 1e-9;

/// `min cost·x  s.t.  eq_matrix·x = eq_rhs, x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    cost: Vec<f64>,
    eq_matrix: Matrix,
    eq_rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(cost: Vec<f64>, eq_matrix: Matrix, eq_rhs: Vec<f64>) -> Result<Self> {
        if cost.len() != eq_matrix.cols() {
            return Err(HullError::Dimension(format!(
                "cost has {} entries, constraint matrix has {} columns",
                cost.len(),
                eq_matrix.cols()
            )));
        }
        if eq_rhs.len() != eq_matrix.rows() {
            return Err(HullError::Dimension(format!(
                "rhs has {} entries, constraint matrix has {} rows",
                eq_rhs.len(),
                eq_matrix.rows()
            )));
        }
        if cost.iter().chain(&eq_rhs).any(|x| !x.is_finite()) {
            return Err(HullError::InvalidInput("non-finite LP data".into()));
        }
        Ok(Self {
            cost,
            eq_matrix,
            eq_rhs,
        })
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn eq_matrix(&self) -> &Matrix {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    /// Number of equality rows.
    pub fn num_rows(&self) -> usize {
        self.eq_matrix.rows()
    }

    /// Number of (nonnegative) variables.
    pub fn num_vars(&self) -> usize {
        self.eq_matrix.cols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    /// `duals` are the equality-row multipliers `y` with `c − Aᵀy ≥ 0`.
    Optimal {
        solution: Vec<f64>,
        objective: f64,
        duals: Vec<f64>,
    },
    /// `farkas` satisfies `farkasᵀA ≥ 0` and `farkasᵀb < 0`.
    Infeasible {
        farkas: Vec<f64>,
    },
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible { .. })
    }
}

/// Pivot log and final tableau objective of a solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveTrace {
    /// `(row, entering column)` of every pivot, in order, across both phases.
    pub pivots: Vec<(usize, usize)>,
    pub phase1_objective: f64,
    /// Objective read off the phase-2 tableau (optimal outcomes only).
    pub tableau_objective: Option<f64>,
}

pub fn lp_solve(p: &LpProblem) -> Result<LpOutcome> {
    lp_solve_traced(p).map(|(outcome, _)| outcome)
}

pub fn lp_solve_traced(p: &LpProblem) -> Result<(LpOutcome, SolveTrace)> {
    if p.num_rows() == 0 || p.num_vars() == 0 {
        return Err(HullError::Dimension(format!(
            "LP needs at least one row and one column, got {}x{}",
            p.num_rows(),
            p.num_vars()
        )));
    }
    let mut tab = Tableau::phase_one(p);
    let limit = 100 * (p.num_rows() + p.num_vars()) + 1000;

    // Artificial columns may leave but never re-enter during phase 1 either;
    // keeping them in the tableau preserves the dual information.
    let structural = p.num_vars();
    match tab.run(structural, limit)? {
        Pivoting::Optimal => {}
        Pivoting::Unbounded => unreachable!("phase 1 objective is bounded below by zero"),
    }
    let w = tab.objective();
    tab.trace.phase1_objective = w;
    if w > FEASIBILITY_TOL {
        let farkas = tab.farkas();
        return Ok((LpOutcome::Infeasible { farkas }, tab.trace));
    }

    tab.drive_out_artificials();
    tab.install_cost(&p.cost);
    match tab.run(structural, limit)? {
        Pivoting::Unbounded => Ok((LpOutcome::Unbounded, tab.trace)),
        Pivoting::Optimal => {
            let solution = tab.primal();
            let objective = dot(&p.cost, &solution);
            let duals = tab.duals();
            tab.trace.tableau_objective = Some(tab.objective());
            Ok((
                LpOutcome::Optimal {
                    solution,
                    objective,
                    duals,
                },
                tab.trace,
            ))
        }
    }
}

enum Pivoting {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    n: usize,
    /// `m` constraint rows of width `n + m + 1`, the last entry being the rhs.
    body: Matrix,
    /// Reduced costs for each column followed by `−objective`.
    reduced: Vec<f64>,
    basis: Vec<usize>,
    /// +1/−1 per row: rows with negative rhs are negated on entry.
    row_sign: Vec<f64>,
    trace: SolveTrace,
}

impl Tableau {
    fn phase_one(p: &LpProblem) -> Self {
        let (m, n) = (p.num_rows(), p.num_vars());
        let width = n + m + 1;
        let mut body = Matrix::zeros(m, width);
        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            let s = if p.eq_rhs[i] < 0.0 { -1.0 } else { 1.0 };
            row_sign[i] = s;
            let row = body.row_mut(i);
            for (dst, src) in row[..n].iter_mut().zip(p.eq_matrix.row(i)) {
                *dst = s * src;
            }
            row[n + i] = 1.0;
            row[n + m] = s * p.eq_rhs[i];
        }
        let mut reduced = vec![0.0; width];
        for i in 0..m {
            let row = body.row(i);
            for j in 0..n {
                reduced[j] -= row[j];
            }
            reduced[n + m] -= row[n + m];
        }
        Self {
            m,
            n,
            body,
            reduced,
            basis: (n..n + m).collect(),
            row_sign,
            trace: SolveTrace::default(),
        }
    }

    #[inline]
    fn rhs_col(&self) -> usize {
        self.n + self.m
    }

    fn objective(&self) -> f64 {
        -self.reduced[self.rhs_col()]
    }

    /// Pivots with Bland's rule over columns `0..enter_limit` until optimal.
    fn run(&mut self, enter_limit: usize, iteration_limit: usize) -> Result<Pivoting> {
        let rhs = self.rhs_col();
        loop {
            if self.trace.pivots.len() >= iteration_limit {
                return Err(HullError::IterationLimit(iteration_limit));
            }
            let Some(col) = (0..enter_limit).find(|&j| self.reduced[j] < -PRICE_TOL) else {
                return Ok(Pivoting::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.body[(i, col)];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.body[(i, rhs)].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Ok(Pivoting::Unbounded);
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.body.cols();
        let pivot = self.body[(row, col)];
        for v in self.body.row_mut(row) {
            *v /= pivot;
        }
        self.body[(row, col)] = 1.0;
        let pivot_row = self.body.row(row).to_vec();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let factor = self.body[(i, col)];
            if factor == 0.0 {
                continue;
            }
            let r = self.body.row_mut(i);
            for j in 0..width {
                r[j] -= factor * pivot_row[j];
            }
            r[col] = 0.0;
        }
        let factor = self.reduced[col];
        if factor != 0.0 {
            for (rc, p) in self.reduced[..width].iter_mut().zip(&pivot_row[..width]) {
                *rc -= factor * p;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
        self.trace.pivots.push((row, col));
    }

    /// Farkas vector in the caller's row orientation, from phase-1 duals.
    fn farkas(&self) -> Vec<f64> {
        // Reduced cost of artificial i is 1 − y_i.
        (0..self.m)
            .map(|i| -self.row_sign[i] * (1.0 - self.reduced[self.n + i]))
            .collect()
    }

    /// Equality duals of the current (phase-2) tableau: artificial `i` has zero
    /// cost, so its reduced cost is `−y_i`.
    fn duals(&self) -> Vec<f64> {
        (0..self.m)
            .map(|i| -self.row_sign[i] * self.reduced[self.n + i])
            .collect()
    }

    /// Pivots zero-level artificials out of the basis where a structural
    /// column allows it; rows that cannot be cleared are redundant and get
    /// their structural entries zeroed.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.n {
                continue;
            }
            let best = (0..self.n)
                .map(|j| (j, self.body[(i, j)].abs()))
                .filter(|&(_, a)| a > PIVOT_TOL)
                .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                    Some(b) if b.1 >= x.1 => Some(b),
                    _ => Some(x),
                });
            match best {
                Some((j, _)) => self.pivot(i, j),
                None => {
                    let row = self.body.row_mut(i);
                    row[..self.n].iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
    }

    fn install_cost(&mut self, cost: &[f64]) {
        let width = self.body.cols();
        let mut reduced = vec![0.0; width];
        reduced[..self.n].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = self
                .basis
                .get(i)
                .and_then(|&b| cost.get(b))
                .copied()
                .unwrap_or(0.0);
            if cb == 0.0 {
                continue;
            }
            let row = self.body.row(i);
            for j in 0..width {
                reduced[j] -= cb * row[j];
            }
        }
        for &b in &self.basis {
            if b < self.n {
                reduced[b] = 0.0;
            }
        }
        self.reduced = reduced;
    }

    fn primal(&self) -> Vec<f64> {
        let rhs = self.rhs_col();
        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.body[(i, rhs)];
            }
        }
        x
    }
}

/// Sign restriction on an original variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColumnMap {
    Direct(usize),
    Split { pos: usize, neg: usize },
}

/// A standard-form LP together with the map back to the original variables.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub problem: LpProblem,
    columns: Vec<ColumnMap>,
    num_slacks: usize,
}

impl StandardForm {
    pub fn num_slacks(&self) -> usize {
        self.num_slacks
    }

    /// Maps a standard-form solution to the original variables.
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| match *c {
                ColumnMap::Direct(j) => x[j],
                ColumnMap::Split { pos, neg } => x[pos] - x[neg],
            })
            .collect()
    }
}

/// Converts `min cost·x  s.t.  eq, ineq (≤), bounds` to standard form.
///
/// Inequality rows gain one nonnegative slack each, and free variables are
/// split into a difference of two nonnegative columns.
pub fn to_standard_form(
    cost: &[f64],
    eq: Option<(&Matrix, &[f64])>,
    ineq: Option<(&Matrix, &[f64])>,
    bounds: &[VarBound],
) -> Result<StandardForm> {
    let nvars = cost.len();
    if bounds.len() != nvars {
        return Err(HullError::Dimension(format!(
            "{} bounds for {nvars} variables",
            bounds.len()
        )));
    }
    for (name, block) in [("equality", eq), ("inequality", ineq)] {
        if let Some((a, b)) = block {
            if a.cols() != nvars || a.rows() != b.len() {
                return Err(HullError::Dimension(format!(
                    "{name} block is {}x{} with {} rhs entries for {nvars} variables",
                    a.rows(),
                    a.cols(),
                    b.len()
                )));
            }
        }
    }

    let mut columns = Vec::with_capacity(nvars);
    let mut next = 0;
    for bound in bounds {
        match bound {
            VarBound::NonNegative => {
                columns.push(ColumnMap::Direct(next));
                next += 1;
            }
            VarBound::Free => {
                columns.push(ColumnMap::Split {
                    pos: next,
                    neg: next + 1,
                });
                next += 2;
            }
        }
    }
    let num_slacks = ineq.map_or(0, |(a, _)| a.rows());
    let width = next + num_slacks;
    let eq_rows = eq.map_or(0, |(a, _)| a.rows());

    let mut a = Matrix::zeros(eq_rows + num_slacks, width);
    let mut rhs = Vec::with_capacity(eq_rows + num_slacks);
    let write_row = |a: &mut Matrix, r: usize, src: &[f64]| {
        for (j, map) in columns.iter().enumerate() {
            match *map {
                ColumnMap::Direct(c) => a[(r, c)] = src[j],
                ColumnMap::Split { pos, neg } => {
                    a[(r, pos)] = src[j];
                    a[(r, neg)] = -src[j];
                }
            }
        }
    };
    if let Some((m, b)) = eq {
        for (r, &br) in b.iter().enumerate().take(m.rows()) {
            write_row(&mut a, r, m.row(r));
            rhs.push(br);
        }
    }
    if let Some((m, b)) = ineq {
        for r in 0..m.rows() {
            write_row(&mut a, eq_rows + r, m.row(r));
            a[(eq_rows + r, next + r)] = 1.0;
            rhs.push(b[r]);
        }
    }

    let mut std_cost = vec![0.0; width];
    for (j, map) in columns.iter().enumerate() {
        match *map {
            ColumnMap::Direct(c) => std_cost[c] = cost[j],
            ColumnMap::Split { pos, neg } => {
                std_cost[pos] = cost[j];
                std_cost[neg] = -cost[j];
            }
        }
    }

    Ok(StandardForm {
        problem: LpProblem::new(std_cost, a, rhs)?,
        columns,
        num_slacks,
    })
}
