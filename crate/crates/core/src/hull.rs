//! Queries answered directly on the V-representation by linear programming:
//! membership with certificates, extreme-point tests, and pruning to the
//! extreme points.

use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::lp::{lp_solve, LpOutcome, LpProblem};
use crate::numeric::{axpy, dot, norm2, Hyperplane, Matrix, EPS};
use crate::parallel;
use crate::polytope::VRep;

/// Convex-combination coefficients: a point of the standard simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    alpha: Vec<f64>,
}

impl Weights {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(HullError::InvalidInput("empty weight vector".into()));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < -EPS) {
            return Err(HullError::InvalidInput(
                "weights must be nonnegative".into(),
            ));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > EPS {
            return Err(HullError::InvalidInput(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { alpha })
    }

    /// Clamps tiny negatives and rescales to sum one. Used on LP and
    /// projection output, which are on the simplex up to rounding.
    pub(crate) fn from_nearly_simplex(mut alpha: Vec<f64>) -> Self {
        alpha.iter_mut().for_each(|a| *a = a.max(0.0));
        let sum: f64 = alpha.iter().sum();
        if sum > 0.0 {
            alpha.iter_mut().for_each(|a| *a /= sum);
        } else {
            let m = alpha.len() as f64;
            alpha.iter_mut().for_each(|a| *a = 1.0 / m);
        }
        Self { alpha }
    }

    pub fn barycenter(m: usize) -> Self {
        Self {
            alpha: vec![1.0 / m as f64; m],
        }
    }

    pub fn vertex(m: usize, k: usize) -> Self {
        let mut alpha = vec![0.0; m];
        alpha[k] = 1.0;
        Self { alpha }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.alpha
    }

    /// `Σ α_i v_i`.
    pub fn combine<P: AsRef<[f64]>>(&self, points: &[P]) -> Vec<f64> {
        combine(&self.alpha, points)
    }
}

pub(crate) fn combine<P: AsRef<[f64]>>(alpha: &[f64], points: &[P]) -> Vec<f64> {
    let n = points.first().map_or(0, |p| p.as_ref().len());
    let mut x = vec![0.0; n];
    for (a, p) in alpha.iter().zip(points) {
        if *a != 0.0 {
            axpy(*a, p.as_ref(), &mut x);
        }
    }
    x
}

/// Answer to a membership query, with a checkable certificate either way.
#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    /// The query is `Σ α_i v_i` for these weights.
    Inside(Weights),
    /// Every point satisfies `normal·v ≤ offset` while the query does not.
    Outside(Hyperplane),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }

    pub fn weights(&self) -> Option<&Weights> {
        match self {
            Membership::Inside(w) => Some(w),
            Membership::Outside(_) => None,
        }
    }

    pub fn separator(&self) -> Option<&Hyperplane> {
        match self {
            Membership::Outside(h) => Some(h),
            Membership::Inside(_) => None,
        }
    }
}

/// Builds `Σ α_i p_i = target, Σ α_i = 1, α ≥ 0` with each coordinate row
/// scaled to unit max-norm. Returns the problem and the row scales.
fn combination_lp<'a, I>(points: I, count: usize, target: &[f64]) -> Result<(LpProblem, Vec<f64>)>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let n = target.len();
    let mut scale: Vec<f64> = target.iter().map(|x| x.abs()).collect();
    for p in points.clone() {
        for (s, x) in scale.iter_mut().zip(p) {
            *s = s.max(x.abs());
        }
    }
    scale
        .iter_mut()
        .filter(|s| **s == 0.0)
        .for_each(|s| *s = 1.0);

    let mut a = Matrix::zeros(n + 1, count);
    for (j, p) in points.enumerate() {
        for r in 0..n {
            a[(r, j)] = p[r] / scale[r];
        }
        a[(n, j)] = 1.0;
    }
    let mut rhs: Vec<f64> = target.iter().zip(&scale).map(|(x, s)| x / s).collect();
    rhs.push(1.0);
    Ok((LpProblem::new(vec![0.0; count], a, rhs)?, scale))
}

/// LP membership test for `query ∈ conv(V)`.
///
/// Outside answers carry a separating hyperplane derived from the Farkas
/// certificate of the infeasible combination LP.
pub fn contains(v: &VRep, query: &[f64]) -> Result<Membership> {
    let n = v.dim();
    if query.len() != n {
        return Err(HullError::Dimension(format!(
            "query has dimension {}, hull has {n}",
            query.len()
        )));
    }
    let points = v.points().iter().map(Vec::as_slice);
    let (lp, scale) = combination_lp(points, v.len(), query)?;
    match lp_solve(&lp)? {
        LpOutcome::Optimal { solution, .. } => {
            Ok(Membership::Inside(Weights::from_nearly_simplex(solution)))
        }
        LpOutcome::Infeasible { farkas } => {
            // zᵀ[V; 1] ≥ 0 and zᵀ[q; 1] < 0 give h = −z_{0..n}:
            // h·v_i ≤ z_n < h·q.
            let normal: Vec<f64> = farkas[..n]
                .iter()
                .zip(&scale)
                .map(|(z, s)| -z / s)
                .collect();
            if !norm2(&normal).is_normal() {
                return Err(HullError::Degenerate(
                    "Farkas certificate has no spatial component".into(),
                ));
            }
            let mut h = Hyperplane::new(normal, 0.0)?;
            h.offset = v
                .points()
                .iter()
                .map(|p| dot(&h.normal, p))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(Membership::Outside(h))
        }
        LpOutcome::Unbounded => unreachable!("zero-cost LP cannot be unbounded"),
    }
}

/// Whether point `k` is not a convex combination of the other points.
pub fn is_extreme(v: &VRep, k: usize) -> Result<bool> {
    let m = v.len();
    if k >= m {
        return Err(HullError::Index { index: k, len: m });
    }
    if m == 1 {
        return Ok(true);
    }
    let others = v
        .points()
        .iter()
        .enumerate()
        .filter(move |&(i, _)| i != k)
        .map(|(_, p)| p.as_slice());
    let (lp, _) = combination_lp(others, m - 1, v.point(k))?;
    Ok(lp_solve(&lp)?.is_infeasible())
}

/// Indices of the extreme points, in input order. Runs one LP per point,
/// spread over `HULLKIT_THREADS` workers.
pub fn extreme_indices(v: &VRep) -> Result<Vec<usize>> {
    let idx: Vec<usize> = (0..v.len()).collect();
    let threads = parallel::configured_threads();
    let shares = parallel::map_interleaved(&idx, threads, |share| {
        share
            .into_iter()
            .map(|k| is_extreme(v, k).map(|e| (k, e)))
            .collect::<Result<Vec<_>>>()
    });
    let mut flags = vec![false; v.len()];
    for share in shares {
        for (k, e) in share? {
            flags[k] = e;
        }
    }
    Ok((0..v.len()).filter(|&k| flags[k]).collect())
}

/// The sub-V-representation of extreme points; its hull equals `conv(V)`.
pub fn extreme_points(v: &VRep) -> Result<VRep> {
    let keep = extreme_indices(v)?;
    if keep.is_empty() {
        return Err(HullError::Degenerate("no extreme point found".into()));
    }
    VRep::new(
        v.dim(),
        keep.into_iter().map(|k| v.point(k).to_vec()).collect(),
    )
}
