//! Small dense linear algebra kernels: linear solves, affine rank, and
//! hyperplane fitting. Sizes here are tiny (n ≤ 15 rows), so everything is
//! a straightforward row-major `Vec<f64>`.

use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};

/// Geometric tolerance shared by predicates across the crate.
pub const EPS: f64 = 1e-9;

/// Pivot threshold for [`gaussian_solve`], applied after row scaling.
const PIVOT_TOL: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(HullError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(HullError::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(HullError::Dimension("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `yᵀ·self`.
    pub fn vec_mul(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                axpy(yr, self.row(r), &mut out);
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Solves `a·x = rhs` by Gaussian elimination with scaled partial pivoting.
pub fn gaussian_solve(a: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(HullError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if rhs.len() != n {
        return Err(HullError::Dimension(format!(
            "rhs has dimension {}, matrix has {n} rows",
            rhs.len()
        )));
    }

    let mut m = a.clone();
    let mut b = rhs.to_vec();
    // Row scale factors so the pivot test is independent of row magnitudes.
    let scale: Vec<f64> = (0..n).map(|r| norm_inf(m.row(r))).collect();
    if let Some(&s) = scale.iter().find(|&&s| s == 0.0) {
        return Err(HullError::Singular { pivot: s });
    }
    let mut scale = scale;

    for k in 0..n {
        let (p, best) = (k..n)
            .map(|r| (r, m[(r, k)].abs() / scale[r]))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < PIVOT_TOL {
            return Err(HullError::Singular { pivot: best });
        }
        m.swap_rows(k, p);
        b.swap(k, p);
        scale.swap(k, p);

        let pivot = m[(k, k)];
        for r in k + 1..n {
            let factor = m[(r, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in k..n {
                let v = m[(k, c)];
                m[(r, c)] -= factor * v;
            }
            b[r] -= factor * b[k];
        }
    }

    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = (k + 1..n).map(|c| m[(k, c)] * x[c]).sum();
        x[k] = (b[k] - tail) / m[(k, k)];
    }
    Ok(x)
}

/// Reduced row echelon form with partial pivoting. Returns the pivot column of
/// each nonzero row; entries below `tol` are treated as zero.
fn rref(m: &mut Matrix, tol: f64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols() {
        if row == m.rows() {
            break;
        }
        let (p, best) = (row..m.rows())
            .map(|r| (r, m[(r, col)].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        m.swap_rows(row, p);
        let pivot = m[(row, col)];
        for v in m.row_mut(row) {
            *v /= pivot;
        }
        let pivot_row = m.row(row).to_vec();
        for r in 0..m.rows() {
            if r == row {
                continue;
            }
            let factor = m[(r, col)];
            if factor != 0.0 {
                axpy(-factor, &pivot_row, m.row_mut(r));
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

fn difference_matrix<P: AsRef<[f64]>>(points: &[P]) -> Matrix {
    let base = points[0].as_ref();
    let n = base.len();
    let mut m = Matrix::zeros(points.len() - 1, n);
    for (r, p) in points[1..].iter().enumerate() {
        for (c, (x, b)) in p.as_ref().iter().zip(base).enumerate() {
            m[(r, c)] = x - b;
        }
    }
    m
}

fn relative_tol(m: &Matrix) -> f64 {
    EPS * norm_inf(m.as_slice())
}

/// Rank of the affine span of `points`, i.e. the rank of `{p_i − p_0}`.
pub fn affine_rank<P: AsRef<[f64]>>(points: &[P]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let mut m = difference_matrix(points);
    if norm_inf(m.as_slice()) == 0.0 {
        return 0;
    }
    let tol = relative_tol(&m);
    rref(&mut m, tol).len()
}

/// Closed half-space `normal·x ≤ offset` with a unit-length normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    /// Builds a hyperplane from an arbitrary nonzero normal, rescaling to unit
    /// length.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let len = norm2(&normal);
        if !len.is_normal() || !offset.is_finite() {
            return Err(HullError::Degenerate("zero or non-finite normal".into()));
        }
        Ok(Self {
            normal: normal.iter().map(|x| x / len).collect(),
            offset: offset / len,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `normal·x − offset`; nonpositive on the closed side.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|x| -x).collect(),
            offset: -self.offset,
        }
    }
}

/// Fits the hyperplane through `n` points in `R^n`. The orientation of the
/// returned normal is unspecified.
pub fn hyperplane_through<P: AsRef<[f64]>>(points: &[P]) -> Result<Hyperplane> {
    let n = points.first().map_or(0, |p| p.as_ref().len());
    if n == 0 || points.len() != n {
        return Err(HullError::Dimension(format!(
            "need exactly n points in R^n, got {} points of dimension {n}",
            points.len()
        )));
    }
    if points.iter().any(|p| p.as_ref().len() != n) {
        return Err(HullError::Dimension("points of mixed dimension".into()));
    }
    if n == 1 {
        return Hyperplane::new(vec![1.0], points[0].as_ref()[0]);
    }

    let mut m = difference_matrix(points);
    if norm_inf(m.as_slice()) == 0.0 {
        return Err(HullError::Degenerate("coincident points".into()));
    }
    let tol = relative_tol(&m);
    let pivots = rref(&mut m, tol);
    if pivots.len() < n - 1 {
        return Err(HullError::Degenerate(format!(
            "affine rank {} < {}",
            pivots.len(),
            n - 1
        )));
    }
    let free = (0..n)
        .find(|c| !pivots.contains(c))
        .expect("rank n-1 leaves one free column");
    let mut normal = vec![0.0; n];
    normal[free] = 1.0;
    for (r, &c) in pivots.iter().enumerate() {
        normal[c] = -m[(r, free)];
    }
    let len = norm2(&normal);
    normal.iter_mut().for_each(|x| *x /= len);
    let offset = points.iter().map(|p| dot(&normal, p.as_ref())).sum::<f64>() / n as f64;
    Ok(Hyperplane { normal, offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solve_identity() {
        let x = gaussian_solve(&Matrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn solve_diagonal() {
        let a = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(gaussian_solve(&a, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn solve_rank_deficient() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            gaussian_solve(&a, &[1.0, 2.0]),
            Err(HullError::Singular { .. })
        ));
    }

    #[test]
    fn solve_shape_errors() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(
            gaussian_solve(&a, &[1.0, 2.0]),
            Err(HullError::Dimension(_))
        ));
        assert!(matches!(
            gaussian_solve(&Matrix::identity(2), &[1.0]),
            Err(HullError::Dimension(_))
        ));
    }

    #[test]
    fn solve_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut trials = 0;
        while trials < 100 {
            let n = rng.gen_range(1..=12);
            let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = Matrix::from_row_major(n, n, data).unwrap();
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let Ok(x) = gaussian_solve(&a, &rhs) else {
                continue;
            };
            let resid = sub(&a.mul_vec(&x), &rhs);
            assert!(norm_inf(&resid) <= 1e-8, "residual {}", norm_inf(&resid));
            trials += 1;
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(affine_rank(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), 2);
        assert_eq!(
            affine_rank(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]),
            1
        );
        assert_eq!(affine_rank(&[[0.0, 0.0]]), 0);
    }

    #[test]
    fn rank_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(1..6);
            let m = rng.gen_range(1..8);
            // Points confined to a random low-dimensional affine subspace.
            let k = rng.gen_range(0..=n);
            let basis: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let mut pts: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    let mut p = vec![0.5; n];
                    for b in &basis {
                        axpy(rng.gen_range(-1.0..1.0), b, &mut p);
                    }
                    p
                })
                .collect();
            let r0 = affine_rank(&pts);
            pts.reverse();
            assert_eq!(affine_rank(&pts), r0);
            pts.rotate_left(m / 2);
            assert_eq!(affine_rank(&pts), r0);
        }
    }

    #[test]
    fn hyperplane_x_axis() {
        let h = hyperplane_through(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(h.normal[0].abs() < 1e-12);
        assert!((h.normal[1].abs() - 1.0).abs() < 1e-12);
        assert!(h.offset.abs() < 1e-12);
    }

    #[test]
    fn hyperplane_simplex_facet() {
        let h = hyperplane_through(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let s = h.normal[0].signum();
        let r = 1.0 / 3f64.sqrt();
        for c in &h.normal {
            assert!((c * s - r).abs() < 1e-12);
        }
        assert!((h.offset * s - r).abs() < 1e-12);
    }

    #[test]
    fn hyperplane_duplicate_points() {
        assert!(matches!(
            hyperplane_through(&[[0.0, 0.0], [0.0, 0.0]]),
            Err(HullError::Degenerate(_))
        ));
    }

    #[test]
    fn hyperplane_one_dimensional() {
        let h = hyperplane_through(&[[2.5]]).unwrap();
        assert_eq!(h.normal, vec![1.0]);
        assert_eq!(h.offset, 2.5);
    }

    #[test]
    fn hyperplane_residuals_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let h = hyperplane_through(&pts).unwrap();
            assert!((norm2(&h.normal) - 1.0).abs() < 1e-12);
            for p in &pts {
                assert!(h.signed_distance(p).abs() <= 1e-9);
            }
        }
    }
}
