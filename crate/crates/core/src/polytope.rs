//! Vertex (V-) and half-space (H-) representations of polytopes, reference
//! generators, and brute-force V→H conversion.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::numeric::{affine_rank, axpy, dot, hyperplane_through, norm2, Hyperplane, EPS};
use crate::parallel;

/// Points closer than this in max-norm count as duplicates.
const DISTINCT_TOL: f64 = 1e-12;
/// Facets whose normalized coefficients agree within this are merged.
const FACET_DEDUP_TOL: f64 = 1e-7;

/// Largest dimension for which the exponential-size side of a generator is
/// emitted.
pub const MAX_EXPONENTIAL_DIM: usize = 20;

/// A polytope given as the convex hull of finitely many distinct points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVRep")]
pub struct VRep {
    dim: usize,
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawVRep {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawVRep> for VRep {
    type Error = HullError;

    fn try_from(raw: RawVRep) -> Result<Self> {
        VRep::new(raw.dim, raw.points)
    }
}

impl VRep {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(HullError::InvalidInput("dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(HullError::TooFewPoints { needed: 1, got: 0 });
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(HullError::Dimension(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(HullError::InvalidInput(format!("point {i} is not finite")));
            }
        }
        if let Some((i, j)) = first_duplicate(&points) {
            return Err(HullError::InvalidInput(format!(
                "points {i} and {j} coincide"
            )));
        }
        Ok(Self { dim, points })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    pub fn is_full_dimensional(&self) -> bool {
        affine_rank(&self.points) == self.dim
    }
}

fn within(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn first_duplicate(points: &[Vec<f64>]) -> Option<(usize, usize)> {
    // Sort by first coordinate so only a narrow window needs pairwise checks.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j][0] - points[i][0] > DISTINCT_TOL {
                break;
            }
            if within(&points[i], &points[j], DISTINCT_TOL) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

/// A polytope given as an intersection of closed half-spaces
/// `normal·x ≤ offset` with unit normals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHRep")]
pub struct HRep {
    dim: usize,
    halfspaces: Vec<Hyperplane>,
}

#[derive(Deserialize)]
struct RawHRep {
    dim: usize,
    halfspaces: Vec<Hyperplane>,
}

impl TryFrom<RawHRep> for HRep {
    type Error = HullError;

    fn try_from(raw: RawHRep) -> Result<Self> {
        HRep::new(raw.dim, raw.halfspaces)
    }
}

impl HRep {
    pub fn new(dim: usize, halfspaces: Vec<Hyperplane>) -> Result<Self> {
        if dim == 0 {
            return Err(HullError::InvalidInput("dimension must be positive".into()));
        }
        if halfspaces.is_empty() {
            return Err(HullError::InvalidInput(
                "need at least one half-space".into(),
            ));
        }
        for (i, h) in halfspaces.iter().enumerate() {
            if h.dim() != dim {
                return Err(HullError::Dimension(format!(
                    "half-space {i} has dimension {}, expected {dim}",
                    h.dim()
                )));
            }
            if !h.offset.is_finite() || h.normal.iter().any(|x| !x.is_finite()) {
                return Err(HullError::InvalidInput(format!(
                    "half-space {i} is not finite"
                )));
            }
            if (norm2(&h.normal) - 1.0).abs() > 1e-10 {
                return Err(HullError::InvalidInput(format!(
                    "half-space {i} normal is not unit length"
                )));
            }
        }
        Ok(Self { dim, halfspaces })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Hyperplane] {
        &self.halfspaces
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// `offset_i − normal_i·x` for every half-space.
    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.halfspaces
            .iter()
            .map(|h| h.offset - dot(&h.normal, x))
            .collect()
    }
}

/// Membership in the H-representation: every half-space holds within
/// [`EPS`].
pub fn hrep_contains(h: &HRep, x: &[f64]) -> Result<bool> {
    if x.len() != h.dim {
        return Err(HullError::Dimension(format!(
            "query has dimension {}, polytope has {}",
            x.len(),
            h.dim
        )));
    }
    Ok(h.halfspaces
        .iter()
        .all(|hs| dot(&hs.normal, x) <= hs.offset + EPS))
}

fn unit(n: usize, i: usize, sign: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = sign;
    e
}

/// The unit cube `[0,1]^n`: `2^n` vertices (omitted above dimension 20) and
/// `2n` facets.
pub fn unit_cube(n: usize) -> Result<(Option<VRep>, HRep)> {
    if n == 0 {
        return Err(HullError::InvalidInput("dimension must be positive".into()));
    }
    let vrep = (n <= MAX_EXPONENTIAL_DIM)
        .then(|| {
            let points = (0..1usize << n)
                .map(|mask| (0..n).map(|i| ((mask >> i) & 1) as f64).collect())
                .collect();
            VRep::new(n, points)
        })
        .transpose()?;
    let halfspaces = (0..n)
        .flat_map(|i| {
            [
                Hyperplane {
                    normal: unit(n, i, 1.0),
                    offset: 1.0,
                },
                Hyperplane {
                    normal: unit(n, i, -1.0),
                    offset: 0.0,
                },
            ]
        })
        .collect();
    Ok((vrep, HRep::new(n, halfspaces)?))
}

/// The cross-polytope `conv{±e_i}`: `2n` vertices and `2^n` facets (omitted
/// above dimension 20).
pub fn cross_polytope(n: usize) -> Result<(VRep, Option<HRep>)> {
    if n == 0 {
        return Err(HullError::InvalidInput("dimension must be positive".into()));
    }
    let points = (0..n)
        .flat_map(|i| [unit(n, i, 1.0), unit(n, i, -1.0)])
        .collect();
    let vrep = VRep::new(n, points)?;
    let hrep = (n <= MAX_EXPONENTIAL_DIM)
        .then(|| {
            let scale = 1.0 / (n as f64).sqrt();
            let halfspaces = (0..1usize << n)
                .map(|mask| Hyperplane {
                    normal: (0..n)
                        .map(|i| if (mask >> i) & 1 == 1 { -scale } else { scale })
                        .collect(),
                    offset: scale,
                })
                .collect();
            HRep::new(n, halfspaces)
        })
        .transpose()?;
    Ok((vrep, hrep))
}

/// `m` distinct points uniform in `[−1,1]^n` from a seeded ChaCha8 stream.
pub fn random_point_set(m: usize, n: usize, seed: u64) -> Result<VRep> {
    if n == 0 || m < n + 1 {
        return Err(HullError::TooFewPoints {
            needed: n + 1,
            got: m,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(m);
    while points.len() < m {
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if points.iter().any(|q| within(q, &p, DISTINCT_TOL)) {
            continue;
        }
        points.push(p);
    }
    VRep::new(n, points)
}

/// Result of a V→H conversion.
#[derive(Clone, Debug)]
pub struct ConversionReport {
    pub hrep: HRep,
    pub facet_count: usize,
    pub elapsed: Duration,
    /// Number of affinely independent `n`-subsets whose hyperplane was tested.
    pub candidates_examined: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ConversionOptions {
    /// Abort with [`HullError::Timeout`] once this much time has passed.
    pub timeout: Option<Duration>,
    /// Worker threads; `0` reads `HULLKIT_THREADS`.
    pub threads: usize,
}

pub fn vrep_to_hrep(v: &VRep) -> Result<ConversionReport> {
    vrep_to_hrep_with(v, &ConversionOptions::default())
}

/// Brute-force facet enumeration: every affinely independent `n`-subset of
/// the points spans a candidate hyperplane, which is a facet iff all points
/// lie on one side of it.
pub fn vrep_to_hrep_with(v: &VRep, opts: &ConversionOptions) -> Result<ConversionReport> {
    let start = Instant::now();
    let n = v.dim();
    let rank = affine_rank(v.points());
    if rank < n {
        return Err(HullError::Degenerate(format!(
            "hull is not full-dimensional (affine rank {rank} < {n})"
        )));
    }
    let deadline = opts.timeout.map(|t| start + t);
    let threads = if opts.threads == 0 {
        parallel::configured_threads()
    } else {
        opts.threads
    };

    let (raw, candidates) = if n == 1 {
        let (lo, hi) = v
            .points()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
                (acc.0.min(p[0]), acc.1.max(p[0]))
            });
        let facets = vec![
            Hyperplane {
                normal: vec![1.0],
                offset: hi,
            },
            Hyperplane {
                normal: vec![-1.0],
                offset: -lo,
            },
        ];
        (facets, v.len() as u64)
    } else {
        let enumerator = FacetEnumerator::new(v.points());
        let firsts: Vec<usize> = (0..v.len()).collect();
        let results = parallel::map_interleaved(&firsts, threads, |chunk| {
            let mut local = enumerator.scratch();
            for first in chunk {
                enumerator.search(first, &mut local, deadline)?;
            }
            Ok::<_, HullError>((local.facets, local.candidates))
        });
        let mut facets = Vec::new();
        let mut candidates = 0;
        for r in results {
            let (f, c) = r.map_err(|e| match e {
                HullError::Timeout { .. } => HullError::Timeout {
                    elapsed: start.elapsed().as_secs_f64(),
                },
                other => other,
            })?;
            facets.extend(f);
            candidates += c;
        }
        (facets, candidates)
    };

    let facets = dedup_facets(raw);
    let facet_count = facets.len();
    Ok(ConversionReport {
        hrep: HRep::new(n, facets)?,
        facet_count,
        elapsed: start.elapsed(),
        candidates_examined: candidates,
    })
}

fn cmp_facets(a: &Hyperplane, b: &Hyperplane) -> Ordering {
    a.normal
        .iter()
        .zip(&b.normal)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.offset.total_cmp(&b.offset))
}

fn dedup_facets(mut facets: Vec<Hyperplane>) -> Vec<Hyperplane> {
    // Sweep in offset order; only facets with nearly equal offsets can merge.
    facets.sort_by(|a, b| a.offset.total_cmp(&b.offset).then_with(|| cmp_facets(a, b)));
    let mut kept: Vec<Hyperplane> = Vec::with_capacity(facets.len());
    let mut window_start = 0;
    for f in facets {
        while window_start < kept.len() && f.offset - kept[window_start].offset > FACET_DEDUP_TOL {
            window_start += 1;
        }
        let dup = kept[window_start..].iter().any(|k| {
            (k.offset - f.offset).abs() <= FACET_DEDUP_TOL
                && within(&k.normal, &f.normal, FACET_DEDUP_TOL)
        });
        if !dup {
            kept.push(f);
        }
    }
    kept.sort_by(cmp_facets);
    kept
}

/// Depth-first enumeration of index combinations `i_0 < … < i_{n−1}`.
///
/// Along the search path it maintains an orthonormal basis of the orthogonal
/// complement of `span{p_{i_j} − p_{i_0}}`. Each extension is a Householder
/// update, so once `n − 1` indices are fixed the complement is two-dimensional
/// and every candidate hyperplane is a rotation in that plane, tested with
/// cached 2-D projections.
struct FacetEnumerator<'a> {
    points: &'a [Vec<f64>],
    /// Row-major copy of `points`.
    flat: Vec<f64>,
    n: usize,
    m: usize,
    /// Relative zero threshold for signed distances.
    tol: f64,
}

struct Scratch {
    /// Complement basis per depth, stored as column vectors of length `n`.
    complements: Vec<Vec<f64>>,
    coords: Vec<f64>,
    reflector: Vec<f64>,
    combo: Vec<usize>,
    /// Projections of `q − p_{i_0}` onto the final 2-D complement: all `u`
    /// coordinates followed by all `w` coordinates.
    proj: Vec<f64>,
    facets: Vec<Hyperplane>,
    candidates: u64,
    witnesses: (usize, usize),
}

impl<'a> FacetEnumerator<'a> {
    fn new(points: &'a [Vec<f64>]) -> Self {
        let n = points[0].len();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for p in points {
            for k in 0..n {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let diameter = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt();
        Self {
            points,
            flat: points.concat(),
            n,
            m: points.len(),
            tol: EPS * diameter.max(f64::MIN_POSITIVE),
        }
    }

    #[inline(always)]
    fn point(&self, i: usize) -> &[f64] {
        &self.flat[i * self.n..(i + 1) * self.n]
    }

    fn scratch(&self) -> Scratch {
        let n = self.n;
        let mut identity = vec![0.0; n * n];
        for i in 0..n {
            identity[i * n + i] = 1.0;
        }
        let mut complements = vec![identity];
        for depth in 1..n {
            complements.push(vec![0.0; n * (n - depth)]);
        }
        Scratch {
            complements,
            coords: vec![0.0; n],
            reflector: vec![0.0; n],
            combo: vec![0; n],
            proj: vec![0.0; 2 * self.m],
            facets: Vec::new(),
            candidates: 0,
            witnesses: (0, 0),
        }
    }

    fn search(&self, first: usize, s: &mut Scratch, deadline: Option<Instant>) -> Result<()> {
        if let Some(d) = deadline {
            if Instant::now() >= d {
                return Err(HullError::Timeout { elapsed: 0.0 });
            }
        }
        s.combo[0] = first;
        self.extend(1, s, deadline)
    }

    /// `depth` indices are fixed; `complements[depth − 1]` spans the
    /// orthogonal complement of their differences (dimension `n − depth + 1`).
    fn extend(&self, depth: usize, s: &mut Scratch, deadline: Option<Instant>) -> Result<()> {
        let n = self.n;
        if depth == n - 1 {
            return self.close(s, deadline);
        }
        if depth == n.saturating_sub(3) {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return Err(HullError::Timeout { elapsed: 0.0 });
                }
            }
        }
        let dim_c = n - depth + 1;
        let origin = s.combo[0];
        for next in s.combo[depth - 1] + 1..self.m {
            if self.m - next < n - depth {
                break;
            }
            let (parent, child) = split_pair(&mut s.complements, depth - 1);
            let base = self.point(origin);
            let p = self.point(next);
            // Coordinates of the difference in the current complement basis.
            for c in 0..dim_c {
                let col = &parent[c * n..(c + 1) * n];
                s.coords[c] = (0..n).map(|k| (p[k] - base[k]) * col[k]).sum();
            }
            let coords = &s.coords[..dim_c];
            let len = norm2(coords);
            if len <= self.tol {
                continue;
            }
            householder_complement(parent, coords, len, n, &mut s.reflector[..dim_c], child);
            s.combo[depth] = next;
            self.extend(depth + 1, s, deadline)?;
        }
        Ok(())
    }

    /// `n − 1` indices fixed, 2-D complement `(u, w)` available; try every last
    /// index.
    fn close(&self, s: &mut Scratch, deadline: Option<Instant>) -> Result<()> {
        let depth = self.n - 1;
        let plane = std::mem::take(&mut s.complements[depth - 1]);
        let result = self.close_with(s, &plane, deadline);
        s.complements[depth - 1] = plane;
        result
    }

    fn close_with(&self, s: &mut Scratch, plane: &[f64], deadline: Option<Instant>) -> Result<()> {
        let n = self.n;
        let m = self.m;
        let depth = n - 1;
        let (u, w) = plane.split_at(n);
        let origin = self.point(s.combo[0]);
        let last_fixed = s.combo[depth - 1];
        let tol = self.tol;
        if n == 2 {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return Err(HullError::Timeout { elapsed: 0.0 });
                }
            }
        }

        // Coordinates of every `q − p_{i_0}` in the (u, w) plane.
        let (ua, wb) = s.proj.split_at_mut(m);
        for (q, p) in self.flat.chunks_exact(n).enumerate() {
            let (mut a, mut b) = (0.0, 0.0);
            for k in 0..n {
                let d = p[k] - origin[k];
                a += d * u[k];
                b += d * w[k];
            }
            ua[q] = a;
            wb[q] = b;
        }
        let (ua, wb) = (&s.proj[..m], &s.proj[m..]);

        let mut witnesses = s.witnesses;
        for last in last_fixed + 1..m {
            // The normal (b, −a) in the (u, w) plane is orthogonal to the last
            // difference; it vanishes when the subset is affinely dependent.
            let (a, b) = (ua[last], wb[last]);
            let len = (a * a + b * b).sqrt();
            if len <= tol {
                continue;
            }
            s.candidates += 1;
            // Unnormalized signed distance, compared against `tol·len`.
            let thr = tol * len;
            let dist = |q: usize| b * ua[q] - a * wb[q];

            // Neighbouring candidates are usually split by the same two points.
            let (da, db) = (dist(witnesses.0), dist(witnesses.1));
            if da > thr && db < -thr || da < -thr && db > thr {
                continue;
            }

            let mut above = usize::MAX;
            let mut below = usize::MAX;
            for q in 0..m {
                let d = dist(q);
                if d > thr {
                    above = q;
                    if below != usize::MAX {
                        break;
                    }
                } else if d < -thr {
                    below = q;
                    if above != usize::MAX {
                        break;
                    }
                }
            }
            let sign = match (above != usize::MAX, below != usize::MAX) {
                (true, true) => {
                    witnesses = (above, below);
                    continue;
                }
                (true, false) => 1.0,
                (false, true) => -1.0,
                (false, false) => continue,
            };
            s.combo[depth] = last;
            if let Some(f) = self.refit(&s.combo, u, w, b / len, -a / len, -sign) {
                s.facets.push(f);
            }
        }
        s.witnesses = witnesses;
        Ok(())
    }

    /// Refits the accepted candidate through its defining points and orients
    /// it so the hull lies on the `≤` side.
    fn refit(
        &self,
        combo: &[usize],
        u: &[f64],
        w: &[f64],
        nb: f64,
        na: f64,
        orient: f64,
    ) -> Option<Hyperplane> {
        let guide: Vec<f64> = (0..self.n)
            .map(|k| orient * (nb * u[k] + na * w[k]))
            .collect();
        let chosen: Vec<&[f64]> = combo.iter().map(|&i| self.points[i].as_slice()).collect();
        let mut h = hyperplane_through(&chosen).ok()?;
        if dot(&h.normal, &guide) < 0.0 {
            h = h.flipped();
        }
        let slack = EPS.max(self.tol);
        self.points
            .iter()
            .all(|p| h.signed_distance(p) <= slack)
            .then_some(h)
    }
}

fn split_pair(v: &mut [Vec<f64>], i: usize) -> (&[f64], &mut [f64]) {
    let (head, tail) = v.split_at_mut(i + 1);
    (&head[i], &mut tail[0])
}

/// Given an orthonormal basis `parent` (columns of length `n`) and the
/// coordinates `c` of a vector in it, writes an orthonormal basis of the
/// complement of that vector within `span(parent)` into `child`.
fn householder_complement(
    parent: &[f64],
    c: &[f64],
    len: f64,
    n: usize,
    h: &mut [f64],
    child: &mut [f64],
) {
    let k = c.len();
    // Reflector H with H·c = −sign(c₀)·|c|·e₀; columns 1.. of parent·H span
    // the complement of c.
    let alpha = if c[0] >= 0.0 { -len } else { len };
    h.copy_from_slice(c);
    h[0] -= alpha;
    let hh = dot(h, h);
    for j in 1..k {
        let out = &mut child[(j - 1) * n..j * n];
        out.copy_from_slice(&parent[j * n..(j + 1) * n]);
        // Column j of H is e_j − 2 h h_j / hᵀh.
        let f = 2.0 * h[j] / hh;
        for (i, &hi) in h.iter().enumerate() {
            let g = f * hi;
            if g != 0.0 {
                axpy(-g, &parent[i * n..(i + 1) * n], out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrilateral() -> VRep {
        VRep::new(
            2,
            vec![
                vec![0.0, 0.0],
                vec![2.0, 0.0],
                vec![3.0, 2.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn cube_counts() {
        let (v, h) = unit_cube(3).unwrap();
        assert_eq!(v.unwrap().len(), 8);
        assert_eq!(h.len(), 6);
        let (v, h) = unit_cube(10).unwrap();
        assert_eq!(v.unwrap().len(), 1024);
        assert_eq!(h.len(), 20);
        assert!(unit_cube(21).unwrap().0.is_none());
    }

    #[test]
    fn cube_one_dimensional() {
        let (v, h) = unit_cube(1).unwrap();
        assert_eq!(v.unwrap().points(), &[vec![0.0], vec![1.0]]);
        assert_eq!(
            h.halfspaces(),
            &[
                Hyperplane {
                    normal: vec![1.0],
                    offset: 1.0
                },
                Hyperplane {
                    normal: vec![-1.0],
                    offset: 0.0
                }
            ]
        );
    }

    #[test]
    fn cross_counts() {
        let (v, h) = cross_polytope(3).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(h.unwrap().len(), 8);
        let (v, h) = cross_polytope(2).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(h.unwrap().len(), 4);
        assert!(cross_polytope(21).unwrap().1.is_none());
    }

    #[test]
    fn cross_one_dimensional() {
        let (v, h) = cross_polytope(1).unwrap();
        assert_eq!(v.points(), &[vec![1.0], vec![-1.0]]);
        let h = h.unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.halfspaces().iter().all(|f| f.offset == 1.0));
    }

    #[test]
    fn convert_cube_and_cross() {
        let (v, _) = unit_cube(3).unwrap();
        assert_eq!(vrep_to_hrep(&v.unwrap()).unwrap().facet_count, 6);
        let (v, _) = cross_polytope(3).unwrap();
        assert_eq!(vrep_to_hrep(&v).unwrap().facet_count, 8);
    }

    #[test]
    fn convert_quadrilateral() {
        let report = vrep_to_hrep(&quadrilateral()).unwrap();
        assert_eq!(report.facet_count, 4);
        assert_eq!(report.hrep.len(), 4);
    }

    #[test]
    fn convert_segment() {
        let v = VRep::new(1, vec![vec![0.5], vec![-2.0], vec![0.0]]).unwrap();
        let h = vrep_to_hrep(&v).unwrap().hrep;
        assert!(hrep_contains(&h, &[-2.0]).unwrap());
        assert!(hrep_contains(&h, &[0.5]).unwrap());
        assert!(!hrep_contains(&h, &[0.6]).unwrap());
    }

    #[test]
    fn convert_rejects_flat_hull() {
        let v = VRep::new(2, vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(vrep_to_hrep(&v), Err(HullError::Degenerate(_))));
    }

    #[test]
    fn convert_times_out() {
        let v = random_point_set(60, 6, 1).unwrap();
        let opts = ConversionOptions {
            timeout: Some(Duration::from_millis(1)),
            threads: 1,
        };
        assert!(matches!(
            vrep_to_hrep_with(&v, &opts),
            Err(HullError::Timeout { .. })
        ));
    }

    #[test]
    fn cross_polytope_normals_match_sign_vectors() {
        for n in 2..=5 {
            let (v, _) = cross_polytope(n).unwrap();
            let report = vrep_to_hrep(&v).unwrap();
            assert_eq!(report.facet_count, 1 << n);
            let s = 1.0 / (n as f64).sqrt();
            for f in report.hrep.halfspaces() {
                for c in &f.normal {
                    assert!((c.abs() - s).abs() <= 1e-9);
                }
                assert!((f.offset - s).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let v = random_point_set(30, 4, 9).unwrap();
        let serial = vrep_to_hrep_with(
            &v,
            &ConversionOptions {
                timeout: None,
                threads: 1,
            },
        )
        .unwrap();
        let par = vrep_to_hrep_with(
            &v,
            &ConversionOptions {
                timeout: None,
                threads: 4,
            },
        )
        .unwrap();
        assert_eq!(serial.hrep, par.hrep);
        assert_eq!(serial.candidates_examined, par.candidates_examined);
    }

    #[test]
    fn hrep_contains_examples() {
        let (_, cube) = unit_cube(3).unwrap();
        assert!(hrep_contains(&cube, &[0.5, 0.5, 0.5]).unwrap());
        assert!(!hrep_contains(&cube, &[1.5, 0.0, 0.0]).unwrap());
        let (_, cross) = cross_polytope(3).unwrap();
        assert!(!hrep_contains(&cross.unwrap(), &[0.4, 0.4, 0.4]).unwrap());
        assert!(matches!(
            hrep_contains(&cube, &[0.5]),
            Err(HullError::Dimension(_))
        ));
    }

    #[test]
    fn random_points_deterministic_and_in_range() {
        assert_eq!(
            random_point_set(5, 2, 42).unwrap(),
            random_point_set(5, 2, 42).unwrap()
        );
        let v = random_point_set(50, 5, 7).unwrap();
        assert_eq!(v.len(), 50);
        assert!(v
            .points()
            .iter()
            .flatten()
            .all(|x| (-1.0..=1.0).contains(x)));
        assert!(random_point_set(2, 2, 0).is_err());
    }

    #[test]
    fn random_50_in_5d_has_hundreds_of_facets() {
        let v = random_point_set(50, 5, 7).unwrap();
        let report = vrep_to_hrep(&v).unwrap();
        assert!(
            (100..2000).contains(&report.facet_count),
            "{} facets",
            report.facet_count
        );
    }

    #[test]
    fn vrep_validation() {
        assert!(VRep::new(2, vec![]).is_err());
        assert!(VRep::new(2, vec![vec![0.0]]).is_err());
        assert!(VRep::new(1, vec![vec![0.0], vec![0.0]]).is_err());
        assert!(VRep::new(1, vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn json_shapes() {
        let v = quadrilateral();
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.starts_with(r#"{"dim":2,"points":[[0.0,0.0]"#));
        assert_eq!(serde_json::from_str::<VRep>(&text).unwrap(), v);

        let (_, h) = unit_cube(1).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(
            text,
            r#"{"dim":1,"halfspaces":[{"normal":[1.0],"offset":1.0},{"normal":[-1.0],"offset":0.0}]}"#
        );
        assert_eq!(serde_json::from_str::<HRep>(&text).unwrap(), h);
        assert!(serde_json::from_str::<VRep>(r#"{"dim":1,"points":[[0.0],[0.0]]}"#).is_err());
        assert!(serde_json::from_str::<HRep>(
            r#"{"dim":1,"halfspaces":[{"normal":[2.0],"offset":1.0}]}"#
        )
        .is_err());
    }
}
