//! Datasets, per-operating-point boundary models, a synthetic engine-like
//! data generator, and model persistence.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::hull::{contains, extreme_points};
use crate::numeric::affine_rank;
use crate::optimize::Objective;
use crate::polytope::{hrep_contains, HRep, VRep};

/// Version tag written to every model file.
pub const SCHEMA_VERSION: u32 = 1;

/// Column names recognised as operating-point keys when loading CSV files.
pub const OP_POINT_NAMES: [&str; 2] = ["SPEED", "BTQ"];

/// Input signal names, in the order used by the 4-, 7- and 9-input types.
pub const ENGINE_SIGNALS: [&str; 9] = [
    "MAINSOI",
    "FUELPRESS",
    "VGTPOS",
    "EGRPOS",
    "MAINFUEL",
    "EGRMF",
    "AFR",
    "VGTSPEED",
    "PEAKPRESS",
];

/// Name of the synthetic response column.
pub const RESPONSE_NAME: &str = "BSFC";

const ENGINE_ROWS_PER_POINT: usize = 125;
const VALIDATION_QUERIES: usize = 50;
const VALIDATION_SEED: u64 = 0x5eed;
const NORMALIZATION_TOL: f64 = 1e-9;

/// A rectangular numeric table with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    column_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    op_point_columns: Vec<usize>,
}

impl Dataset {
    pub fn new(
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        op_point_columns: Vec<usize>,
    ) -> Result<Self> {
        let width = column_names.len();
        if width == 0 {
            return Err(HullError::InvalidInput("dataset has no columns".into()));
        }
        if rows.is_empty() {
            return Err(HullError::InvalidInput("dataset has no rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(HullError::Dimension(format!(
                    "row {i} has {} cells, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(HullError::InvalidInput(format!("row {i} is not finite")));
            }
        }
        if let Some(&c) = op_point_columns.iter().find(|&&c| c >= width) {
            return Err(HullError::Index {
                index: c,
                len: width,
            });
        }
        Ok(Self {
            column_names,
            rows,
            op_point_columns,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn op_point_columns(&self) -> &[usize] {
        &self.op_point_columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Index of the column called `name`.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Replaces the operating-point columns with the named ones.
    pub fn with_op_point_columns(mut self, names: &[&str]) -> Result<Self> {
        self.op_point_columns = names
            .iter()
            .map(|n| {
                self.column(n)
                    .ok_or_else(|| HullError::InvalidInput(format!("no column named {n}")))
            })
            .collect::<Result<_>>()?;
        Ok(self)
    }

    /// Columns that are neither operating-point keys nor the response.
    pub fn input_columns(&self) -> Vec<usize> {
        (0..self.column_names.len())
            .filter(|c| {
                !self.op_point_columns.contains(c) && self.column_names[*c] != RESPONSE_NAME
            })
            .collect()
    }

    /// Writes the dataset as comma-separated text with a header line.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", self.column_names.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Parses a headered, comma-separated numeric file. Columns named `SPEED`
/// or `BTQ` become the operating-point key.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_csv(&fs::read_to_string(path)?)
}

/// [`load_csv`] on in-memory text.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(HullError::ParseMessage("missing header".into()));
    };
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if let Some(i) = names.iter().position(|n| n.is_empty()) {
        return Err(HullError::Parse {
            line: 1,
            column: i + 1,
            message: "empty column name".into(),
        });
    }

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() {
            return Err(HullError::Parse {
                line: line_no,
                column: cells.len().min(names.len()) + 1,
                message: format!("expected {} cells, found {}", names.len(), cells.len()),
            });
        }
        let row = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let fail = |message: String| HullError::Parse {
                    line: line_no,
                    column: c + 1,
                    message,
                };
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| fail(format!("not a number: {:?}", cell.trim())))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(fail(format!("non-finite value {:?}", cell.trim())))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(HullError::ParseMessage("no data rows".into()));
    }
    let op_point_columns = names
        .iter()
        .enumerate()
        .filter(|(_, n)| OP_POINT_NAMES.iter().any(|k| k.eq_ignore_ascii_case(n)))
        .map(|(i, _)| i)
        .collect();
    Dataset::new(names, rows, op_point_columns)
}

/// Splits rows by exact equality of the operating-point columns, groups
/// ordered lexicographically by key.
pub fn group_by_operating_point(d: &Dataset) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut groups: BTreeMap<Vec<OrderedKey>, Vec<Vec<f64>>> = BTreeMap::new();
    for row in d.rows() {
        let key = d
            .op_point_columns
            .iter()
            .map(|&c| OrderedKey(row[c]))
            .collect();
        groups.entry(key).or_default().push(row.clone());
    }
    groups
        .into_iter()
        .map(|(k, rows)| (k.into_iter().map(|o| o.0).collect(), rows))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrderedKey(f64);

impl Eq for OrderedKey {}

impl PartialOrd for OrderedKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Affine column map `normalized = (raw − offset) / scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub offset: f64,
    pub scale: f64,
}

/// A named convex-hull model of the admissible inputs at one operating point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryModel {
    name: String,
    input_columns: Vec<usize>,
    op_point_key: Vec<f64>,
    vrep: VRep,
    pruned: bool,
    cached_hrep: Option<HRep>,
    normalization: Option<Vec<ColumnScale>>,
    validation_queries: Vec<Vec<f64>>,
}

impl BoundaryModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_columns(&self) -> &[usize] {
        &self.input_columns
    }

    pub fn op_point_key(&self) -> &[f64] {
        &self.op_point_key
    }

    /// Hull points in model coordinates (normalized when enabled).
    pub fn vrep(&self) -> &VRep {
        &self.vrep
    }

    pub fn dim(&self) -> usize {
        self.vrep.dim()
    }

    pub fn pruned(&self) -> bool {
        self.pruned
    }

    pub fn cached_hrep(&self) -> Option<&HRep> {
        self.cached_hrep.as_ref()
    }

    pub fn normalization(&self) -> Option<&[ColumnScale]> {
        self.normalization.as_deref()
    }

    pub fn validation_queries(&self) -> &[Vec<f64>] {
        &self.validation_queries
    }

    /// Maps raw input values into model coordinates.
    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        match &self.normalization {
            Some(cols) => raw
                .iter()
                .zip(cols)
                .map(|(x, c)| (x - c.offset) / c.scale)
                .collect(),
            None => raw.to_vec(),
        }
    }

    /// Maps model coordinates back to raw input values.
    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        match &self.normalization {
            Some(cols) => z
                .iter()
                .zip(cols)
                .map(|(x, c)| c.offset + c.scale * x)
                .collect(),
            None => z.to_vec(),
        }
    }

    /// Whether the raw input point lies in the modelled region.
    pub fn contains_raw(&self, raw: &[f64]) -> Result<bool> {
        Ok(contains(&self.vrep, &self.normalize(raw))?.is_inside())
    }

    /// Attaches an H-representation after checking that it agrees with the
    /// V-representation on the stored validation queries.
    pub fn with_hrep(mut self, h: HRep) -> Result<Self> {
        self.cached_hrep = Some(h);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.vrep.dim();
        if self.input_columns.len() != n {
            return Err(HullError::Schema(format!(
                "{} input columns for a {n}-dimensional hull",
                self.input_columns.len()
            )));
        }
        if self.validation_queries.iter().any(|q| q.len() != n) {
            return Err(HullError::Schema(
                "validation query has wrong dimension".into(),
            ));
        }
        if let Some(cols) = &self.normalization {
            if cols.len() != n {
                return Err(HullError::Schema("normalization has wrong length".into()));
            }
            if cols
                .iter()
                .any(|c| c.scale <= 0.0 || !c.scale.is_finite() || !c.offset.is_finite())
            {
                return Err(HullError::Schema(
                    "normalization scale must be positive".into(),
                ));
            }
            for j in 0..n {
                let (lo, hi) = self
                    .vrep
                    .points()
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p[j]), hi.max(p[j]))
                    });
                if (lo + 1.0).abs() > NORMALIZATION_TOL || (hi - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(HullError::Schema(format!(
                        "normalized column {j} spans [{lo}, {hi}], not [-1, 1]"
                    )));
                }
            }
        }
        if let Some(h) = &self.cached_hrep {
            if h.dim() != n {
                return Err(HullError::Schema(
                    "cached H-representation has wrong dimension".into(),
                ));
            }
            for (i, q) in self.validation_queries.iter().enumerate() {
                if contains(&self.vrep, q)?.is_inside() != hrep_contains(h, q)? {
                    return Err(HullError::Schema(format!(
                        "cached H-representation disagrees on validation query {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn validation_queries(v: &VRep) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let n = v.dim();
    let (lo, hi) = v.points().iter().fold(
        (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]),
        |(mut lo, mut hi), p| {
            for j in 0..n {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
            (lo, hi)
        },
    );
    (0..VALIDATION_QUERIES)
        .map(|k| {
            if k % 2 == 0 {
                // Random convex combination: inside by construction.
                let w: Vec<f64> = (0..v.len()).map(|_| rng.gen::<f64>()).collect();
                let total: f64 = w.iter().sum();
                let mut x = vec![0.0; n];
                for (wi, p) in w.iter().zip(v.points()) {
                    for j in 0..n {
                        x[j] += wi / total * p[j];
                    }
                }
                x
            } else {
                // Uniform in the bounding box grown by 20%.
                (0..n)
                    .map(|j| {
                        let mid = 0.5 * (lo[j] + hi[j]);
                        let half = 0.6 * (hi[j] - lo[j]);
                        mid + half * rng.gen_range(-1.0..=1.0)
                    })
                    .collect()
            }
        })
        .collect()
}

/// Builds a hull model from the `input_columns` of `rows`.
///
/// Identical input vectors are collapsed (bitwise equality). With
/// `normalize`, each column is mapped affinely onto `[−1, 1]`; with
/// `prune`, only extreme points are kept. The H-representation is never
/// computed here.
pub fn build_boundary_model(
    name: &str,
    op_point_key: Vec<f64>,
    rows: &[Vec<f64>],
    input_columns: &[usize],
    prune: bool,
    normalize: bool,
) -> Result<BoundaryModel> {
    let n = input_columns.len();
    if n == 0 {
        return Err(HullError::InvalidInput("no input columns selected".into()));
    }
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let p: Vec<f64> = input_columns
            .iter()
            .map(|&c| {
                row.get(c).copied().ok_or(HullError::Index {
                    index: c,
                    len: row.len(),
                })
            })
            .collect::<Result<_>>()?;
        if p.iter().any(|x| !x.is_finite()) {
            return Err(HullError::InvalidInput(format!("row {i} is not finite")));
        }
        if seen.insert(p.iter().map(|x| x.to_bits()).collect::<Vec<u64>>()) {
            points.push(p);
        }
    }
    if points.len() < n + 1 {
        return Err(HullError::TooFewPoints {
            needed: n + 1,
            got: points.len(),
        });
    }
    if affine_rank(&points) < n {
        return Err(HullError::Degenerate(format!(
            "selected inputs do not span {n} dimensions"
        )));
    }

    let normalization = if normalize {
        let cols: Vec<ColumnScale> = (0..n)
            .map(|j| {
                let (lo, hi) = points
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p[j]), hi.max(p[j]))
                    });
                ColumnScale {
                    offset: 0.5 * (lo + hi),
                    scale: 0.5 * (hi - lo),
                }
            })
            .collect();
        for p in &mut points {
            for (x, c) in p.iter_mut().zip(&cols) {
                *x = ((*x - c.offset) / c.scale).clamp(-1.0, 1.0);
            }
        }
        Some(cols)
    } else {
        None
    };

    let mut vrep = VRep::new(n, points)?;
    if prune {
        vrep = extreme_points(&vrep)?;
    }
    let validation_queries = validation_queries(&vrep);
    let model = BoundaryModel {
        name: name.to_string(),
        input_columns: input_columns.to_vec(),
        op_point_key,
        vrep,
        pruned: prune,
        cached_hrep: None,
        normalization,
        validation_queries,
    };
    model.validate()?;
    Ok(model)
}

/// One model per operating point of `d`, over its input columns.
pub fn build_all_models(d: &Dataset, prune: bool, normalize: bool) -> Result<Vec<BoundaryModel>> {
    let inputs = d.input_columns();
    group_by_operating_point(d)
        .into_iter()
        .map(|(key, rows)| {
            let name = key
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join("_");
            build_boundary_model(&format!("op_{name}"), key, &rows, &inputs, prune, normalize)
        })
        .collect()
}

#[derive(Serialize)]
struct ModelFileRef<'a> {
    schema_version: u32,
    #[serde(flatten)]
    model: &'a BoundaryModel,
}

#[derive(Deserialize)]
struct ModelFile {
    schema_version: u32,
    name: String,
    input_columns: Vec<usize>,
    op_point_key: Vec<f64>,
    vrep: VRep,
    pruned: bool,
    cached_hrep: Option<HRep>,
    normalization: Option<Vec<ColumnScale>>,
    validation_queries: Vec<Vec<f64>>,
}

/// Serializes a model as a single JSON document.
pub fn model_to_json(m: &BoundaryModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFileRef {
        schema_version: SCHEMA_VERSION,
        model: m,
    })?)
}

/// Parses and re-validates a model document.
pub fn model_from_json(text: &str) -> Result<BoundaryModel> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(HullError::Schema(format!(
                "unsupported schema version {v}, expected {SCHEMA_VERSION}"
            )))
        }
        None => return Err(HullError::Schema("missing schema_version".into())),
    }
    let file: ModelFile = serde_json::from_value(value)?;
    debug_assert_eq!(file.schema_version, SCHEMA_VERSION);
    let model = BoundaryModel {
        name: file.name,
        input_columns: file.input_columns,
        op_point_key: file.op_point_key,
        vrep: file.vrep,
        pruned: file.pruned,
        cached_hrep: file.cached_hrep,
        normalization: file.normalization,
        validation_queries: file.validation_queries,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(m: &BoundaryModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_json(m)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<BoundaryModel> {
    model_from_json(&fs::read_to_string(path)?)
}

/// Raw ranges `(lo, hi)` of each engine signal.
const SIGNAL_RANGES: [(f64, f64); 9] = [
    (-12.0, 6.0),    // MAINSOI, deg CA
    (500.0, 1800.0), // FUELPRESS, bar
    (20.0, 90.0),    // VGTPOS, %
    (0.0, 60.0),     // EGRPOS, %
    (10.0, 70.0),    // MAINFUEL, mg/stroke
    (0.0, 40.0),     // EGRMF, %
    (15.0, 45.0),    // AFR
    (40.0, 160.0),   // VGTSPEED, krpm
    (60.0, 180.0),   // PEAKPRESS, bar
];

/// Seven (SPEED [rpm], BTQ [Nm]) operating points.
const OPERATING_POINTS: [(f64, f64); 7] = [
    (1000.0, 50.0),
    (1250.0, 150.0),
    (1500.0, 250.0),
    (1750.0, 100.0),
    (2000.0, 300.0),
    (2250.0, 200.0),
    (2500.0, 400.0),
];

/// Correlation weight of the shared factor in generated inputs.
const SHARED_FACTOR: f64 = 0.3;

/// Synthetic BSFC response at one operating point:
/// `base + Σ w_j ((x_j − center_j) / width_j)²` in raw coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BsfcBowl {
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    pub weights: Vec<f64>,
    pub base: f64,
}

impl BsfcBowl {
    pub fn eval_raw(&self, x: &[f64]) -> f64 {
        self.base
            + x.iter()
                .zip(&self.center)
                .zip(self.width.iter().zip(&self.weights))
                .map(|((xi, ci), (hi, wi))| {
                    let t = (xi - ci) / hi;
                    wi * t * t
                })
                .sum::<f64>()
    }

    /// The response expressed in the model's coordinates.
    pub fn objective(&self, m: &BoundaryModel) -> Objective {
        let n = self.center.len();
        let identity = vec![
            ColumnScale {
                offset: 0.0,
                scale: 1.0
            };
            n
        ];
        let cols = m.normalization().unwrap_or(&identity);
        let mut center = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (j, c) in cols.iter().enumerate() {
            center.push((self.center[j] - c.offset) / c.scale);
            let r = c.scale / self.width[j];
            weights.push(self.weights[j] * r * r);
        }
        Objective::weighted_quadratic(center, weights, self.base)
    }
}

/// Generator parameters of one operating point.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineOperatingPoint {
    pub key: Vec<f64>,
    pub box_center: Vec<f64>,
    pub box_half_width: Vec<f64>,
    pub bowl: BsfcBowl,
}

fn check_inputs(n_inputs: usize) -> Result<()> {
    if matches!(n_inputs, 4 | 7 | 9) {
        Ok(())
    } else {
        Err(HullError::InvalidInput(format!(
            "engine inputs must be 4, 7 or 9, got {n_inputs}"
        )))
    }
}

/// The seven seeded operating points behind [`synth_engine_dataset`].
pub fn engine_design(seed: u64, n_inputs: usize) -> Result<Vec<EngineOperatingPoint>> {
    check_inputs(n_inputs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(OPERATING_POINTS
        .iter()
        .map(|&(speed, btq)| {
            let mut box_center = Vec::with_capacity(n_inputs);
            let mut box_half_width = Vec::with_capacity(n_inputs);
            let mut center = Vec::with_capacity(n_inputs);
            let mut weights = Vec::with_capacity(n_inputs);
            for &(lo, hi) in &SIGNAL_RANGES[..n_inputs] {
                let span = hi - lo;
                let c = lo + span * rng.gen_range(0.3..0.7);
                let h = span * rng.gen_range(0.1..0.25);
                box_center.push(c);
                box_half_width.push(h);
                center.push(c + h * rng.gen_range(-1.2..1.2));
                weights.push(rng.gen_range(2.0..10.0));
            }
            let base = 200.0 + 40.0 * (btq / 400.0 - 0.5).powi(2) + 0.01 * (speed - 1750.0).abs();
            EngineOperatingPoint {
                key: vec![speed, btq],
                box_center,
                bowl: BsfcBowl {
                    center,
                    width: box_half_width.clone(),
                    weights,
                    base,
                },
                box_half_width,
            }
        })
        .collect())
}

/// Engine-like data: 7 operating points × 125 rows of `n_inputs` signals
/// (4, 7 or 9), the `SPEED`/`BTQ` key, and a noisy `BSFC` response.
pub fn synth_engine_dataset(seed: u64, n_inputs: usize) -> Result<Dataset> {
    let design = engine_design(seed, n_inputs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut rows = Vec::with_capacity(design.len() * ENGINE_ROWS_PER_POINT);
    for op in &design {
        let mut block: Vec<Vec<f64>> = (0..ENGINE_ROWS_PER_POINT)
            .map(|_| {
                let shared: f64 = rng.gen_range(-1.0..=1.0);
                let mut row: Vec<f64> = (0..n_inputs)
                    .map(|j| {
                        let own: f64 = rng.gen_range(-1.0..=1.0);
                        let u = (1.0 - SHARED_FACTOR) * own + SHARED_FACTOR * shared;
                        op.box_center[j] + op.box_half_width[j] * u
                    })
                    .collect();
                row.extend_from_slice(&op.key);
                row
            })
            .collect();
        let clean: Vec<f64> = block
            .iter()
            .map(|r| op.bowl.eval_raw(&r[..n_inputs]))
            .collect();
        let (lo, hi) = clean
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            });
        let sigma = 0.01 * (hi - lo);
        for (row, y) in block.iter_mut().zip(clean) {
            row.push(y + sigma * standard_normal(&mut rng));
        }
        rows.extend(block);
    }

    let mut names: Vec<String> = ENGINE_SIGNALS[..n_inputs]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend(OP_POINT_NAMES.iter().map(|s| s.to_string()));
    names.push(RESPONSE_NAME.to_string());
    Dataset::new(names, rows, vec![n_inputs, n_inputs + 1])
}

/// Box–Muller sample from N(0, 1).
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::vrep_to_hrep;

    fn model_4() -> BoundaryModel {
        let d = synth_engine_dataset(1, 4).unwrap();
        build_all_models(&d, false, true).unwrap().remove(0)
    }

    #[test]
    fn parses_small_file() {
        let d = parse_csv("a,b\n1,2\n3,4.5\n-1e3,0\n").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.column_names(), &["a", "b"]);
        assert_eq!(d.rows()[1], vec![3.0, 4.5]);
        assert!(d.op_point_columns().is_empty());
    }

    #[test]
    fn reports_bad_cell_position() {
        match parse_csv("a,b\n1,2\n3,abc\n") {
            Err(HullError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("{other:?}"),
        }
        match parse_csv("a,b\n1,NaN\n") {
            Err(HullError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_csv("a,b\n1\n"),
            Err(HullError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_file_is_missing_header() {
        match parse_csv("") {
            Err(HullError::ParseMessage(m)) => assert_eq!(m, "missing header"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn groups_by_key() {
        let d = parse_csv("x,SPEED,BTQ\n1,2000,100\n2,1000,50\n3,2000,100\n").unwrap();
        let groups = group_by_operating_point(&d);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0, vec![1000.0, 50.0]);
        assert_eq!(groups[1].1.len(), 2);

        let one = parse_csv("x,SPEED\n1,5\n2,5\n").unwrap();
        let groups = group_by_operating_point(&one);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].1.len(), 2);
    }

    #[test]
    fn engine_dataset_shape() {
        for (n, last) in [(4, "EGRPOS"), (7, "AFR"), (9, "PEAKPRESS")] {
            let d = synth_engine_dataset(1, n).unwrap();
            assert_eq!(d.len(), 875);
            assert_eq!(d.column_names().len(), n + 3);
            assert_eq!(d.column_names()[0], "MAINSOI");
            assert_eq!(d.column_names()[n - 1], last);
            assert_eq!(&d.column_names()[n..], &["SPEED", "BTQ", "BSFC"]);
            let groups = group_by_operating_point(&d);
            assert_eq!(groups.len(), 7);
            assert!(groups.iter().all(|(_, rows)| rows.len() == 125));
        }
        assert_eq!(
            synth_engine_dataset(1, 4).unwrap(),
            synth_engine_dataset(1, 4).unwrap()
        );
        assert_ne!(
            synth_engine_dataset(1, 4).unwrap(),
            synth_engine_dataset(2, 4).unwrap()
        );
        assert!(synth_engine_dataset(1, 5).is_err());
    }

    #[test]
    fn engine_csv_round_trip() {
        let d = synth_engine_dataset(3, 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("engine.csv");
        d.save_csv(&path).unwrap();
        assert_eq!(load_csv(&path).unwrap(), d);
    }

    #[test]
    fn model_from_engine_rows() {
        let m = model_4();
        assert_eq!(m.dim(), 4);
        assert!(m.vrep().len() <= 125);
        assert!(m.cached_hrep().is_none());
        for p in m.vrep().points() {
            assert!(p.iter().all(|x| x.abs() <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn normalization_round_trip() {
        let d = synth_engine_dataset(5, 4).unwrap();
        let (key, rows) = group_by_operating_point(&d).remove(2);
        let m = build_boundary_model("m", key, &rows, &[0, 1, 2, 3], false, true).unwrap();
        for row in &rows {
            let raw = &row[..4];
            let back = m.denormalize(&m.normalize(raw));
            for (a, b) in raw.iter().zip(&back) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
            assert!(m.contains_raw(raw).unwrap());
        }
    }

    #[test]
    fn prune_keeps_triangle_vertices() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![4.0, 0.0],
            vec![0.0, 4.0],
            vec![1.0, 1.0],
            vec![0.5, 2.0],
            vec![1.0, 1.0],
        ];
        let m = build_boundary_model("t", vec![], &rows, &[0, 1], true, false).unwrap();
        assert_eq!(m.vrep().len(), 3);
        let m = build_boundary_model("t", vec![], &rows, &[0, 1], false, false).unwrap();
        assert_eq!(m.vrep().len(), 5, "exact duplicate collapsed");
    }

    #[test]
    fn rejects_flat_and_small_inputs() {
        let flat = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(matches!(
            build_boundary_model("f", vec![], &flat, &[0, 1], false, false),
            Err(HullError::Degenerate(_))
        ));
        let few = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            build_boundary_model("f", vec![], &few, &[0, 1], false, false),
            Err(HullError::TooFewPoints { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let m = model_4();
        let h = vrep_to_hrep(m.vrep()).unwrap().hrep;
        let m = m.with_hrep(h).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        assert!(back.cached_hrep().is_some());
    }

    #[test]
    fn truncated_or_foreign_files_fail() {
        let text = model_to_json(&model_4()).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(model_from_json(cut), Err(HullError::Schema(_))));
        let v2 = text.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        match model_from_json(&v2) {
            Err(HullError::Schema(m)) => assert!(m.contains("version"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_cache_is_rejected() {
        let m = model_4();
        let (_, cube) = crate::polytope::unit_cube(4).unwrap();
        assert!(matches!(m.with_hrep(cube), Err(HullError::Schema(_))));
    }

    #[test]
    fn bowl_objective_matches_raw_response() {
        let design = engine_design(1, 4).unwrap();
        let d = synth_engine_dataset(1, 4).unwrap();
        let models = build_all_models(&d, false, true).unwrap();
        for (op, m) in design.iter().zip(&models) {
            assert_eq!(op.key, m.op_point_key());
            let f = op.bowl.objective(m);
            for z in m.vrep().points().iter().take(10) {
                let raw = m.denormalize(z);
                let expect = op.bowl.eval_raw(&raw);
                assert!((f.value(z) - expect).abs() <= 1e-9 * expect.abs());
            }
        }
    }
}
