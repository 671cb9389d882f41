//! Seeded benchmark harness and table rendering.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{build_all_models, engine_design, synth_engine_dataset, BoundaryModel};
use crate::error::{HullError, Result};
use crate::hull::contains;
use crate::optimize::{
    chebyshev_center, solve_hrep, solve_vrep, Method, SolveOptions, SolveResult,
};
use crate::polytope::{random_point_set, vrep_to_hrep_with, ConversionOptions, VRep};

/// Largest point count accepted by the conversion benchmark.
pub const CONVERSION_MAX_M: usize = 500;
/// Largest dimension accepted by the conversion benchmark.
pub const CONVERSION_MAX_N: usize = 7;
/// Largest point count accepted by the membership benchmark.
pub const MEMBERSHIP_MAX_M: usize = 2000;
/// Largest dimension accepted by the membership benchmark.
pub const MEMBERSHIP_MAX_N: usize = 15;

/// One measurement. Timed-out rows carry the elapsed time at which the
/// measurement was abandoned.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub unit: String,
    pub timed_out: bool,
}

impl BenchRow {
    fn new(
        m: usize,
        n: usize,
        seed: u64,
        metric: impl Into<String>,
        value: f64,
        unit: &str,
    ) -> Self {
        Self {
            m,
            n,
            seed,
            metric: metric.into(),
            value,
            unit: unit.to_string(),
            timed_out: false,
        }
    }

    fn timed_out_at(mut self, elapsed: f64) -> Self {
        self.timed_out = true;
        self.value = elapsed;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TableFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = HullError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(HullError::InvalidInput(format!(
                "unknown table format {other:?}"
            ))),
        }
    }
}

/// Renders rows sorted by `(m, n, metric)` with columns
/// `m, n, seed, metric, value, unit, timed_out`. Markdown shows timed-out
/// values as `--`.
pub fn emit_table(rows: &[BenchRow], format: TableFormat) -> String {
    let mut sorted: Vec<&BenchRow> = rows.iter().collect();
    sorted.sort_by(|a, b| (a.m, a.n, &a.metric).cmp(&(b.m, b.n, &b.metric)));
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("m,n,seed,metric,value,unit,timed_out\n");
            for r in sorted {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.m, r.n, r.seed, r.metric, r.value, r.unit, r.timed_out
                );
            }
        }
        TableFormat::Markdown => {
            out.push_str("| m | n | seed | metric | value | unit | timed_out |\n");
            out.push_str("|---:|---:|---:|---|---:|---|---|\n");
            for r in sorted {
                let value = if r.timed_out {
                    "--".to_string()
                } else {
                    format_value(r.value)
                };
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    r.m, r.n, r.seed, r.metric, value, r.unit, r.timed_out
                );
            }
        }
    }
    out
}

fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.0}")
    } else if v.abs() >= 1e-3 {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

fn check_grid(grid: &[(usize, usize)], max_m: usize, max_n: usize) -> Result<()> {
    for &(m, n) in grid {
        if m > max_m || n > max_n || n == 0 || m < n + 1 {
            return Err(HullError::InvalidInput(format!(
                "grid cell (m={m}, n={n}) outside 1 ≤ n ≤ {max_n}, n < m ≤ {max_m}"
            )));
        }
    }
    Ok(())
}

/// Conversion cost per `(m, n)` cell: median elapsed seconds and facet count
/// over `seeds` random point sets (`base_seed`, `base_seed + 1`, …).
///
/// A seed that exceeds `timeout` ends the cell, which is then reported as
/// timed out.
pub fn bench_conversion(
    grid: &[(usize, usize)],
    seeds: usize,
    base_seed: u64,
    timeout: Duration,
) -> Result<Vec<BenchRow>> {
    check_grid(grid, CONVERSION_MAX_M, CONVERSION_MAX_N)?;
    let seeds = seeds.max(1);
    let mut rows = Vec::new();
    for &(m, n) in grid {
        let mut times = Vec::new();
        let mut facets = Vec::new();
        let mut abandoned = None;
        for s in 0..seeds as u64 {
            let v = random_point_set(m, n, base_seed + s)?;
            let opts = ConversionOptions {
                timeout: Some(timeout),
                ..ConversionOptions::default()
            };
            match vrep_to_hrep_with(&v, &opts) {
                Ok(report) => {
                    times.push(report.elapsed.as_secs_f64());
                    facets.push(report.facet_count as f64);
                }
                Err(HullError::Timeout { elapsed }) => {
                    abandoned = Some(elapsed);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let time_row = |v| BenchRow::new(m, n, base_seed, "conversion_time", v, "s");
        let facet_row = |v| BenchRow::new(m, n, base_seed, "facets", v, "count");
        match abandoned {
            Some(elapsed) => {
                rows.push(time_row(0.0).timed_out_at(elapsed));
                rows.push(facet_row(0.0).timed_out_at(elapsed));
            }
            None => {
                rows.push(time_row(median(&times)));
                rows.push(facet_row(median(&facets)));
            }
        }
    }
    Ok(rows)
}

/// A random convex combination of the points of `v`.
fn inside_query(v: &VRep, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..v.len())
        .map(|_| -rng.gen::<f64>().max(1e-300).ln())
        .collect();
    let total: f64 = w.iter().sum();
    let mut x = vec![0.0; v.dim()];
    for (wi, p) in w.iter().zip(v.points()) {
        for (xj, pj) in x.iter_mut().zip(p) {
            *xj += wi / total * pj;
        }
    }
    x
}

/// Membership-LP cost per `(m, n)` cell. Half the queries are random convex
/// combinations of the points (inside by construction), half are uniform
/// in `[−1, 1]^n`; their median times and inside fractions are reported
/// separately, alongside the median over all queries.
pub fn bench_membership(
    grid: &[(usize, usize)],
    seeds: usize,
    queries_per_cell: usize,
    base_seed: u64,
) -> Result<Vec<BenchRow>> {
    check_grid(grid, MEMBERSHIP_MAX_M, MEMBERSHIP_MAX_N)?;
    let seeds = seeds.max(1);
    let per_kind = (queries_per_cell / 2).max(1);
    let mut rows = Vec::new();
    for &(m, n) in grid {
        let (mut inside_t, mut uniform_t) = (Vec::new(), Vec::new());
        let (mut inside_hits, mut uniform_hits) = (0usize, 0usize);
        for s in 0..seeds as u64 {
            let seed = base_seed + s;
            let v = random_point_set(m, n, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 1);
            for _ in 0..per_kind {
                let q = inside_query(&v, &mut rng);
                let t = Instant::now();
                let hit = contains(&v, &q)?.is_inside();
                inside_t.push(t.elapsed().as_secs_f64());
                inside_hits += usize::from(hit);

                let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let t = Instant::now();
                let hit = contains(&v, &q)?.is_inside();
                uniform_t.push(t.elapsed().as_secs_f64());
                uniform_hits += usize::from(hit);
            }
        }
        let all: Vec<f64> = inside_t.iter().chain(&uniform_t).copied().collect();
        let total = (per_kind * seeds) as f64;
        rows.push(BenchRow::new(
            m,
            n,
            base_seed,
            "membership_time",
            median(&all),
            "s",
        ));
        rows.push(BenchRow::new(
            m,
            n,
            base_seed,
            "membership_time_inside",
            median(&inside_t),
            "s",
        ));
        rows.push(BenchRow::new(
            m,
            n,
            base_seed,
            "membership_time_uniform",
            median(&uniform_t),
            "s",
        ));
        rows.push(BenchRow::new(
            m,
            n,
            base_seed,
            "inside_rate_inside",
            inside_hits as f64 / total,
            "fraction",
        ));
        rows.push(BenchRow::new(
            m,
            n,
            base_seed,
            "inside_rate_uniform",
            uniform_hits as f64 / total,
            "fraction",
        ));
    }
    Ok(rows)
}

/// Outcome of the H-representation pipeline for one model.
#[derive(Clone, Debug)]
pub enum HrepRun {
    /// The conversion did not finish within the remaining budget.
    TimedOut { elapsed: Duration },
    Solved {
        conversion: Duration,
        facets: usize,
        /// Conversion, start-point search and optimization together.
        total: Duration,
        result: SolveResult,
    },
}

/// Both optimization pipelines on one operating-point model.
#[derive(Clone, Debug)]
pub struct ModelRun {
    pub name: String,
    pub op_point_key: Vec<f64>,
    pub points: usize,
    pub vrep: SolveResult,
    pub hrep: HrepRun,
}

impl ModelRun {
    /// `|f_V − f_H|` when both pipelines ran.
    pub fn agreement_gap(&self) -> Option<f64> {
        match &self.hrep {
            HrepRun::Solved { result, .. } => Some((self.vrep.objective - result.objective).abs()),
            HrepRun::TimedOut { .. } => None,
        }
    }

    pub fn conversion_time(&self) -> Duration {
        match &self.hrep {
            HrepRun::Solved { conversion, .. } => *conversion,
            HrepRun::TimedOut { elapsed } => *elapsed,
        }
    }
}

/// Per-model results of the optimization benchmark.
#[derive(Clone, Debug)]
pub struct OptimizeReport {
    pub n_inputs: usize,
    pub seed: u64,
    pub models: Vec<ModelRun>,
    /// Conversion time over all models, including abandoned attempts.
    pub conversion_total: Duration,
    pub vrep_total: Duration,
    /// H-rep pipeline time over the models whose conversion finished.
    pub hrep_total: Duration,
}

impl OptimizeReport {
    pub fn all_converted(&self) -> bool {
        self.models
            .iter()
            .all(|r| matches!(r.hrep, HrepRun::Solved { .. }))
    }

    pub fn any_timed_out(&self) -> bool {
        !self.all_converted()
    }

    pub fn rows(&self) -> Vec<BenchRow> {
        let n = self.n_inputs;
        let seed = self.seed;
        let mut rows = Vec::new();
        for (k, r) in self.models.iter().enumerate() {
            let m = r.points;
            let metric = |name: &str| format!("op{k}.{name}");
            rows.push(BenchRow::new(
                m,
                n,
                seed,
                metric("vrep_time"),
                r.vrep.elapsed.as_secs_f64(),
                "s",
            ));
            rows.push(BenchRow::new(
                m,
                n,
                seed,
                metric("vrep_objective"),
                r.vrep.objective,
                "g/kWh",
            ));
            match &r.hrep {
                HrepRun::TimedOut { elapsed } => {
                    let t = elapsed.as_secs_f64();
                    for (name, unit) in [
                        ("conversion_time", "s"),
                        ("facets", "count"),
                        ("hrep_time", "s"),
                        ("hrep_objective", "g/kWh"),
                        ("agreement_gap", "g/kWh"),
                    ] {
                        rows.push(
                            BenchRow::new(m, n, seed, metric(name), 0.0, unit).timed_out_at(t),
                        );
                    }
                }
                HrepRun::Solved {
                    conversion,
                    facets,
                    total,
                    result,
                } => {
                    rows.push(BenchRow::new(
                        m,
                        n,
                        seed,
                        metric("conversion_time"),
                        conversion.as_secs_f64(),
                        "s",
                    ));
                    rows.push(BenchRow::new(
                        m,
                        n,
                        seed,
                        metric("facets"),
                        *facets as f64,
                        "count",
                    ));
                    rows.push(BenchRow::new(
                        m,
                        n,
                        seed,
                        metric("hrep_time"),
                        total.as_secs_f64(),
                        "s",
                    ));
                    rows.push(BenchRow::new(
                        m,
                        n,
                        seed,
                        metric("hrep_objective"),
                        result.objective,
                        "g/kWh",
                    ));
                    let gap = (r.vrep.objective - result.objective).abs();
                    rows.push(BenchRow::new(
                        m,
                        n,
                        seed,
                        metric("agreement_gap"),
                        gap,
                        "g/kWh",
                    ));
                }
            }
        }
        let conv = BenchRow::new(
            0,
            n,
            seed,
            "total.conversion_time",
            self.conversion_total.as_secs_f64(),
            "s",
        );
        rows.push(if self.all_converted() {
            conv
        } else {
            let t = self.conversion_total.as_secs_f64();
            conv.timed_out_at(t)
        });
        rows.push(BenchRow::new(
            0,
            n,
            seed,
            "total.vrep_time",
            self.vrep_total.as_secs_f64(),
            "s",
        ));
        rows.push(BenchRow::new(
            0,
            n,
            seed,
            "total.hrep_time",
            self.hrep_total.as_secs_f64(),
            "s",
        ));
        rows
    }
}

/// Builds the seven engine models for `n_inputs` and minimizes the synthetic
/// BSFC response on each, once over the V-representation and once over the
/// H-representation obtained by conversion.
///
/// `timeout` is shared by all seven conversions: once it is spent, the
/// remaining models are reported as timed out without attempting them.
pub fn bench_optimize(
    n_inputs: usize,
    seed: u64,
    timeout: Duration,
    prune: bool,
    normalize: bool,
) -> Result<OptimizeReport> {
    let data = synth_engine_dataset(seed, n_inputs)?;
    let design = engine_design(seed, n_inputs)?;
    let models = build_all_models(&data, prune, normalize)?;
    let mut report = OptimizeReport {
        n_inputs,
        seed,
        models: Vec::with_capacity(models.len()),
        conversion_total: Duration::ZERO,
        vrep_total: Duration::ZERO,
        hrep_total: Duration::ZERO,
    };
    for model in &models {
        let op = design
            .iter()
            .find(|op| op.key == model.op_point_key())
            .ok_or_else(|| HullError::InvalidInput("model key not in engine design".into()))?;
        let run = optimize_model(
            model,
            &op.bowl.objective(model),
            timeout.saturating_sub(report.conversion_total),
        )?;
        report.conversion_total += run.conversion_time();
        report.vrep_total += run.vrep.elapsed;
        if let HrepRun::Solved { total, .. } = &run.hrep {
            report.hrep_total += *total;
        }
        report.models.push(run);
    }
    Ok(report)
}

fn optimize_model(
    model: &BoundaryModel,
    f: &crate::optimize::Objective,
    budget: Duration,
) -> Result<ModelRun> {
    let vrep = solve_vrep(
        f,
        &[],
        model.vrep(),
        &SolveOptions::vrep_defaults(),
        Method::ProjGrad,
    )?;
    let hrep = if budget.is_zero() {
        HrepRun::TimedOut {
            elapsed: Duration::ZERO,
        }
    } else {
        let start = Instant::now();
        let opts = ConversionOptions {
            timeout: Some(budget),
            ..ConversionOptions::default()
        };
        match vrep_to_hrep_with(model.vrep(), &opts) {
            Err(HullError::Timeout { elapsed }) => HrepRun::TimedOut {
                elapsed: Duration::from_secs_f64(elapsed),
            },
            Err(e) => return Err(e),
            Ok(conv) => {
                let center = chebyshev_center(&conv.hrep)?.center;
                let result =
                    solve_hrep(f, &[], &conv.hrep, &center, &SolveOptions::hrep_defaults())?;
                HrepRun::Solved {
                    conversion: conv.elapsed,
                    facets: conv.facet_count,
                    total: start.elapsed(),
                    result,
                }
            }
        }
    };
    Ok(ModelRun {
        name: model.name().to_string(),
        op_point_key: model.op_point_key().to_vec(),
        points: model.vrep().len(),
        vrep,
        hrep,
    })
}
