use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hullkit::bench::{
    bench_conversion, bench_membership, bench_optimize, emit_table, BenchRow, TableFormat,
};
use hullkit::boundary::{
    build_all_models, load_csv, model_from_json, save_model, synth_engine_dataset, BoundaryModel,
};
use hullkit::hull::{contains, extreme_indices};
use hullkit::optimize::{
    chebyshev_center, solve_hrep, solve_vrep, Method, Objective, SolveOptions,
};
use hullkit::polytope::{
    cross_polytope, random_point_set, unit_cube, vrep_to_hrep_with, ConversionOptions,
};
use hullkit::{HRep, HullError, VRep};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "hullkit",
    version,
    about = "Convex hulls in vertex and half-space form"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate point sets, polytopes or a synthetic engine dataset.
    Gen(GenArgs),
    /// Convert a vertex representation into half-spaces.
    Convert(ConvertArgs),
    /// Test query points for membership in a hull.
    Contains(ContainsArgs),
    /// List the extreme points of a point set.
    Vertices(VerticesArgs),
    /// Minimize an objective over a hull.
    Optimize(OptimizeArgs),
    /// Time vertex-to-half-space conversion over a grid of (m, n).
    BenchConversion(BenchConversionArgs),
    /// Time LP membership queries over a grid of (m, n).
    BenchMembership(BenchMembershipArgs),
    /// Compare optimization over both representations on engine models.
    BenchOptimize(BenchOptimizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Cube,
    Cross,
    Engine,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    /// Number of points (random).
    #[arg(long, default_value_t = 50)]
    m: usize,
    /// Dimension (random, cube, cross).
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Number of engine input signals: 4, 7 or 9.
    #[arg(long, default_value_t = 4)]
    inputs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; defaults to `<kind>.json` or `engine.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also build one boundary model per operating point into this directory (engine).
    #[arg(long)]
    models_dir: Option<PathBuf>,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args, Clone, Copy)]
struct ModelFlags {
    /// Keep only extreme points in built models.
    #[arg(long)]
    prune: bool,
    /// Keep raw input coordinates instead of scaling to [-1, 1].
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args)]
struct ConvertArgs {
    /// V-representation JSON file.
    input: PathBuf,
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Output file; defaults to `<input stem>.hrep.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ContainsArgs {
    /// V-representation or boundary-model JSON file.
    hull: PathBuf,
    /// Comma-separated coordinates of one query.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "queries")]
    query: Option<String>,
    /// CSV file of queries, one per row, with a header line.
    #[arg(long)]
    queries: Option<PathBuf>,
}

#[derive(Args)]
struct VerticesArgs {
    /// V-representation JSON file.
    input: PathBuf,
    /// Pruned output; defaults to `<input stem>.extreme.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptMethod {
    Projgrad,
    FrankWolfe,
    Hrep,
}

#[derive(Args)]
struct OptimizeArgs {
    /// V-representation or boundary-model JSON file.
    hull: PathBuf,
    /// Minimize `c·x` for these comma-separated coefficients.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "target")]
    linear: Option<String>,
    /// Minimize the squared distance to this comma-separated point.
    #[arg(long, allow_hyphen_values = true)]
    target: Option<String>,
    #[arg(long, value_enum, default_value_t = OptMethod::Projgrad)]
    method: OptMethod,
    /// Conversion timeout for the half-space method.
    #[arg(long)]
    timeout_s: Option<f64>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: TableFormat,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchConversionArgs {
    /// Cells as `MxN`, comma-separated.
    #[arg(long, default_value = "50x2,50x3,50x4", value_parser = parse_grid)]
    grid: Grid,
    #[arg(long, default_value_t = 3)]
    seeds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Args)]
struct BenchMembershipArgs {
    #[arg(long, default_value = "50x2,1000x9", value_parser = parse_grid)]
    grid: Grid,
    #[arg(long, default_value_t = 3)]
    seeds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Queries per seed, split evenly between inside and uniform.
    #[arg(long, default_value_t = 20)]
    queries: usize,
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Args)]
struct BenchOptimizeArgs {
    #[arg(long, default_value_t = 4)]
    inputs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Conversion budget shared by the seven models.
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Clone)]
struct Grid(Vec<(usize, usize)>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.split(',')
        .map(|cell| {
            let (m, n) = cell
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| format!("grid cell {cell:?} is not MxN"))?;
            let m = m.parse().map_err(|_| format!("bad m in {cell:?}"))?;
            let n = n.parse().map_err(|_| format!("bad n in {cell:?}"))?;
            Ok((m, n))
        })
        .collect::<Result<_, _>>()
        .map(Grid)
}

fn parse_format(s: &str) -> Result<TableFormat, String> {
    s.parse().map_err(|e: HullError| e.to_string())
}

fn parse_coords(s: &str) -> Result<Vec<f64>, HullError> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| HullError::InvalidInput(format!("bad coordinate {c:?}")))
        })
        .collect()
}

fn timeout(secs: Option<f64>) -> Result<Option<Duration>, HullError> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s)
            .map_err(|_| HullError::InvalidInput(format!("bad timeout {s}")))
    })
    .transpose()
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HullError> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn read_vrep(path: &Path) -> Result<VRep, HullError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// A hull file: plain points or a boundary model (raw coordinates).
enum Hull {
    Points(VRep),
    Model(BoundaryModel),
}

impl Hull {
    fn load(path: &Path) -> Result<Self, HullError> {
        let text = fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("schema_version").is_some() {
            Ok(Self::Model(model_from_json(&text)?))
        } else {
            Ok(Self::Points(serde_json::from_value(value)?))
        }
    }

    fn vrep(&self) -> &VRep {
        match self {
            Self::Points(v) => v,
            Self::Model(m) => m.vrep(),
        }
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Points(_) => x.to_vec(),
            Self::Model(m) => m.normalize(x),
        }
    }

    fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Self::Points(_) => z.to_vec(),
            Self::Model(m) => m.denormalize(z),
        }
    }

    /// Per-coordinate scale of the raw-from-model map.
    fn scales(&self) -> Vec<f64> {
        match self {
            Self::Model(m) => match m.normalization() {
                Some(cols) => cols.iter().map(|c| c.scale).collect(),
                None => vec![1.0; m.dim()],
            },
            Self::Points(v) => vec![1.0; v.dim()],
        }
    }
}

fn check_dim(expected: usize, got: usize, what: &str) -> Result<(), HullError> {
    if expected == got {
        Ok(())
    } else {
        Err(HullError::Dimension(format!(
            "{what} has dimension {got}, hull has {expected}"
        )))
    }
}

fn cmd_gen(a: GenArgs) -> Result<(), HullError> {
    let (kind, default_out) = match a.kind {
        GenKind::Random => ("random", "random.json"),
        GenKind::Cube => ("cube", "cube.json"),
        GenKind::Cross => ("cross", "cross.json"),
        GenKind::Engine => ("engine", "engine.csv"),
    };
    let out = a.out.unwrap_or_else(|| PathBuf::from(default_out));
    let (m, n) = match a.kind {
        GenKind::Random => {
            let v = random_point_set(a.m, a.n, a.seed)?;
            write_json(&out, &v)?;
            (v.len(), v.dim())
        }
        GenKind::Cube => {
            let (v, h) = unit_cube(a.n)?;
            let v = v.ok_or_else(|| {
                HullError::InvalidInput("dimension too large for vertices".into())
            })?;
            write_json(&out, &v)?;
            write_json(&sibling(&out, "hrep.json"), &h)?;
            (v.len(), v.dim())
        }
        GenKind::Cross => {
            let (v, h) = cross_polytope(a.n)?;
            write_json(&out, &v)?;
            if let Some(h) = h {
                write_json(&sibling(&out, "hrep.json"), &h)?;
            }
            (v.len(), v.dim())
        }
        GenKind::Engine => {
            let d = synth_engine_dataset(a.seed, a.inputs)?;
            d.save_csv(&out)?;
            if let Some(dir) = &a.models_dir {
                fs::create_dir_all(dir)?;
                for model in build_all_models(&d, a.model.prune, !a.model.no_normalize)? {
                    save_model(&model, dir.join(format!("{}.json", model.name())))?;
                }
            }
            (d.len(), a.inputs)
        }
    };
    println!("{kind} {m} {n} {} {}", a.seed, out.display());
    Ok(())
}

fn cmd_convert(a: ConvertArgs) -> Result<(), HullError> {
    let v = read_vrep(&a.input)?;
    let opts = ConversionOptions {
        timeout: timeout(a.timeout_s)?,
        ..ConversionOptions::default()
    };
    let report = vrep_to_hrep_with(&v, &opts)?;
    let out = a.out.unwrap_or_else(|| sibling(&a.input, "hrep.json"));
    write_json(&out, &report.hrep)?;
    println!(
        "facets {} elapsed_s {:.6} candidates {} {}",
        report.facet_count,
        report.elapsed.as_secs_f64(),
        report.candidates_examined,
        out.display()
    );
    Ok(())
}

fn cmd_contains(a: ContainsArgs) -> Result<(), HullError> {
    let hull = Hull::load(&a.hull)?;
    let queries = match (&a.query, &a.queries) {
        (Some(q), _) => vec![parse_coords(q)?],
        (None, Some(path)) => load_csv(path)?.rows().to_vec(),
        (None, None) => {
            return Err(HullError::InvalidInput("give --query or --queries".into()));
        }
    };
    let v = hull.vrep();
    for q in &queries {
        check_dim(v.dim(), q.len(), "query")?;
    }
    for q in &queries {
        let z = hull.normalize(q);
        let start = Instant::now();
        let inside = contains(v, &z)?.is_inside();
        let us = start.elapsed().as_secs_f64() * 1e6;
        println!("{} {us:.1} us", if inside { "inside" } else { "outside" });
    }
    Ok(())
}

fn cmd_vertices(a: VerticesArgs) -> Result<(), HullError> {
    let v = read_vrep(&a.input)?;
    let idx = extreme_indices(&v)?;
    let pruned = VRep::new(v.dim(), idx.iter().map(|&i| v.point(i).to_vec()).collect())?;
    let out = a.out.unwrap_or_else(|| sibling(&a.input, "extreme.json"));
    write_json(&out, &pruned)?;
    let list: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    println!("extreme {}", list.join(" "));
    println!("{} of {} extreme {}", idx.len(), v.len(), out.display());
    Ok(())
}

fn cmd_optimize(a: OptimizeArgs) -> Result<(), HullError> {
    let hull = Hull::load(&a.hull)?;
    let v = hull.vrep();
    let n = v.dim();
    let scales = hull.scales();
    // Objectives are stated in raw coordinates and pulled back to the model's.
    let f = match (&a.linear, &a.target) {
        (Some(c), _) => {
            let c = parse_coords(c)?;
            check_dim(n, c.len(), "objective")?;
            let pulled: Vec<f64> = c.iter().zip(&scales).map(|(ci, si)| ci * si).collect();
            Objective::linear(pulled)
        }
        (None, Some(t)) => {
            let t = parse_coords(t)?;
            check_dim(n, t.len(), "target")?;
            let center = hull.normalize(&t);
            let weights: Vec<f64> = scales.iter().map(|s| s * s).collect();
            Objective::weighted_quadratic(center, weights, 0.0)
        }
        (None, None) => return Err(HullError::InvalidInput("give --linear or --target".into())),
    };
    let (result, method) = match a.method {
        OptMethod::Projgrad => (
            solve_vrep(&f, &[], v, &SolveOptions::vrep_defaults(), Method::ProjGrad)?,
            "projgrad",
        ),
        OptMethod::FrankWolfe => (
            solve_vrep(
                &f,
                &[],
                v,
                &SolveOptions::vrep_defaults(),
                Method::FrankWolfe,
            )?,
            "frank-wolfe",
        ),
        OptMethod::Hrep => {
            let cached = match &hull {
                Hull::Model(m) => m.cached_hrep().cloned(),
                Hull::Points(_) => None,
            };
            let h: HRep = match cached {
                Some(h) => h,
                None => {
                    let opts = ConversionOptions {
                        timeout: timeout(a.timeout_s)?,
                        ..ConversionOptions::default()
                    };
                    vrep_to_hrep_with(v, &opts)?.hrep
                }
            };
            let start = chebyshev_center(&h)?.center;
            (
                solve_hrep(&f, &[], &h, &start, &SolveOptions::hrep_defaults())?,
                "hrep",
            )
        }
    };
    let report = json!({
        "method": method,
        "minimizer": hull.denormalize(&result.minimizer),
        "objective": result.objective,
        "iterations": result.iterations,
        "fun_evals": result.fun_evals,
        "elapsed_s": result.elapsed.as_secs_f64(),
        "converged": result.converged,
        "max_violation": result.max_violation,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn emit(rows: &[BenchRow], table: &TableArgs) -> Result<(), HullError> {
    let text = emit_table(rows, table.format);
    match &table.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn seconds(s: f64) -> Result<Duration, HullError> {
    timeout(Some(s)).map(|t| t.unwrap_or_default())
}

fn run(cli: Cli) -> Result<(), HullError> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Contains(a) => cmd_contains(a),
        Command::Vertices(a) => cmd_vertices(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::BenchConversion(a) => {
            let rows = bench_conversion(&a.grid.0, a.seeds, a.seed, seconds(a.timeout_s)?)?;
            emit(&rows, &a.table)
        }
        Command::BenchMembership(a) => {
            let rows = bench_membership(&a.grid.0, a.seeds, a.queries, a.seed)?;
            emit(&rows, &a.table)
        }
        Command::BenchOptimize(a) => {
            let report = bench_optimize(
                a.inputs,
                a.seed,
                seconds(a.timeout_s)?,
                a.model.prune,
                !a.model.no_normalize,
            )?;
            emit(&report.rows(), &a.table)
        }
    }
}

/// 2 for bad input, 3 for I/O failures, 1 for anything else.
fn exit_code(err: &HullError) -> u8 {
    match err {
        HullError::Io(_) => 3,
        HullError::Dimension(_)
        | HullError::InvalidInput(_)
        | HullError::Index { .. }
        | HullError::Parse { .. }
        | HullError::ParseMessage(_)
        | HullError::Schema(_)
        | HullError::TooFewPoints { .. }
        | HullError::Degenerate(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("hullkit: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
