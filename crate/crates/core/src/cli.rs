//! Command line interface: `simulate`, `estimate`, `theory` and `targets`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bandwidth::{lscv_select, lscv_select_2d, LscvFactor, LscvGrid, ScalarSearchSpec};
use crate::error::{Error, Result};
use crate::estimator::{evaluate_grid, BandwidthVec, EstimatorKind};
use crate::grid::{Box2, Grid2D};
use crate::ingest::{ingest_csv, ColumnRef};
use crate::sim::{format_table, run_simulation, OracleMode, SimConfig};
use crate::target::{builtin_target, TargetSpec, BUILTIN_IDS};
use crate::theory::amise_report;

#[derive(Debug, Parser)]
#[command(name = "ngkde", version, about = "Bivariate associated-kernel density estimation on R x [0, inf)")]
pub struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "NGKDE_WORKERS")]
    pub workers: Option<usize>,
    /// Master random seed.
    #[arg(long, global = true, env = "NGKDE_SEED", default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo study with oracle (ISE-minimizing) bandwidths.
    Simulate(SimulateArgs),
    /// Density surface from a CSV sample.
    Estimate(EstimateArgs),
    /// Optimal bandwidth and AMISE for builtin or custom targets.
    Theory(TheoryArgs),
    /// List or export builtin targets.
    Targets {
        #[command(subcommand)]
        action: TargetsAction,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Builtin target id (f1..f4).
    #[arg(long, default_value = "f1")]
    pub target: String,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Comma-separated estimator kinds.
    #[arg(long, value_delimiter = ',', default_value = "f1,f2,f3,f4,f5")]
    pub kinds: Vec<EstimatorKind>,
    /// Read the whole configuration from a JSON file; other simulation flags are ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid resolution `nx,ny`.
    #[arg(long, value_parser = parse_grid, default_value = "101,101")]
    pub grid: (usize, usize),
    /// Integration box `x1_lo,x1_hi,x2_lo,x2_hi` (default: the target box).
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: Option<Box2>,
    /// Bandwidth search `lo,hi,points,iters`.
    #[arg(long, value_parser = parse_search)]
    pub search: Option<ScalarSearchSpec>,
    /// Oracle search: `pair` frees both bandwidths, `tied` keeps the equal-smoothing tie.
    #[arg(long, default_value = "pair")]
    pub oracle: OracleMode,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the text table here (default: standard output).
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Column for x1: header name or zero-based index.
    #[arg(long, default_value = "0")]
    pub x1: String,
    /// Column for x2 (the nonnegative coordinate).
    #[arg(long, default_value = "1")]
    pub x2: String,
    #[arg(long)]
    pub log10_x1: bool,
    #[arg(long)]
    pub log10_x2: bool,
    #[arg(long, default_value = "f4")]
    pub kind: EstimatorKind,
    /// Native bandwidth pair, e.g. `b1,b2` for f3/f4.
    #[arg(long, value_parser = parse_pair, conflicts_with = "select")]
    pub bw: Option<(f64, f64)>,
    /// Bandwidth selector.
    #[arg(long, value_parser = ["lscv"])]
    pub select: Option<String>,
    /// Select the two coordinates separately instead of one tied scale.
    #[arg(long, requires = "select")]
    pub select_2d: bool,
    #[arg(long, default_value = "squared")]
    pub lscv_factor: LscvFactor,
    #[arg(long, value_parser = parse_search)]
    pub search: Option<ScalarSearchSpec>,
    #[arg(long, value_parser = parse_grid, default_value = "101,101")]
    pub grid: (usize, usize),
    /// Output box (default: data range padded by four smoothing scales, x2 floored at 0).
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: Option<Box2>,
    /// Surface CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Surface JSON output, including bandwidth metadata.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Builtin target id.
    #[arg(long, default_value = "f1", conflicts_with = "target_json")]
    pub target: String,
    /// Custom target specification (JSON).
    #[arg(long)]
    pub target_json: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "f1,f2,f3,f4")]
    pub kinds: Vec<EstimatorKind>,
    #[arg(long, value_parser = parse_grid, default_value = "400,400")]
    pub grid: (usize, usize),
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: Option<Box2>,
    /// Sample size at which s0 and AMISE are reported.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TargetsAction {
    List,
    Export {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_numbers<T: std::str::FromStr>(s: &str, count: usize, what: &str) -> std::result::Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("{what} needs {count} comma-separated values, got {s:?}"));
    }
    parts.iter().map(|p| p.parse::<T>().map_err(|_| format!("bad number {p:?} in {what}"))).collect()
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let v = parse_numbers::<usize>(s, 2, "grid")?;
    if v[0] == 0 || v[1] == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((v[0], v[1]))
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = parse_numbers::<f64>(s, 2, "bandwidth pair")?;
    Ok((v[0], v[1]))
}

fn parse_box(s: &str) -> std::result::Result<Box2, String> {
    let v = parse_numbers::<f64>(s, 4, "box")?;
    Box2::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_search(s: &str) -> std::result::Result<ScalarSearchSpec, String> {
    let v: Vec<&str> = s.split(',').map(str::trim).collect();
    if v.len() != 4 {
        return Err(format!("search needs lo,hi,points,iters, got {s:?}"));
    }
    let spec = ScalarSearchSpec {
        lo: v[0].parse().map_err(|_| format!("bad lo {:?}", v[0]))?,
        hi: v[1].parse().map_err(|_| format!("bad hi {:?}", v[1]))?,
        coarse_points: v[2].parse().map_err(|_| format!("bad points {:?}", v[2]))?,
        refine_iters: v[3].parse().map_err(|_| format!("bad iters {:?}", v[3]))?,
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json_to<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let workers = cli.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(Error::invalid("--workers must be at least 1"));
    }
    match cli.command {
        Command::Simulate(a) => simulate(a, cli.seed, workers),
        Command::Estimate(a) => in_pool(workers, || estimate(a)),
        Command::Theory(a) => in_pool(workers, || theory(a)),
        Command::Targets { action } => targets(action),
    }
}

fn in_pool(workers: usize, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn simulate(a: SimulateArgs, seed: u64, workers: usize) -> Result<()> {
    let config = match &a.config {
        Some(path) => {
            let mut c: SimConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            c.workers = workers;
            c
        }
        None => {
            let target = builtin_target(&a.target)?;
            let bounds = a.bbox.unwrap_or(target.integration_box);
            SimConfig {
                target_id: a.target.clone(),
                n: a.n,
                replications: a.reps,
                kinds: a.kinds.clone(),
                grid: Grid2D::new(bounds, a.grid.0, a.grid.1)?,
                search: a.search.unwrap_or_default(),
                oracle: a.oracle,
                master_seed: seed,
                workers,
            }
        }
    };
    let report = run_simulation(&config)?;
    if let Some(p) = &a.json {
        write_json_to(&report, Some(p))?;
    }
    let table = format_table(&report);
    match &a.table {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(table.as_bytes())?;
            w.flush()?;
        }
        None => print!("{table}"),
    }
    Ok(())
}

/// Per-axis smoothing scales used to pad the output box.
fn smoothing_scales(kind: EstimatorKind, bw: &BandwidthVec) -> Result<(f64, f64)> {
    let (u, v) = bw.native_pair(kind)?;
    Ok(if kind.is_ng() { (u.sqrt(), v.sqrt()) } else { (u, v) })
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let c1: ColumnRef = a.x1.parse()?;
    let c2: ColumnRef = a.x2.parse()?;
    let data = ingest_csv(&a.input, &c1, &c2, a.log10_x1, a.log10_x2)?;
    for r in &data.rejected {
        eprintln!("rejected line {}: {}", r.line, r.reason);
    }
    let sample = data.sample;
    let kind = a.kind;
    let bw = match (&a.bw, a.select.as_deref()) {
        (Some((u, v)), _) => BandwidthVec::for_kind(kind, *u, *v),
        (None, Some("lscv")) => {
            let search = a.search.unwrap_or_default();
            let lgrid = LscvGrid::default();
            if a.select_2d {
                let sel = lscv_select_2d(kind, &sample, &lgrid, &search, a.lscv_factor)?;
                eprintln!("lscv 2-d selection: s1 = {}, s2 = {}, score = {}", sel.s1, sel.s2, sel.score);
                sel.bw
            } else {
                let sel = lscv_select(kind, &sample, &lgrid, &search, a.lscv_factor)?;
                eprintln!("lscv selection: s = {}, score = {}", sel.s_opt, sel.score);
                if sel.s_opt <= search.lo || sel.s_opt >= search.hi {
                    eprintln!("warning: selected bandwidth lies on the edge of the search window");
                }
                sel.bw
            }
        }
        _ => return Err(Error::invalid("give either --bw or --select lscv")),
    };
    let bounds = match a.bbox {
        Some(b) => b,
        None => {
            let (s1, s2) = smoothing_scales(kind, &bw)?;
            LscvGrid::Padded { nx: a.grid.0, ny: a.grid.1, pad: 4.0 }.resolve(&sample, s1, s2)?.bounds
        }
    };
    let grid = Grid2D::new(bounds, a.grid.0, a.grid.1)?;
    let surface = evaluate_grid(kind, &sample, &bw, &grid)?;
    if let Some(p) = &a.out {
        surface.write_csv(create(p)?)?;
    }
    match &a.json {
        Some(p) => {
            let mut w = create(p)?;
            surface.write_json(&mut w)?;
            w.flush()?;
        }
        None if a.out.is_none() => surface.write_csv(std::io::stdout().lock())?,
        None => {}
    }
    Ok(())
}

fn theory(a: TheoryArgs) -> Result<()> {
    let target: TargetSpec = match &a.target_json {
        Some(p) => TargetSpec::from_json(&std::fs::read_to_string(p)?)?,
        None => builtin_target(&a.target)?,
    };
    let grid = Grid2D::new(a.bbox.unwrap_or(target.integration_box), a.grid.0, a.grid.1)?;
    let reports = a.kinds.iter().map(|&k| amise_report(k, &target, &grid, a.n)).collect::<Result<Vec<_>>>()?;
    #[derive(Serialize)]
    struct Doc<'a, T> {
        schema_version: u32,
        target: &'a TargetSpec,
        reports: Vec<T>,
    }
    write_json_to(&Doc { schema_version: 1, target: &target, reports }, a.out.as_deref())
}

fn targets(action: TargetsAction) -> Result<()> {
    match action {
        TargetsAction::List => {
            for id in BUILTIN_IDS {
                let t = builtin_target(id)?;
                let b = t.integration_box;
                println!("{id}\tbox [{}, {}] x [{}, {}]\tmass {:.4}", b.x1_lo, b.x1_hi, b.x2_lo, b.x2_hi, t.box_mass());
            }
            Ok(())
        }
        TargetsAction::Export { id, out } => {
            let t = builtin_target(&id)?;
            write_json_to(&t, out.as_deref())
        }
    }
}
