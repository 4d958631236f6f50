//! Seeded Monte-Carlo benchmark: draw samples from a target, pick each
//! estimator's oracle (ISE-minimizing) bandwidths, and summarize the
//! resulting ISE and bandwidths.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{oracle_select_2d_with, oracle_select_with, target_on_grid, IseObjective, ScalarSearchSpec};
use crate::error::{Error, Result};
use crate::estimator::{BandwidthVec, EstimatorKind};
use crate::grid::Grid2D;
use crate::target::{builtin_target, TargetSpec};

pub const SIM_SCHEMA_VERSION: u32 = 1;

pub const BW_CONVENTION: &str =
    "bw1, bw2 per estimator: f1 and f2 (h, b^2) with b^2 the gamma kernel scale, f3 and f4 (b1, b2), f5 (h1, h2)";

/// How the oracle bandwidths are searched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// One scalar under the equal-smoothing tie.
    Tied,
    /// Both bandwidths, starting from the tied optimum.
    #[default]
    Pair,
}

impl std::str::FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tied" => Ok(Self::Tied),
            "pair" => Ok(Self::Pair),
            _ => Err(Error::invalid(format!("oracle mode must be 'tied' or 'pair', got {s:?}"))),
        }
    }
}

/// The two reported bandwidths of `kind`, see [`BW_CONVENTION`].
pub fn reported_pair(kind: EstimatorKind, bw: &BandwidthVec) -> Result<(f64, f64)> {
    let (a, b) = bw.native_pair(kind)?;
    Ok(match kind {
        EstimatorKind::F1 | EstimatorKind::F2 => (a, b * b),
        _ => (a, b),
    })
}

/// Simulation settings. `workers` only controls parallelism and is left out
/// of serialized reports so that they do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub target_id: String,
    pub n: usize,
    pub replications: usize,
    pub kinds: Vec<EstimatorKind>,
    pub grid: Grid2D,
    pub search: ScalarSearchSpec,
    #[serde(default)]
    pub oracle: OracleMode,
    pub master_seed: u64,
    #[serde(default = "default_workers", skip_serializing)]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

impl SimConfig {
    /// All kinds, a 101 x 101 grid over the target box and the default search.
    pub fn new(target_id: &str, n: usize, replications: usize, master_seed: u64) -> Result<Self> {
        let target = builtin_target(target_id)?;
        Ok(Self {
            target_id: target_id.to_string(),
            n,
            replications,
            kinds: EstimatorKind::ALL.to_vec(),
            grid: Grid2D::new(target.integration_box, 101, 101)?,
            search: ScalarSearchSpec::default(),
            oracle: OracleMode::default(),
            master_seed,
            workers: 1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::invalid("sample size must be at least 2"));
        }
        if self.kinds.is_empty() {
            return Err(Error::invalid("no estimator kinds selected"));
        }
        if self.workers < 1 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        self.grid.bounds.validate()?;
        self.search.validate()?;
        builtin_target(&self.target_id).map(|_| ())
    }
}

/// RNG for replication `r`: the master seed picks the key, `r` the stream, so
/// any replication can be regenerated on its own.
pub fn replication_rng(master_seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(r);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindOutcome {
    pub kind: EstimatorKind,
    /// Search coordinates on the tie's scale (equal in tied mode).
    pub s1: f64,
    pub s2: f64,
    pub ise: f64,
    pub bw1: f64,
    pub bw2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub outcomes: Vec<KindOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub kind: EstimatorKind,
    pub mean_ise: f64,
    pub sd_ise: f64,
    pub mean_bw1: f64,
    pub sd_bw1: f64,
    pub mean_bw2: f64,
    pub sd_bw2: f64,
}

impl KindSummary {
    pub fn for_kind(summaries: &[KindSummary], kind: EstimatorKind) -> Option<&KindSummary> {
        summaries.iter().find(|s| s.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub schema_version: u32,
    pub config: SimConfig,
    pub bw_convention: String,
    pub summary: Vec<KindSummary>,
    pub records: Vec<ReplicationRecord>,
}

impl SimReport {
    pub fn summary_for(&self, kind: EstimatorKind) -> Option<&KindSummary> {
        KindSummary::for_kind(&self.summary, kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Arithmetic mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn with_replication(r: usize, e: Error) -> Error {
    match e {
        Error::Invalid(m) => Error::Invalid(format!("replication {r}: {m}")),
        Error::Numeric(m) => Error::Numeric(format!("replication {r}: {m}")),
        other => Error::Numeric(format!("replication {r}: {other}")),
    }
}

fn run_replication(cfg: &SimConfig, target: &TargetSpec, truth: &[f64], r: usize) -> Result<ReplicationRecord> {
    let mut rng = replication_rng(cfg.master_seed, r as u64);
    let sample = target.sample(&mut rng, cfg.n);
    let mut outcomes = Vec::with_capacity(cfg.kinds.len());
    for &kind in &cfg.kinds {
        let objective = IseObjective::with_truth(kind, &sample, &cfg.grid, truth.to_vec());
        let (s1, s2, ise, bw) = match cfg.oracle {
            OracleMode::Tied => {
                let sel = oracle_select_with(&objective, &cfg.search)?;
                (sel.s_opt, sel.s_opt, sel.score, sel.bw)
            }
            OracleMode::Pair => {
                let sel = oracle_select_2d_with(&objective, &cfg.search)?;
                (sel.s1, sel.s2, sel.score, sel.bw)
            }
        };
        let (bw1, bw2) = reported_pair(kind, &bw)?;
        outcomes.push(KindOutcome { kind, s1, s2, ise, bw1, bw2 });
    }
    Ok(ReplicationRecord { replication: r, outcomes })
}

/// Runs all replications on a pool of `config.workers` threads and reduces
/// them in replication order.
pub fn run_simulation(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let target = builtin_target(&config.target_id)?;
    if !target.integration_box.contains_box(&config.grid.bounds) {
        return Err(Error::invalid("simulation grid must lie inside the target box"));
    }
    let truth = target_on_grid(&target, &config.grid);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let records: Vec<ReplicationRecord> = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(config, &target, &truth, r).map_err(|e| with_replication(r, e)))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = config
        .kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let col = |f: fn(&KindOutcome) -> f64| -> Vec<f64> { records.iter().map(|r| f(&r.outcomes[k])).collect() };
            let (mean_ise, sd_ise) = mean_sd(&col(|o| o.ise));
            let (mean_bw1, sd_bw1) = mean_sd(&col(|o| o.bw1));
            let (mean_bw2, sd_bw2) = mean_sd(&col(|o| o.bw2));
            KindSummary { kind, mean_ise, sd_ise, mean_bw1, sd_bw1, mean_bw2, sd_bw2 }
        })
        .collect();
    Ok(SimReport {
        schema_version: SIM_SCHEMA_VERSION,
        config: config.clone(),
        bw_convention: BW_CONVENTION.to_string(),
        summary,
        records,
    })
}

/// Text table with ISE scaled by 1e6 and the reported bandwidth pairs.
pub fn format_table(report: &SimReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "distribution {}, n = {}, {} replications", c.target_id, c.n, c.replications);
    let _ = writeln!(
        out,
        "{:<12} {:>12} {:>12} {:>14} {:>14} {:>14} {:>14}",
        "estimator", "ISE(mean)e6", "ISE(sd)e6", "1st BW(mean)", "1st BW(sd)", "2nd BW(mean)", "2nd BW(sd)"
    );
    for s in &report.summary {
        let _ = writeln!(
            out,
            "{:<12} {:>12.0} {:>12.0} {:>14.4} {:>14.4} {:>14.4} {:>14.4}",
            format!("{} ({})", s.kind.tag(), bw_label(s.kind)),
            s.mean_ise * 1e6,
            s.sd_ise * 1e6,
            s.mean_bw1,
            s.sd_bw1,
            s.mean_bw2,
            s.sd_bw2
        );
    }
    out
}

fn bw_label(kind: EstimatorKind) -> String {
    let (a, b) = kind.bandwidth_names();
    match kind {
        EstimatorKind::F1 | EstimatorKind::F2 => format!("{a},{b}^2"),
        _ => format!("{a},{b}"),
    }
}
