//! Integrated squared error, oracle (ISE-minimizing) bandwidth selection
//! and least-squares cross-validation.
//!
//! The scalar searches run along one `s` with the equal-smoothing tie
//! `h = b = sqrt(b1) = sqrt(b2) = h1 = h2 = s`: a coarse log-spaced scan
//! followed by golden-section refinement around the best coarse point. The
//! returned minimizer is the argmin over every evaluated point, ties going to
//! the smallest `s`. The pair searches start from the tied optimum and free
//! the two axes by coordinate descent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{BandwidthVec, EstimatorKind, Prepared};
use crate::grid::{Box2, Grid2D};
use crate::target::TargetSpec;
use crate::Obs2;

/// `h = b = h1 = h2 = s` and `b1 = b2 = s^2`.
pub fn tie_bandwidths(s: f64) -> Result<BandwidthVec> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("tied bandwidth must be positive, got {s}")));
    }
    let sq = s * s;
    Ok(BandwidthVec { h: Some(s), b: Some(s), b1: Some(sq), b2: Some(sq), h1: Some(s), h2: Some(s) })
}

/// Scalar search window: `coarse_points` log-spaced values on `[lo, hi]`,
/// then `refine_iters` golden-section steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSearchSpec {
    pub lo: f64,
    pub hi: f64,
    pub coarse_points: usize,
    pub refine_iters: usize,
}

impl Default for ScalarSearchSpec {
    fn default() -> Self {
        Self { lo: 0.02, hi: 3.0, coarse_points: 60, refine_iters: 40 }
    }
}

impl ScalarSearchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::invalid(format!("degenerate search window [{}, {}]", self.lo, self.hi)));
        }
        if self.coarse_points < 8 {
            return Err(Error::invalid(format!("need at least 8 coarse points, got {}", self.coarse_points)));
        }
        Ok(())
    }

    pub fn coarse_grid(&self) -> Vec<f64> {
        let m = self.coarse_points;
        let ratio = (self.hi / self.lo).ln();
        (0..m).map(|k| if k + 1 == m { self.hi } else { self.lo * (ratio * k as f64 / (m - 1) as f64).exp() }).collect()
    }
}

/// Outcome of a one-dimensional bandwidth search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub s_opt: f64,
    pub bw: BandwidthVec,
    pub score: f64,
    /// Every evaluated `(s, score)`: the coarse scan in increasing `s`, then
    /// the refinement steps in evaluation order.
    pub trace: Vec<(f64, f64)>,
}

fn checked(s: f64, v: f64) -> Result<f64> {
    if v.is_nan() {
        return Err(Error::numeric(format!("objective is NaN at s = {s}")));
    }
    Ok(v)
}

fn argmin(trace: &[(f64, f64)]) -> (f64, f64) {
    let mut best = trace[0];
    for &(s, v) in &trace[1..] {
        if v < best.1 || (v == best.1 && s < best.0) {
            best = (s, v);
        }
    }
    best
}

/// `(s_opt, score, trace)`.
pub type SearchOutcome = (f64, f64, Vec<(f64, f64)>);

/// Minimizes `objective` over the window.
pub fn scalar_search<F>(search: &ScalarSearchSpec, objective: F) -> Result<SearchOutcome>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    search.validate()?;
    let coarse = search.coarse_grid();
    let scores: Vec<f64> =
        coarse.par_iter().map(|&s| objective(s).and_then(|v| checked(s, v))).collect::<Result<_>>()?;
    let mut trace: Vec<(f64, f64)> = coarse.iter().copied().zip(scores).collect();

    let (best_s, _) = argmin(&trace);
    let k = coarse.iter().position(|&s| s == best_s).expect("best point is on the coarse grid");
    let mut a = coarse[k.saturating_sub(1)];
    let mut b = coarse[(k + 1).min(coarse.len() - 1)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = checked(c, objective(c)?)?;
    let mut fd = checked(d, objective(d)?)?;
    trace.push((c, fc));
    trace.push((d, fd));
    for _ in 2..search.refine_iters.max(2) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = checked(c, objective(c)?)?;
            trace.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = checked(d, objective(d)?)?;
            trace.push((d, fd));
        }
    }
    let (s_opt, score) = argmin(&trace);
    Ok((s_opt, score, trace))
}

/// Sum of squared differences times the cell area.
pub fn integrated_squared_difference(grid: &Grid2D, a: &[f64], b: &[f64]) -> f64 {
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    ss * grid.cell_area()
}

fn check_grid_in_box(target: &TargetSpec, grid: &Grid2D) -> Result<()> {
    if !target.integration_box.contains_box(&grid.bounds) {
        return Err(Error::invalid(format!(
            "grid {:?} extends outside the integration box {:?} of target {}",
            grid.bounds, target.integration_box, target.name
        )));
    }
    Ok(())
}

/// Target density at every node of `grid`, row-major.
pub fn target_on_grid(target: &TargetSpec, grid: &Grid2D) -> Vec<f64> {
    let x1 = grid.x1_nodes();
    let x2 = grid.x2_nodes();
    let m2: Vec<f64> = x2.iter().map(|&v| target.margin_x2.pdf(v)).collect();
    let mut out = Vec::with_capacity(grid.len());
    for &a in &x1 {
        let m1 = target.margin_x1.pdf(a);
        out.extend(m2.iter().map(|&m| m1 * m));
    }
    out
}

/// Midpoint-rule ISE of the estimate against a known target.
pub fn ise(kind: EstimatorKind, sample: &[Obs2], bw: &BandwidthVec, target: &TargetSpec, grid: &Grid2D) -> Result<f64> {
    check_grid_in_box(target, grid)?;
    let prepared = Prepared::new(kind, sample, bw)?;
    let truth = target_on_grid(target, grid);
    Ok(integrated_squared_difference(grid, &prepared.grid_values(grid), &truth))
}

/// ISE along the tied bandwidth, with the target tabulated once.
pub struct IseObjective<'a> {
    kind: EstimatorKind,
    sample: &'a [Obs2],
    grid: Grid2D,
    truth: Vec<f64>,
}

impl<'a> IseObjective<'a> {
    pub fn new(kind: EstimatorKind, sample: &'a [Obs2], target: &TargetSpec, grid: &Grid2D) -> Result<Self> {
        check_grid_in_box(target, grid)?;
        Ok(Self { kind, sample, grid: *grid, truth: target_on_grid(target, grid) })
    }

    /// Reuses a tabulated target; `truth` must come from [`target_on_grid`] on `grid`.
    pub fn with_truth(kind: EstimatorKind, sample: &'a [Obs2], grid: &Grid2D, truth: Vec<f64>) -> Self {
        Self { kind, sample, grid: *grid, truth }
    }

    pub fn at(&self, s: f64) -> Result<f64> {
        self.at_bw(&tie_bandwidths(s)?)
    }

    pub fn at_bw(&self, bw: &BandwidthVec) -> Result<f64> {
        let values = Prepared::new(self.kind, self.sample, bw)?.grid_values(&self.grid);
        Ok(integrated_squared_difference(&self.grid, &values, &self.truth))
    }
}

/// Tied bandwidth minimizing the ISE against the known target.
pub fn oracle_select(
    kind: EstimatorKind,
    sample: &[Obs2],
    target: &TargetSpec,
    grid: &Grid2D,
    search: &ScalarSearchSpec,
) -> Result<SelectionResult> {
    let objective = IseObjective::new(kind, sample, target, grid)?;
    oracle_select_with(&objective, search)
}

pub fn oracle_select_with(objective: &IseObjective<'_>, search: &ScalarSearchSpec) -> Result<SelectionResult> {
    let (s_opt, score, trace) = scalar_search(search, |s| objective.at(s))?;
    Ok(SelectionResult { s_opt, bw: tie_bandwidths(s_opt)?, score, trace })
}

/// Both axes on the scale of the tie: `(h, b) = (c1, c2)`, `(b1, b2) =
/// (c1^2, c2^2)`, `(h1, h2) = (c1, c2)`. `scale_pair(kind, s, s)` matches
/// `tie_bandwidths(s)` on the bandwidths `kind` uses.
pub fn scale_pair(kind: EstimatorKind, c1: f64, c2: f64) -> BandwidthVec {
    if kind.is_ng() {
        BandwidthVec::for_kind(kind, c1 * c1, c2 * c2)
    } else {
        BandwidthVec::for_kind(kind, c1, c2)
    }
}

/// Each coordinate step of the oracle pair search scans `[c / 3, 3 c]`
/// (clipped to the outer window) with this many points and golden steps.
const PAIR_WINDOW: f64 = 3.0;
const PAIR_COARSE: usize = 9;
const PAIR_REFINE: usize = 12;
const PAIR_MAX_SWEEPS: usize = 4;

/// `(c1, c2, score, trace)`.
type PairOutcome = (f64, f64, f64, Vec<(f64, f64, f64)>);

/// Coordinate descent from `start` on local log windows. Stops after a sweep
/// that moves neither coordinate by more than 0.1%.
fn pair_descent<F>(outer: &ScalarSearchSpec, start: (f64, f64, f64), objective: F) -> Result<PairOutcome>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let local = |c: f64| ScalarSearchSpec {
        lo: (c / PAIR_WINDOW).max(outer.lo),
        hi: (c * PAIR_WINDOW).min(outer.hi),
        coarse_points: PAIR_COARSE,
        refine_iters: PAIR_REFINE,
    };
    let (mut c1, mut c2, mut score) = start;
    let mut trace = Vec::new();
    for _ in 0..PAIR_MAX_SWEEPS {
        let before = (c1, c2);
        let fixed2 = c2;
        let (a, v, t) = scalar_search(&local(c1), |a| objective(a, fixed2))?;
        trace.extend(t.iter().map(|&(a, v)| (a, fixed2, v)));
        if v < score {
            c1 = a;
            score = v;
        }
        let fixed1 = c1;
        let (b, v, t) = scalar_search(&local(c2), |b| objective(fixed1, b))?;
        trace.extend(t.iter().map(|&(b, v)| (fixed1, b, v)));
        if v < score {
            c2 = b;
            score = v;
        }
        if (c1 / before.0).ln().abs() < 1e-3 && (c2 / before.1).ln().abs() < 1e-3 {
            break;
        }
    }
    Ok((c1, c2, score, trace))
}

/// ISE-minimizing bandwidth pair: the tied optimum, then coordinate descent
/// over `(c1, c2)` mapped through [`scale_pair`].
pub fn oracle_select_2d(
    kind: EstimatorKind,
    sample: &[Obs2],
    target: &TargetSpec,
    grid: &Grid2D,
    search: &ScalarSearchSpec,
) -> Result<Selection2d> {
    let objective = IseObjective::new(kind, sample, target, grid)?;
    oracle_select_2d_with(&objective, search)
}

pub fn oracle_select_2d_with(objective: &IseObjective<'_>, search: &ScalarSearchSpec) -> Result<Selection2d> {
    let kind = objective.kind;
    let tied = oracle_select_with(objective, search)?;
    let (s1, s2, score, steps) =
        pair_descent(search, (tied.s_opt, tied.s_opt, tied.score), |a, b| objective.at_bw(&scale_pair(kind, a, b)))?;
    let mut trace: Vec<(f64, f64, f64)> = tied.trace.iter().map(|&(s, v)| (s, s, v)).collect();
    trace.extend(steps);
    Ok(Selection2d { s1, s2, bw: scale_pair(kind, s1, s2), score, trace })
}

/// Constant in front of the leave-one-out sum of the LSCV criterion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LscvFactor {
    /// `2 / n^2`.
    #[default]
    Squared,
    /// `2 / n`, the usual unbiased-risk constant.
    Standard,
}

impl LscvFactor {
    pub fn coefficient(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            LscvFactor::Squared => 2.0 / (n * n),
            LscvFactor::Standard => 2.0 / n,
        }
    }
}

impl std::str::FromStr for LscvFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Self::Squared),
            "standard" => Ok(Self::Standard),
            _ => Err(Error::invalid(format!("lscv factor must be 'squared' or 'standard', got {s:?}"))),
        }
    }
}

/// Integration domain for the `int fhat^2` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LscvGrid {
    Fixed(Grid2D),
    /// Bounding box of the data padded by `pad` bandwidths per side (`x2`
    /// floored at 0), re-derived for every candidate bandwidth.
    Padded {
        nx: usize,
        ny: usize,
        pad: f64,
    },
}

impl Default for LscvGrid {
    fn default() -> Self {
        LscvGrid::Padded { nx: 151, ny: 151, pad: 4.0 }
    }
}

impl LscvGrid {
    /// Grid for a candidate whose axis-wise smoothing scales are `(s1, s2)`.
    pub fn resolve(&self, sample: &[Obs2], s1: f64, s2: f64) -> Result<Grid2D> {
        match *self {
            LscvGrid::Fixed(g) => Ok(g),
            LscvGrid::Padded { nx, ny, pad } => {
                if sample.is_empty() {
                    return Err(Error::invalid("sample is empty"));
                }
                let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
                for o in sample {
                    lo1 = lo1.min(o.x1);
                    hi1 = hi1.max(o.x1);
                    lo2 = lo2.min(o.x2);
                    hi2 = hi2.max(o.x2);
                }
                let bounds = Box2::new(lo1 - pad * s1, hi1 + pad * s1, (lo2 - pad * s2).max(0.0), hi2 + pad * s2)?;
                Grid2D::new(bounds, nx, ny)
            }
        }
    }
}

/// `int fhat^2 - c * sum_i fhat_{-i}(X_i)` with `c` from `factor`.
pub fn lscv_score(
    kind: EstimatorKind,
    sample: &[Obs2],
    bw: &BandwidthVec,
    grid: &Grid2D,
    factor: LscvFactor,
) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::invalid("LSCV needs at least two observations"));
    }
    let prepared = Prepared::new(kind, sample, bw)?;
    let values = prepared.grid_values(grid);
    let int_sq: f64 = values.iter().map(|v| v * v).sum::<f64>() * grid.cell_area();
    Ok(int_sq - factor.coefficient(sample.len()) * prepared.loo_sum())
}

/// Tied bandwidth minimizing the LSCV criterion.
pub fn lscv_select(
    kind: EstimatorKind,
    sample: &[Obs2],
    grid: &LscvGrid,
    search: &ScalarSearchSpec,
    factor: LscvFactor,
) -> Result<SelectionResult> {
    if sample.len() < 2 {
        return Err(Error::invalid("LSCV needs at least two observations"));
    }
    let (s_opt, score, trace) = scalar_search(search, |s| {
        let g = grid.resolve(sample, s, s)?;
        lscv_score(kind, sample, &tie_bandwidths(s)?, &g, factor)
    })?;
    Ok(SelectionResult { s_opt, bw: tie_bandwidths(s_opt)?, score, trace })
}

/// Outcome of a two-parameter search. `(s1, s2)` are the search
/// coordinates: [`untie_pair`] maps them for LSCV, [`scale_pair`] for the
/// oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection2d {
    pub s1: f64,
    pub s2: f64,
    pub bw: BandwidthVec,
    pub score: f64,
    /// Every evaluated `(s1, s2, score)`.
    pub trace: Vec<(f64, f64, f64)>,
}

/// Maps the 2-D search coordinates to native bandwidths: `(h, b) = (s1, s2)`,
/// `(b1, b2) = (s1^2, s2)`, `(h1, h2) = (s1, s2)`.
pub fn untie_pair(kind: EstimatorKind, s1: f64, s2: f64) -> BandwidthVec {
    if kind.is_ng() {
        BandwidthVec::for_kind(kind, s1 * s1, s2)
    } else {
        BandwidthVec::for_kind(kind, s1, s2)
    }
}

/// Two-parameter LSCV: starts at the tied optimum and runs three sweeps of
/// coordinate descent, each coordinate searched with `search`.
pub fn lscv_select_2d(
    kind: EstimatorKind,
    sample: &[Obs2],
    grid: &LscvGrid,
    search: &ScalarSearchSpec,
    factor: LscvFactor,
) -> Result<Selection2d> {
    const SWEEPS: usize = 3;
    let tied = lscv_select(kind, sample, grid, search, factor)?;
    let mut s1 = tied.s_opt;
    let mut s2 = if kind.is_ng() { tied.s_opt * tied.s_opt } else { tied.s_opt };
    let mut trace: Vec<(f64, f64, f64)> =
        tied.trace.iter().map(|&(s, v)| (s, if kind.is_ng() { s * s } else { s }, v)).collect();
    let score_at = |a: f64, b: f64| -> Result<f64> {
        let g = grid.resolve(sample, a, b)?;
        lscv_score(kind, sample, &untie_pair(kind, a, b), &g, factor)
    };
    let mut score = tied.score;
    for _ in 0..SWEEPS {
        let fixed2 = s2;
        let (a, v, t) = scalar_search(search, |a| score_at(a, fixed2))?;
        trace.extend(t.iter().map(|&(a, v)| (a, fixed2, v)));
        if v <= score {
            s1 = a;
            score = v;
        }
        let fixed1 = s1;
        let (b, v, t) = scalar_search(search, |b| score_at(fixed1, b))?;
        trace.extend(t.iter().map(|&(b, v)| (fixed1, b, v)));
        if v <= score {
            s2 = b;
            score = v;
        }
    }
    Ok(Selection2d { s1, s2, bw: untie_pair(kind, s1, s2), score, trace })
}
