//! Pointwise, grid and leave-one-out evaluation of the five estimators.
//!
//! For `f1`..`f4` the kernel is parameterized by the evaluation point `x`
//! and evaluated at the data point `X_i` (associated kernels). Every
//! evaluation path (pointwise, grid, leave-one-out) runs through the same
//! per-row / per-column precomputation and the same per-node kernel sum, so
//! a grid value is bit-identical to the pointwise value at its node.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::grid::{DensitySurface, Grid2D, SurfaceMeta};
use crate::kernel::{gamma1_shape, gamma2_shape, gamma_pdf_log_with, gaussian_kernel, ng_alpha_shape};
use crate::Obs2;

/// Which of the five estimators to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Gaussian(`h`) x first-class gamma kernel (`b^2`).
    #[serde(rename = "f1")]
    F1,
    /// Gaussian(`h`) x second-class gamma kernel (`b^2`).
    #[serde(rename = "f2")]
    F2,
    /// NG kernel with shape `x2 / b2 + 2`.
    #[serde(rename = "f3")]
    F3,
    /// NG kernel with the piecewise shape `alpha_{b2}(x2)`.
    #[serde(rename = "f4")]
    F4,
    /// Product of two Gaussian kernels (`h1`, `h2`).
    #[serde(rename = "f5")]
    F5,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [Self::F1, Self::F2, Self::F3, Self::F4, Self::F5];

    pub fn tag(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::F5 => "f5",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Self::F1 => "F1_ClassicalGamma1",
            Self::F2 => "F2_ClassicalGamma2",
            Self::F3 => "F3_NG_Theta1",
            Self::F4 => "F4_NG_Theta2",
            Self::F5 => "F5_ClassicalProduct",
        }
    }

    /// Names of the two native bandwidths, in reporting order.
    pub fn bandwidth_names(self) -> (&'static str, &'static str) {
        match self {
            Self::F1 | Self::F2 => ("h", "b"),
            Self::F3 | Self::F4 => ("b1", "b2"),
            Self::F5 => ("h1", "h2"),
        }
    }

    pub fn is_ng(self) -> bool {
        matches!(self, Self::F3 | Self::F4)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == lower || k.long_name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown estimator {s:?}; expected f1..f5")))
    }
}

/// Smoothing parameters. Only the entries used by a given kind need to be set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BandwidthVec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Gamma-kernel bandwidth; the kernel scale is `b^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h2: Option<f64>,
}

impl BandwidthVec {
    /// Sets the two native bandwidths of `kind`: `(h, b)`, `(b1, b2)` or `(h1, h2)`.
    pub fn for_kind(kind: EstimatorKind, first: f64, second: f64) -> Self {
        match kind {
            EstimatorKind::F1 | EstimatorKind::F2 => Self { h: Some(first), b: Some(second), ..Self::default() },
            EstimatorKind::F3 | EstimatorKind::F4 => Self { b1: Some(first), b2: Some(second), ..Self::default() },
            EstimatorKind::F5 => Self { h1: Some(first), h2: Some(second), ..Self::default() },
        }
    }

    /// The two native bandwidths of `kind`, in the order of [`EstimatorKind::bandwidth_names`].
    pub fn native_pair(&self, kind: EstimatorKind) -> Result<(f64, f64)> {
        let (a, b) = kind.bandwidth_names();
        let get = |name: &str, v: Option<f64>| {
            let v = v.ok_or_else(|| Error::invalid(format!("estimator {kind} needs bandwidth {name}")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("bandwidth {name} must be positive, got {v}")));
            }
            Ok(v)
        };
        match kind {
            EstimatorKind::F1 | EstimatorKind::F2 => Ok((get(a, self.h)?, get(b, self.b)?)),
            EstimatorKind::F3 | EstimatorKind::F4 => Ok((get(a, self.b1)?, get(b, self.b2)?)),
            EstimatorKind::F5 => Ok((get(a, self.h1)?, get(b, self.h2)?)),
        }
    }
}

fn check_point(x: Obs2, what: &str) -> Result<()> {
    if !x.x1.is_finite() || !x.x2.is_finite() {
        return Err(Error::invalid(format!("{what} must be finite, got {x:?}")));
    }
    if x.x2 < 0.0 {
        return Err(Error::invalid(format!("{what} has negative x2 = {}", x.x2)));
    }
    Ok(())
}

fn check_sample(sample: &[Obs2]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::invalid("sample is empty"));
    }
    sample.iter().try_for_each(|&o| check_point(o, "observation"))
}

#[derive(Debug, Clone, Copy)]
enum Recipe {
    ClassicalGamma { h: f64, b: f64, second_class: bool },
    Ng { b1: f64, b2: f64, modified: bool },
    Product { h1: f64, h2: f64 },
}

/// Quantities depending only on the evaluation point's `x2`, one entry per datum.
pub(crate) struct Row {
    /// Separable kinds: the `x2` kernel factor. NG: log of every factor not
    /// involving `x1`.
    g: Vec<f64>,
    /// NG only: `t2 / (x2 + b2)`.
    d: Vec<f64>,
}

/// Quantities depending only on the evaluation point's `x1`.
pub(crate) struct Col {
    x1: f64,
    /// Separable kinds: the Gaussian factor per datum.
    k: Vec<f64>,
    /// NG only: `1 / (|x1| b1 + b1^2)` and half its log.
    c1: f64,
    half_ln_c1: f64,
}

/// An estimator bound to a validated sample and bandwidths.
pub(crate) struct Prepared<'a> {
    sample: &'a [Obs2],
    recipe: Recipe,
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(kind: EstimatorKind, sample: &'a [Obs2], bw: &BandwidthVec) -> Result<Self> {
        check_sample(sample)?;
        let (p, q) = bw.native_pair(kind)?;
        let recipe = match kind {
            EstimatorKind::F1 => Recipe::ClassicalGamma { h: p, b: q, second_class: false },
            EstimatorKind::F2 => Recipe::ClassicalGamma { h: p, b: q, second_class: true },
            EstimatorKind::F3 => Recipe::Ng { b1: p, b2: q, modified: false },
            EstimatorKind::F4 => Recipe::Ng { b1: p, b2: q, modified: true },
            EstimatorKind::F5 => Recipe::Product { h1: p, h2: q },
        };
        Ok(Self { sample, recipe })
    }

    pub(crate) fn len(&self) -> usize {
        self.sample.len()
    }

    pub(crate) fn row(&self, x2: f64) -> Row {
        match self.recipe {
            Recipe::ClassicalGamma { b, second_class, .. } => {
                let shape =
                    if second_class { gamma2_shape(x2, b) } else { gamma1_shape(x2, b) }.expect("validated x2 and b");
                let scale = b * b;
                let log_norm = ln_gamma(shape) + shape * scale.ln();
                let g = self.sample.iter().map(|o| gamma_pdf_log_with(shape, scale, log_norm, o.x2).exp()).collect();
                Row { g, d: Vec::new() }
            }
            Recipe::Ng { b2, modified, .. } => {
                let alpha = if modified { ng_alpha_shape(x2, b2).expect("validated x2 and b2") } else { x2 / b2 + 2.0 };
                let log_norm = ln_gamma(alpha) + alpha * b2.ln();
                let c2 = 1.0 / (x2 + b2);
                let mut g = Vec::with_capacity(self.sample.len());
                let mut d = Vec::with_capacity(self.sample.len());
                for o in self.sample {
                    let t2 = o.x2;
                    let prec2 = c2 * t2;
                    g.push(0.5 * (prec2 / (2.0 * PI)).ln() + gamma_pdf_log_with(alpha, b2, log_norm, t2));
                    d.push(prec2);
                }
                Row { g, d }
            }
            Recipe::Product { h2, .. } => {
                let g = self.sample.iter().map(|o| gaussian_kernel((x2 - o.x2) / h2)).collect();
                Row { g, d: Vec::new() }
            }
        }
    }

    pub(crate) fn col(&self, x1: f64) -> Col {
        match self.recipe {
            Recipe::ClassicalGamma { h, .. } | Recipe::Product { h1: h, .. } => Col {
                x1,
                k: self.sample.iter().map(|o| gaussian_kernel((x1 - o.x1) / h)).collect(),
                c1: 0.0,
                half_ln_c1: 0.0,
            },
            Recipe::Ng { b1, .. } => {
                let c1 = 1.0 / (x1.abs() * b1 + b1 * b1);
                Col { x1, k: Vec::new(), c1, half_ln_c1: 0.5 * c1.ln() }
            }
        }
    }

    /// Unnormalized kernel sum at the node `(col.x1, row's x2)`, optionally
    /// skipping one datum.
    #[inline]
    pub(crate) fn kernel_sum(&self, row: &Row, col: &Col, skip: Option<usize>) -> f64 {
        let skip = skip.unwrap_or(usize::MAX);
        let mut acc = 0.0;
        match self.recipe {
            Recipe::Ng { .. } => {
                for (i, o) in self.sample.iter().enumerate() {
                    if i == skip {
                        continue;
                    }
                    let dx = o.x1 - col.x1;
                    acc += (row.g[i] + col.half_ln_c1 - 0.5 * col.c1 * row.d[i] * dx * dx).exp();
                }
            }
            _ => {
                for (i, (k, g)) in col.k.iter().zip(&row.g).enumerate() {
                    if i == skip {
                        continue;
                    }
                    acc += k * g;
                }
            }
        }
        acc
    }

    /// Turns a kernel sum over `count` data points into a density value.
    #[inline]
    pub(crate) fn normalize(&self, sum: f64, count: usize) -> f64 {
        let n = count as f64;
        match self.recipe {
            Recipe::ClassicalGamma { h, .. } => sum / (n * h),
            Recipe::Ng { .. } => sum / n,
            Recipe::Product { h1, h2 } => sum / (n * h1 * h2),
        }
    }

    pub(crate) fn at(&self, x: Obs2) -> f64 {
        let row = self.row(x.x2);
        let col = self.col(x.x1);
        self.normalize(self.kernel_sum(&row, &col, None), self.len())
    }

    /// Values on the grid, row-major; rows are independent tasks.
    pub(crate) fn grid_values(&self, grid: &Grid2D) -> Vec<f64> {
        let rows: Vec<Row> = (0..grid.ny).into_par_iter().map(|j| self.row(grid.x2(j))).collect();
        let n = self.len();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(grid.ny).enumerate().for_each(|(i, out)| {
            let col = self.col(grid.x1(i));
            for (v, row) in out.iter_mut().zip(&rows) {
                *v = self.normalize(self.kernel_sum(row, &col, None), n);
            }
        });
        values
    }

    /// `sum_i fhat_{-i}(X_i)`, each term averaged over the other `n - 1` points.
    pub(crate) fn loo_sum(&self) -> f64 {
        let n = self.len();
        let terms: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = self.sample[i];
                let row = self.row(x.x2);
                let col = self.col(x.x1);
                self.normalize(self.kernel_sum(&row, &col, Some(i)), n - 1)
            })
            .collect();
        terms.iter().sum()
    }
}

/// Estimated density at `x`.
pub fn evaluate(kind: EstimatorKind, sample: &[Obs2], bw: &BandwidthVec, x: Obs2) -> Result<f64> {
    check_point(x, "evaluation point")?;
    Ok(Prepared::new(kind, sample, bw)?.at(x))
}

/// Estimated density at every node of `grid`.
pub fn evaluate_grid(kind: EstimatorKind, sample: &[Obs2], bw: &BandwidthVec, grid: &Grid2D) -> Result<DensitySurface> {
    grid.bounds.validate()?;
    let prepared = Prepared::new(kind, sample, bw)?;
    Ok(DensitySurface {
        grid: *grid,
        values: prepared.grid_values(grid),
        meta: SurfaceMeta { estimator: kind, bandwidths: *bw },
    })
}

/// Leave-one-out estimate at `sample[i]` from the other `n - 1` points.
pub fn evaluate_loo(kind: EstimatorKind, sample: &[Obs2], bw: &BandwidthVec, i: usize) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::invalid("leave-one-out needs at least two observations"));
    }
    if i >= sample.len() {
        return Err(Error::invalid(format!("index {i} out of range for sample of size {}", sample.len())));
    }
    let reduced: Vec<Obs2> = sample.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &o)| o).collect();
    evaluate(kind, &reduced, bw, sample[i])
}
