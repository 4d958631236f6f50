//! Numerical evaluation of the asymptotic bias, variance, MISE-optimal
//! bandwidth and optimal AMISE of the four associated-kernel estimators.
//!
//! Derivatives of the target come from finite differences of
//! [`TargetSpec::pdf`]; integrals use cell-midpoint quadrature, with the
//! integrable singular weights `x2^(-1/2)` and `|x1|^(-1/2)` integrated
//! exactly over each cell.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimator::{BandwidthVec, EstimatorKind};
use crate::grid::Grid2D;
use crate::kernel::{gamma1_shape, gamma2_shape, gaussian_constants, ng_alpha_shape};
use crate::target::TargetSpec;
use crate::Obs2;

/// Ratio `x / bandwidth` above which the interior variance formula is used.
pub const REGIME_CROSSOVER: f64 = 20.0;

/// Largest relative change of a functional allowed between the half- and
/// full-resolution quadratures in [`amise_report`].
pub const QUADRATURE_RTOL: f64 = 5e-3;

/// `f` and its first and second partial derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partials2 {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f11: f64,
    pub f22: f64,
    pub f12: f64,
}

/// Default finite-difference steps: 1e-4 times the box extent per axis.
pub fn default_steps(target: &TargetSpec) -> (f64, f64) {
    let b = &target.integration_box;
    (1e-4 * (b.x1_hi - b.x1_lo), 1e-4 * (b.x2_hi - b.x2_lo))
}

/// Finite-difference partials of the target density at `x`.
///
/// Central second-order stencils, except within `2 * step2` of `x2 = 0`
/// where the `x2` direction switches to one-sided second-order stencils.
pub fn partials(target: &TargetSpec, x: Obs2, steps: Option<(f64, f64)>) -> Result<Partials2> {
    if !target.integration_box.contains(x) {
        return Err(Error::invalid(format!("point {x:?} is outside the box of target {}", target.name)));
    }
    let (k, h) = steps.unwrap_or_else(|| default_steps(target));
    if !(k > 0.0 && h > 0.0) {
        return Err(Error::invalid("finite-difference steps must be positive"));
    }
    let f = |a: f64, b: f64| target.pdf(Obs2::new(a, b));
    let (x1, x2) = (x.x1, x.x2);
    let f0 = f(x1, x2);
    let f1 = (f(x1 + k, x2) - f(x1 - k, x2)) / (2.0 * k);
    let f11 = (f(x1 + k, x2) - 2.0 * f0 + f(x1 - k, x2)) / (k * k);
    let d1 = |b: f64| (f(x1 + k, b) - f(x1 - k, b)) / (2.0 * k);
    let (f2, f22, f12) = if x2 >= 2.0 * h {
        let (up, dn) = (f(x1, x2 + h), f(x1, x2 - h));
        ((up - dn) / (2.0 * h), (up - 2.0 * f0 + dn) / (h * h), (d1(x2 + h) - d1(x2 - h)) / (2.0 * h))
    } else {
        let (p1, p2, p3) = (f(x1, x2 + h), f(x1, x2 + 2.0 * h), f(x1, x2 + 3.0 * h));
        (
            (-3.0 * f0 + 4.0 * p1 - p2) / (2.0 * h),
            (2.0 * f0 - 5.0 * p1 + 4.0 * p2 - p3) / (h * h),
            (-3.0 * d1(x2) + 4.0 * d1(x2 + h) - d1(x2 + 2.0 * h)) / (2.0 * h),
        )
    };
    Ok(Partials2 { f: f0, f1, f2, f11, f22, f12 })
}

fn reject_f5(kind: EstimatorKind) -> Result<()> {
    if kind == EstimatorKind::F5 {
        return Err(Error::invalid("asymptotic expressions are defined for f1..f4 only"));
    }
    Ok(())
}

/// Leading bias term given the partials at `x`.
pub fn bias_leading_from(kind: EstimatorKind, p: &Partials2, x: Obs2, bw: &BandwidthVec) -> Result<f64> {
    reject_f5(kind)?;
    let (k2, _) = gaussian_constants();
    let (u, v) = bw.native_pair(kind)?;
    let x2 = x.x2;
    Ok(match kind {
        EstimatorKind::F1 => {
            let (h, b) = (u, v);
            0.5 * k2 * h * h * p.f11 + b * b * (p.f2 + 0.5 * x2 * p.f22)
        }
        EstimatorKind::F2 => {
            let (h, b) = (u, v);
            let b2 = b * b;
            if x2 >= 2.0 * b2 {
                0.5 * k2 * h * h * p.f11 + 0.5 * b2 * x2 * p.f22
            } else {
                0.5 * k2 * h * h * p.f11 + b2 * (gamma2_shape(x2, b)? - x2 / b2) * p.f2
            }
        }
        EstimatorKind::F3 => {
            let (b1, b2) = (u, v);
            b1 * 0.5 * x.x1.abs() * p.f11 + b2 * (2.0 * p.f2 + 0.5 * x2 * p.f22)
        }
        EstimatorKind::F4 => {
            let (b1, b2) = (u, v);
            if x2 >= 3.0 * b2 {
                0.5 * (b1 * x.x1.abs() * p.f11 + b2 * x2 * p.f22)
            } else {
                0.5 * b1 * x.x1.abs() * p.f11 + b2 * (ng_alpha_shape(x2, b2)? - x2 / b2) * p.f2
            }
        }
        EstimatorKind::F5 => unreachable!(),
    })
}

/// Leading bias term of `kind` at `x` for the given target.
pub fn bias_leading(kind: EstimatorKind, target: &TargetSpec, x: Obs2, bw: &BandwidthVec) -> Result<f64> {
    reject_f5(kind)?;
    let p = partials(target, x, None)?;
    bias_leading_from(kind, &p, x, bw)
}

/// Which asymptotic variance regime to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Interior along an axis when `x / bandwidth > REGIME_CROSSOVER`,
    /// boundary otherwise.
    #[default]
    Auto,
    Interior,
    Boundary,
}

/// `int K^2` factor of a squared gamma(rho, scale) kernel, times `scale`:
/// `Gamma(2 rho - 1) / (2^(2 rho - 1) Gamma(rho)^2)`.
pub fn gamma_square_constant(rho: f64) -> f64 {
    let m = 2.0 * rho - 1.0;
    (ln_gamma(m) - m * 2f64.ln() - 2.0 * ln_gamma(rho)).exp()
}

/// Squared-NG-kernel constant `Gamma(2a - 1/2) / (sqrt(pi) 2^(2a + 1/2) Gamma(a)^2)`.
pub fn ng_square_constant(alpha: f64) -> f64 {
    (ln_gamma(2.0 * alpha - 0.5) - (2.0 * alpha + 0.5) * 2f64.ln() - 2.0 * ln_gamma(alpha)).exp() / PI.sqrt()
}

/// `1 / (4 pi sqrt(e))`, the interior NG variance constant.
pub fn ng_interior_constant() -> f64 {
    1.0 / (4.0 * PI * E.sqrt())
}

/// `k3 / (2 sqrt(pi))`, the interior variance constant of `f1`/`f2`.
pub fn gamma_interior_constant() -> f64 {
    gaussian_constants().1 / (2.0 * PI.sqrt())
}

fn interior_on(regime: Regime, ratio: f64) -> bool {
    match regime {
        Regime::Auto => ratio > REGIME_CROSSOVER,
        Regime::Interior => true,
        Regime::Boundary => false,
    }
}

/// Leading variance term of `kind` at `x` for sample size `n`.
pub fn variance_leading(
    kind: EstimatorKind,
    target: &TargetSpec,
    x: Obs2,
    bw: &BandwidthVec,
    n: usize,
    regime: Regime,
) -> Result<f64> {
    reject_f5(kind)?;
    if x.x2 < 0.0 {
        return Err(Error::invalid(format!("x2 must be nonnegative, got {}", x.x2)));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    let f = target.pdf(x);
    let n = n as f64;
    let (u, v) = bw.native_pair(kind)?;
    match kind {
        EstimatorKind::F1 | EstimatorKind::F2 => {
            let (h, b) = (u, v);
            let (_, k3) = gaussian_constants();
            let kappa = x.x2 / (b * b);
            if interior_on(regime, kappa) {
                if x.x2 == 0.0 {
                    return Err(Error::invalid("interior variance regime is singular at x2 = 0"));
                }
                Ok(gamma_interior_constant() * x.x2.powf(-0.5) * f / (n * h * b))
            } else {
                let rho = if kind == EstimatorKind::F1 { gamma1_shape(x.x2, b)? } else { gamma2_shape(x.x2, b)? };
                Ok(gamma_square_constant(rho) * k3 * f / (n * h * b * b))
            }
        }
        _ => {
            let (b1, b2) = (u, v);
            let kappa1 = x.x1.abs() / b1;
            let kappa2 = x.x2 / b2;
            let int1 = interior_on(regime, kappa1);
            let int2 = interior_on(regime, kappa2);
            if (int1 && x.x1 == 0.0) || (int2 && x.x2 == 0.0) {
                return Err(Error::invalid("interior variance regime is singular on x1 = 0 or x2 = 0"));
            }
            let alpha = if kind == EstimatorKind::F3 { kappa2 + 2.0 } else { ng_alpha_shape(x.x2, b2)? };
            // The four regimes factor into an x1 part and an x2 part.
            let u1 = if int1 { (b1 * x.x1.abs()).powf(-0.5) } else { 1.0 / (b1 * (kappa1 + 1.0).sqrt()) };
            let u2 = if int2 {
                ng_interior_constant() * (b2 * x.x2).powf(-0.5)
            } else {
                ng_square_constant(alpha) / (b2 * (kappa2 + 1.0).sqrt())
            };
            Ok(u1 * u2 * f / n)
        }
    }
}

/// One quadrature pass of [`amise_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePass {
    pub nx: usize,
    pub ny: usize,
    pub bias_functional: f64,
    pub variance_functional: f64,
}

/// Optimal-bandwidth and optimal-AMISE summary of one estimator for one target.
///
/// With `I = bias_functional`, `J = variance_functional`,
/// `V = variance_constant * J` and `p = rate_exponent`:
///
/// - `s0(n) = (V / (bias_weight * I))^p * n^-p`
/// - `AMISE_opt(n) = amise_constant * I^(1/3) * V^(2/3) * n^(-2/3)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmiseReport {
    pub kind: EstimatorKind,
    pub target: String,
    /// `int {1/2 k2 f11 + f2 + 1/2 x2 f22}^2` (f1), `int {k2 f11 + x2 f22}^2` (f2),
    /// `int {1/2 |x1| f11 + 2 f2 + 1/2 x2 f22}^2` (f3), `int {|x1| f11 + x2 f22}^2` (f4).
    pub bias_functional: f64,
    /// `int x2^(-1/2) f` (f1, f2) or `int |x1|^(-1/2) x2^(-1/2) f` (f3, f4).
    pub variance_functional: f64,
    pub variance_constant: f64,
    pub bias_weight: f64,
    pub amise_constant: f64,
    /// 1/6 for f1/f2 (`h = b`), 1/3 for f3/f4 (`b1 = b2`).
    pub rate_exponent: f64,
    pub n_ref: usize,
    pub s0_at_ref: f64,
    pub amise_at_ref: f64,
    /// Half-resolution and full-resolution quadratures.
    pub quadrature: Vec<QuadraturePass>,
}

impl AmiseReport {
    pub fn s0_opt(&self, n: f64) -> f64 {
        let v = self.variance_constant * self.variance_functional;
        (v / (self.bias_weight * self.bias_functional)).powf(self.rate_exponent) * n.powf(-self.rate_exponent)
    }

    pub fn amise_opt(&self, n: f64) -> f64 {
        let v = self.variance_constant * self.variance_functional;
        self.amise_constant * self.bias_functional.cbrt() * v.powf(2.0 / 3.0) * n.powf(-2.0 / 3.0)
    }
}

fn sqrt_weight(lo: f64, hi: f64) -> f64 {
    // int_lo^hi |t|^(-1/2) dt
    if lo >= 0.0 {
        2.0 * (hi.sqrt() - lo.sqrt())
    } else if hi <= 0.0 {
        2.0 * ((-lo).sqrt() - (-hi).sqrt())
    } else {
        2.0 * (hi.sqrt() + (-lo).sqrt())
    }
}

fn functionals(kind: EstimatorKind, target: &TargetSpec, grid: &Grid2D, steps: (f64, f64)) -> Result<(f64, f64)> {
    let (k2, _) = gaussian_constants();
    let (dx1, dx2) = (grid.dx1(), grid.dx2());
    let b = grid.bounds;
    let w2: Vec<f64> =
        (0..grid.ny).map(|j| sqrt_weight(b.x2_lo + j as f64 * dx2, b.x2_lo + (j + 1) as f64 * dx2)).collect();
    let mut bias_sum = 0.0;
    let mut var_sum = 0.0;
    for i in 0..grid.nx {
        let w1 = if kind.is_ng() { sqrt_weight(b.x1_lo + i as f64 * dx1, b.x1_lo + (i + 1) as f64 * dx1) } else { dx1 };
        for (j, &wj) in w2.iter().enumerate() {
            let x = grid.node(i, j);
            let p = partials(target, x, Some(steps))?;
            let a1 = x.x1.abs();
            let term = match kind {
                EstimatorKind::F1 => 0.5 * k2 * p.f11 + p.f2 + 0.5 * x.x2 * p.f22,
                EstimatorKind::F2 => k2 * p.f11 + x.x2 * p.f22,
                EstimatorKind::F3 => 0.5 * a1 * p.f11 + 2.0 * p.f2 + 0.5 * x.x2 * p.f22,
                EstimatorKind::F4 => a1 * p.f11 + x.x2 * p.f22,
                EstimatorKind::F5 => unreachable!(),
            };
            bias_sum += term * term;
            var_sum += w1 * wj * p.f;
        }
    }
    let bias = bias_sum * dx1 * dx2;
    if !bias.is_finite() || !var_sum.is_finite() {
        return Err(Error::numeric(format!("non-finite functional for {kind} on target {}", target.name)));
    }
    Ok((bias, var_sum))
}

/// Evaluates the AMISE building blocks of `kind` for `target` on `grid`
/// (which must lie inside the target box), also recomputing them at half
/// the resolution as a convergence check.
pub fn amise_report(kind: EstimatorKind, target: &TargetSpec, grid: &Grid2D, n_ref: usize) -> Result<AmiseReport> {
    reject_f5(kind)?;
    if !target.integration_box.contains_box(&grid.bounds) {
        return Err(Error::invalid("theory grid must lie inside the target box"));
    }
    if grid.nx < 4 || grid.ny < 4 {
        return Err(Error::invalid("theory grid needs at least 4 nodes per axis"));
    }
    let steps = default_steps(target);
    let half = Grid2D::new(grid.bounds, grid.nx / 2, grid.ny / 2)?;
    let (ib_h, jv_h) = functionals(kind, target, &half, steps)?;
    let (ib, jv) = functionals(kind, target, grid, steps)?;
    let quadrature = vec![
        QuadraturePass { nx: half.nx, ny: half.ny, bias_functional: ib_h, variance_functional: jv_h },
        QuadraturePass { nx: grid.nx, ny: grid.ny, bias_functional: ib, variance_functional: jv },
    ];
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    if rel(ib_h, ib) > QUADRATURE_RTOL || rel(jv_h, jv) > QUADRATURE_RTOL {
        return Err(Error::numeric(format!(
            "quadrature for {kind} on target {} did not converge: {quadrature:?}",
            target.name
        )));
    }
    let (variance_constant, bias_weight, amise_constant, rate_exponent) = match kind {
        EstimatorKind::F1 => (gamma_interior_constant(), 2.0, 3.0 / 2f64.powf(2.0 / 3.0), 1.0 / 6.0),
        EstimatorKind::F2 => (gamma_interior_constant(), 0.5, 3.0 / 2f64.powf(4.0 / 3.0), 1.0 / 6.0),
        EstimatorKind::F3 => (ng_interior_constant(), 2.0, 3.0 / 2f64.powf(2.0 / 3.0), 1.0 / 3.0),
        EstimatorKind::F4 => (ng_interior_constant(), 0.5, 3.0 / 2f64.powf(4.0 / 3.0), 1.0 / 3.0),
        EstimatorKind::F5 => unreachable!(),
    };
    let mut report = AmiseReport {
        kind,
        target: target.name.clone(),
        bias_functional: ib,
        variance_functional: jv,
        variance_constant,
        bias_weight,
        amise_constant,
        rate_exponent,
        n_ref,
        s0_at_ref: 0.0,
        amise_at_ref: 0.0,
        quadrature,
    };
    report.s0_at_ref = report.s0_opt(n_ref as f64);
    report.amise_at_ref = report.amise_opt(n_ref as f64);
    Ok(report)
}
