//! Univariate and bivariate kernels: the Gaussian classical kernel, the two
//! classes of gamma associated kernels, and the normal-gamma (NG) kernel.
//!
//! Gamma-type densities are evaluated in log space through `ln_gamma` and
//! exponentiated last. Shapes of order `x2 / b^2` routinely reach 1e3..1e6,
//! where a direct `Gamma(shape)` overflows.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::Obs2;

/// `1 / sqrt(2 pi)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density, the classical kernel `K`.
#[inline]
pub fn gaussian_kernel(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}

/// `(k2, k3)` for the Gaussian kernel: the second moment `int t^2 K` and the
/// roughness `int K^2`.
pub fn gaussian_constants() -> (f64, f64) {
    (1.0, 0.5 / PI.sqrt())
}

fn check_x2(x2: f64) -> Result<()> {
    if x2 < 0.0 || x2.is_nan() {
        return Err(Error::invalid(format!("x2 must be nonnegative, got {x2}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Shape of the first-class gamma kernel: `x2 / b^2 + 1`.
pub fn gamma1_shape(x2: f64, b: f64) -> Result<f64> {
    check_x2(x2)?;
    check_positive("b", b)?;
    Ok(x2 / (b * b) + 1.0)
}

/// Shape `rho_{b^2}(x2)` of the second-class gamma kernel.
///
/// `x2 / b^2` above the knot `2 b^2`, `(x2 / b^2)^2 / 4 + 1` below it. Both
/// branches equal 2 at the knot.
pub fn gamma2_shape(x2: f64, b: f64) -> Result<f64> {
    check_x2(x2)?;
    check_positive("b", b)?;
    let b2 = b * b;
    let r = x2 / b2;
    if x2 >= 2.0 * b2 {
        Ok(r)
    } else {
        Ok(0.25 * r * r + 1.0)
    }
}

/// Shape `alpha_{b2}(x2)` of the modified NG kernel: `x2 / b2` above the knot
/// `3 b2`, `(x2 / b2)^2 / 9 + 2` below it.
pub fn ng_alpha_shape(x2: f64, b2: f64) -> Result<f64> {
    check_x2(x2)?;
    check_positive("b2", b2)?;
    let r = x2 / b2;
    if x2 >= 3.0 * b2 {
        Ok(r)
    } else {
        Ok(r * r / 9.0 + 2.0)
    }
}

/// Log density of gamma(shape, scale) at `t`.
///
/// At `t = 0` the result is `-inf` for shape > 1, `-ln(scale)` for shape = 1
/// and `+inf` for shape < 1.
pub fn gamma_pdf_log(shape: f64, scale: f64, t: f64) -> Result<f64> {
    check_positive("shape", shape)?;
    check_positive("scale", scale)?;
    if t < 0.0 || t.is_nan() {
        return Err(Error::invalid(format!("gamma density argument must be nonnegative, got {t}")));
    }
    Ok(gamma_pdf_log_unchecked(shape, scale, t))
}

#[inline]
pub(crate) fn gamma_pdf_log_unchecked(shape: f64, scale: f64, t: f64) -> f64 {
    gamma_pdf_log_with(shape, scale, ln_gamma(shape) + shape * scale.ln(), t)
}

/// Same as [`gamma_pdf_log`] with `ln Gamma(shape) + shape ln(scale)` supplied
/// by the caller, so it can be hoisted out of loops over `t`.
#[inline]
pub(crate) fn gamma_pdf_log_with(shape: f64, scale: f64, log_norm: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if shape > 1.0 {
            f64::NEG_INFINITY
        } else if shape == 1.0 {
            -scale.ln()
        } else {
            f64::INFINITY
        };
    }
    (shape - 1.0) * t.ln() - t / scale - log_norm
}

/// Shape/scale pair of a gamma associated kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaKernelParams {
    pub shape: f64,
    pub scale: f64,
}

impl GammaKernelParams {
    /// First class: `gamma(x2 / b^2 + 1, b^2)`.
    pub fn class1(x2: f64, b: f64) -> Result<Self> {
        Ok(Self { shape: gamma1_shape(x2, b)?, scale: b * b })
    }

    /// Second class: `gamma(rho_{b^2}(x2), b^2)`.
    pub fn class2(x2: f64, b: f64) -> Result<Self> {
        Ok(Self { shape: gamma2_shape(x2, b)?, scale: b * b })
    }

    pub fn log_pdf(&self, t: f64) -> Result<f64> {
        gamma_pdf_log(self.shape, self.scale, t)
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        Ok(self.log_pdf(t)?.exp())
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }
}

/// Parameters `(mu, lambda, alpha, beta)` of the normal-gamma density
/// `N(t1 | mu, (lambda t2)^-1) Ga(t2 | alpha, beta)`, with `beta` a rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NgTheta {
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl NgTheta {
    pub fn new(mu: f64, lambda: f64, alpha: f64, beta: f64) -> Result<Self> {
        let theta = Self { mu, lambda, alpha, beta };
        theta.validate()?;
        Ok(theta)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::invalid(format!("mu must be finite, got {}", self.mu)));
        }
        check_positive("lambda", self.lambda)?;
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)
    }
}

/// Result of an NG density evaluation that may have hit the `t2 = 0` edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgDensity {
    pub density: f64,
    /// Set when `t2 = 0` and `alpha <= 1/2`: the true density is not
    /// finite-and-zero there, and 0 was returned by convention.
    pub singular: bool,
}

/// NG density at `(t1, t2)`. Zero on `t2 = 0`.
pub fn ng_pdf(theta: &NgTheta, t1: f64, t2: f64) -> Result<f64> {
    Ok(ng_pdf_flagged(theta, t1, t2)?.density)
}

/// [`ng_pdf`] with the `t2 = 0, alpha <= 1/2` edge case reported.
pub fn ng_pdf_flagged(theta: &NgTheta, t1: f64, t2: f64) -> Result<NgDensity> {
    theta.validate()?;
    check_x2(t2)?;
    if !t1.is_finite() {
        return Err(Error::invalid(format!("t1 must be finite, got {t1}")));
    }
    if t2 == 0.0 {
        return Ok(NgDensity { density: 0.0, singular: theta.alpha <= 0.5 });
    }
    let prec = theta.lambda * t2;
    let d = t1 - theta.mu;
    let log_normal = 0.5 * (prec / (2.0 * PI)).ln() - 0.5 * d * d * prec;
    let log_gamma = gamma_pdf_log_unchecked(theta.alpha, 1.0 / theta.beta, t2);
    Ok(NgDensity { density: (log_normal + log_gamma).exp(), singular: false })
}

fn check_ng_bandwidths(x: Obs2, b1: f64, b2: f64) -> Result<()> {
    check_x2(x.x2)?;
    if !x.x1.is_finite() {
        return Err(Error::invalid(format!("x1 must be finite, got {}", x.x1)));
    }
    check_positive("b1", b1)?;
    check_positive("b2", b2)
}

/// `lambda = 1 / ((|x1| b1 + b1^2)(x2 + b2))`, shared by both NG parameterizations.
#[inline]
pub(crate) fn ng_lambda(x: Obs2, b1: f64, b2: f64) -> f64 {
    1.0 / ((x.x1.abs() * b1 + b1 * b1) * (x.x2 + b2))
}

/// NG kernel parameters anchored at `x`: `(x1, lambda, x2 / b2 + 2, 1 / b2)`.
pub fn make_theta1(x: Obs2, b1: f64, b2: f64) -> Result<NgTheta> {
    check_ng_bandwidths(x, b1, b2)?;
    Ok(NgTheta { mu: x.x1, lambda: ng_lambda(x, b1, b2), alpha: x.x2 / b2 + 2.0, beta: 1.0 / b2 })
}

/// As [`make_theta1`] with the shape replaced by [`ng_alpha_shape`].
pub fn make_theta2(x: Obs2, b1: f64, b2: f64) -> Result<NgTheta> {
    check_ng_bandwidths(x, b1, b2)?;
    Ok(NgTheta { mu: x.x1, lambda: ng_lambda(x, b1, b2), alpha: ng_alpha_shape(x.x2, b2)?, beta: 1.0 / b2 })
}
