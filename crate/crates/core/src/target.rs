//! Product-form target densities: a mixture on the real line for `x1` times a
//! mixture on `[0, inf)` for `x2`, with closed-form pdf/cdf and seeded samplers.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::grid::Box2;
use crate::kernel::{gamma_pdf_log_unchecked, INV_SQRT_2PI};
use crate::Obs2;

/// Standard normal cdf.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Normal,
    Cauchy,
    Logistic,
    HalfNormal,
    Gamma,
    Exponential,
    /// Normal(location, scale) conditioned on being nonnegative.
    TruncatedNormalAtZero,
}

impl Family {
    /// Whether the family lives on `[0, inf)` (the `x2` margin) rather than
    /// the whole real line (the `x1` margin).
    pub fn is_nonnegative(self) -> bool {
        matches!(self, Family::HalfNormal | Family::Gamma | Family::Exponential | Family::TruncatedNormalAtZero)
    }
}

fn one() -> f64 {
    1.0
}

/// One weighted component of a margin mixture.
///
/// `scale` is the printed scale parameter: the standard deviation for
/// Normal and TruncatedNormalAtZero, the Cauchy and logistic scale, the sd of
/// the underlying normal for HalfNormal and the gamma scale. `shape` is used
/// by Gamma only and `rate` by Exponential only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginComponent {
    pub family: Family,
    #[serde(default)]
    pub location: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default = "one")]
    pub weight: f64,
}

impl MarginComponent {
    fn base(family: Family, location: f64, scale: f64, weight: f64) -> Self {
        Self { family, location, scale, shape: None, rate: None, weight }
    }

    pub fn normal(location: f64, scale: f64, weight: f64) -> Self {
        Self::base(Family::Normal, location, scale, weight)
    }

    pub fn cauchy(location: f64, scale: f64, weight: f64) -> Self {
        Self::base(Family::Cauchy, location, scale, weight)
    }

    pub fn logistic(location: f64, scale: f64, weight: f64) -> Self {
        Self::base(Family::Logistic, location, scale, weight)
    }

    pub fn half_normal(scale: f64, weight: f64) -> Self {
        Self::base(Family::HalfNormal, 0.0, scale, weight)
    }

    pub fn gamma(shape: f64, scale: f64, weight: f64) -> Self {
        Self { shape: Some(shape), ..Self::base(Family::Gamma, 0.0, scale, weight) }
    }

    pub fn exponential(rate: f64, weight: f64) -> Self {
        Self { rate: Some(rate), ..Self::base(Family::Exponential, 0.0, 1.0, weight) }
    }

    pub fn truncated_normal(location: f64, scale: f64, weight: f64) -> Self {
        Self::base(Family::TruncatedNormalAtZero, location, scale, weight)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::invalid(format!("{:?} component: {what}", self.family)));
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad("scale must be positive");
        }
        if !self.location.is_finite() {
            return bad("location must be finite");
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return bad("weight must lie in [0, 1]");
        }
        match self.family {
            Family::Gamma if !self.shape.is_some_and(|s| s > 0.0 && s.is_finite()) => {
                bad("gamma needs a positive shape")
            }
            Family::Exponential if !self.rate.is_some_and(|r| r > 0.0 && r.is_finite()) => {
                bad("exponential needs a positive rate")
            }
            _ => Ok(()),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (l, s) = (self.location, self.scale);
        match self.family {
            Family::Normal => INV_SQRT_2PI * (-0.5 * ((x - l) / s).powi(2)).exp() / s,
            Family::Cauchy => {
                let z = (x - l) / s;
                1.0 / (PI * s * (1.0 + z * z))
            }
            Family::Logistic => {
                let e = (-((x - l) / s).abs()).exp();
                e / (s * (1.0 + e) * (1.0 + e))
            }
            _ if x < 0.0 => 0.0,
            Family::HalfNormal => 2.0 * INV_SQRT_2PI * (-0.5 * (x / s).powi(2)).exp() / s,
            Family::Gamma => gamma_pdf_log_unchecked(self.shape.unwrap_or(1.0), s, x).exp(),
            Family::Exponential => {
                let r = self.rate.unwrap_or(1.0);
                r * (-r * x).exp()
            }
            Family::TruncatedNormalAtZero => {
                let z = (x - l) / s;
                INV_SQRT_2PI * (-0.5 * z * z).exp() / (s * (1.0 - std_normal_cdf(-l / s)))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (l, s) = (self.location, self.scale);
        match self.family {
            Family::Normal => std_normal_cdf((x - l) / s),
            Family::Cauchy => 0.5 + ((x - l) / s).atan() / PI,
            Family::Logistic => 1.0 / (1.0 + (-(x - l) / s).exp()),
            _ if x <= 0.0 => 0.0,
            Family::HalfNormal => 2.0 * std_normal_cdf(x / s) - 1.0,
            Family::Gamma => {
                if x.is_infinite() {
                    1.0
                } else {
                    gamma_lr(self.shape.unwrap_or(1.0), x / s)
                }
            }
            Family::Exponential => 1.0 - (-self.rate.unwrap_or(1.0) * x).exp(),
            Family::TruncatedNormalAtZero => {
                let lo = std_normal_cdf(-l / s);
                (std_normal_cdf((x - l) / s) - lo) / (1.0 - lo)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (l, s) = (self.location, self.scale);
        match self.family {
            Family::Normal => {
                let z: f64 = StandardNormal.sample(rng);
                l + s * z
            }
            Family::Cauchy => {
                let u: f64 = rng.random();
                l + s * (PI * (u - 0.5)).tan()
            }
            Family::Logistic => {
                let u: f64 = open01(rng);
                l + s * (u / (1.0 - u)).ln()
            }
            Family::HalfNormal => {
                let z: f64 = StandardNormal.sample(rng);
                (s * z).abs()
            }
            Family::Gamma => Gamma::new(self.shape.unwrap_or(1.0), s).expect("validated gamma parameters").sample(rng),
            Family::Exponential => Exp::new(self.rate.unwrap_or(1.0)).expect("validated rate").sample(rng),
            Family::TruncatedNormalAtZero => loop {
                let z: f64 = StandardNormal.sample(rng);
                let v = l + s * z;
                if v >= 0.0 {
                    break v;
                }
            },
        }
    }
}

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// A finite mixture on one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mixture(pub Vec<MarginComponent>);

impl Mixture {
    pub fn components(&self) -> &[MarginComponent] {
        &self.0
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.0.iter().map(|c| c.weight * c.pdf(x)).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.0.iter().map(|c| c.weight * c.cdf(x)).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for c in &self.0 {
            acc += c.weight;
            if u < acc {
                return c.sample(rng);
            }
        }
        self.0.last().expect("nonempty mixture").sample(rng)
    }

    fn validate(&self, nonnegative_axis: bool, axis: &str) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::invalid(format!("{axis} margin has no components")));
        }
        for c in &self.0 {
            c.validate()?;
            if c.family.is_nonnegative() != nonnegative_axis {
                return Err(Error::invalid(format!("{:?} is not allowed on the {axis} margin", c.family)));
            }
        }
        let total: f64 = self.0.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("{axis} margin weights sum to {total}, expected 1")));
        }
        Ok(())
    }
}

/// Product-form bivariate density `margin_x1(x1) * margin_x2(x2)` plus the
/// box used for ISE and theory quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub name: String,
    pub margin_x1: Mixture,
    pub margin_x2: Mixture,
    pub integration_box: Box2,
}

impl TargetSpec {
    pub fn new(name: impl Into<String>, margin_x1: Mixture, margin_x2: Mixture, integration_box: Box2) -> Result<Self> {
        let spec = Self { name: name.into(), margin_x1, margin_x2, integration_box };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.margin_x1.validate(false, "x1")?;
        self.margin_x2.validate(true, "x2")?;
        self.integration_box.validate()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: TargetSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Density without the `x2 >= 0` check; zero for `x2 < 0`.
    #[inline]
    pub fn pdf(&self, x: Obs2) -> f64 {
        self.margin_x1.pdf(x.x1) * self.margin_x2.pdf(x.x2)
    }

    /// Exact probability mass inside the integration box.
    pub fn box_mass(&self) -> f64 {
        let b = &self.integration_box;
        (self.margin_x1.cdf(b.x1_hi) - self.margin_x1.cdf(b.x1_lo))
            * (self.margin_x2.cdf(b.x2_hi) - self.margin_x2.cdf(b.x2_lo))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Obs2> {
        (0..n)
            .map(|_| {
                let x1 = self.margin_x1.sample(rng);
                let x2 = self.margin_x2.sample(rng);
                Obs2::new(x1, x2)
            })
            .collect()
    }
}

/// Identifiers accepted by [`builtin_target`].
pub const BUILTIN_IDS: [&str; 4] = ["f1", "f2", "f3", "f4"];

/// The four benchmark targets.
///
/// | id | `x1` margin | `x2` margin |
/// |----|-------------|-------------|
/// | f1 | C(0,1) | HN(2) |
/// | f2 | .2 N(-3,1) + .6 C(0,1) + .2 N(3,1) | Ga(shape 3, scale 1) |
/// | f3 | .4 N(-3,3) + .2 C(0,1) + .4 N(3,3) | Exp(rate 1) |
/// | f4 | .5 LG(-1,.5) + .5 LG(1.5,.7) | .6 TN(0,.5) + .4 TN(1.3,.25) |
pub fn builtin_target(id: &str) -> Result<TargetSpec> {
    use MarginComponent as C;
    let (m1, m2, bounds) = match id {
        "f1" => (vec![C::cauchy(0.0, 1.0, 1.0)], vec![C::half_normal(2.0, 1.0)], Box2::new(-20.0, 20.0, 0.0, 10.0)?),
        "f2" => (
            vec![C::normal(-3.0, 1.0, 0.2), C::cauchy(0.0, 1.0, 0.6), C::normal(3.0, 1.0, 0.2)],
            vec![C::gamma(3.0, 1.0, 1.0)],
            Box2::new(-10.0, 10.0, 0.0, 15.0)?,
        ),
        "f3" => (
            vec![C::normal(-3.0, 3.0, 0.4), C::cauchy(0.0, 1.0, 0.2), C::normal(3.0, 3.0, 0.4)],
            vec![C::exponential(1.0, 1.0)],
            Box2::new(-12.0, 12.0, 0.0, 10.0)?,
        ),
        "f4" => (
            vec![C::logistic(-1.0, 0.5, 0.5), C::logistic(1.5, 0.7, 0.5)],
            vec![C::truncated_normal(0.0, 0.5, 0.6), C::truncated_normal(1.3, 0.25, 0.4)],
            Box2::new(-8.0, 10.0, 0.0, 3.0)?,
        ),
        other => return Err(Error::invalid(format!("unknown target id {other:?}; expected one of f1..f4"))),
    };
    TargetSpec::new(id, Mixture(m1), Mixture(m2), bounds)
}

/// Target density at `x`; rejects `x2 < 0`.
pub fn target_pdf(spec: &TargetSpec, x: Obs2) -> Result<f64> {
    if x.x2 < 0.0 || x.x2.is_nan() {
        return Err(Error::invalid(format!("x2 must be nonnegative, got {}", x.x2)));
    }
    Ok(spec.pdf(x))
}

/// `n` iid draws from `spec` using a ChaCha8 stream seeded with `seed`.
pub fn target_sample(spec: &TargetSpec, seed: u64, n: usize) -> Result<Vec<Obs2>> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(spec.sample(&mut rng, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_match_definitions() {
        let f1 = builtin_target("f1").unwrap();
        assert_eq!(f1.margin_x1.components().len(), 1);
        assert_eq!(f1.margin_x1.components()[0].family, Family::Cauchy);
        assert_eq!(f1.margin_x2.components()[0].family, Family::HalfNormal);
        let f4 = builtin_target("f4").unwrap();
        let w: Vec<f64> = f4.margin_x2.components().iter().map(|c| c.weight).collect();
        assert_eq!(w, vec![0.6, 0.4]);
        for id in BUILTIN_IDS {
            let t = builtin_target(id).unwrap();
            for m in [&t.margin_x1, &t.margin_x2] {
                let s: f64 = m.components().iter().map(|c| c.weight).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        assert!(builtin_target("f9").is_err());
    }

    #[test]
    fn pdf_values() {
        let f1 = builtin_target("f1").unwrap();
        // Cauchy(0,1) at 0 times HalfNormal(2) at 0, 30 digits: 0.126987271868481939...
        let v = target_pdf(&f1, Obs2::new(0.0, 0.0)).unwrap();
        assert!((v - 0.126_987_271_868_481_94).abs() < 1e-15, "{v}");
        assert!(target_pdf(&f1, Obs2::new(0.0, -0.1)).is_err());

        let f2 = builtin_target("f2").unwrap();
        assert_eq!(target_pdf(&f2, Obs2::new(1.7, 0.0)).unwrap(), 0.0);

        let f3 = builtin_target("f3").unwrap();
        for &(a, b) in &[(0.5, 0.2), (2.7, 1.1), (7.0, 3.0)] {
            let r = target_pdf(&f3, Obs2::new(a, b)).unwrap() / target_pdf(&f3, Obs2::new(-a, b)).unwrap();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn truncated_normal_normalizes() {
        let c = MarginComponent::truncated_normal(1.3, 0.25, 1.0);
        let m = 200_000;
        let h = 5.0 / m as f64;
        let s: f64 = (0..m).map(|i| c.pdf((i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((s - 1.0).abs() < 1e-9);
        assert!((c.cdf(f64::INFINITY) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_nonnegative() {
        for id in BUILTIN_IDS {
            let t = builtin_target(id).unwrap();
            let a = target_sample(&t, 99, 500).unwrap();
            let b = target_sample(&t, 99, 500).unwrap();
            assert_eq!(a, b);
            assert!(a.iter().all(|o| o.x2 >= 0.0));
        }
        assert!(target_sample(&builtin_target("f1").unwrap(), 1, 0).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = builtin_target("f4").unwrap();
        let back = TargetSpec::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(t, back);
        let mut bad = t.clone();
        bad.margin_x2.0[0].weight = 0.5;
        assert!(bad.validate().is_err());
        let mut wrong_axis = t;
        wrong_axis.margin_x1.0[0].family = Family::Exponential;
        wrong_axis.margin_x1.0[0].rate = Some(1.0);
        assert!(wrong_axis.validate().is_err());
    }
}
