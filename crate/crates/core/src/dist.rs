//! Null and alternative hypotheses: discrete tables, normal and chi-squared
//! models, with densities, tail probabilities and expectations.

use std::fmt;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::special::{bisect, gamma_q, ln_gamma, std_normal_sf, FRAC_1_SQRT_2PI};

/// Half-width, in standard deviations, of the window over which normal
/// expectations are integrated.
pub const NORMAL_WINDOW_SDS: f64 = 12.0;

/// Number of grid points used to check a payoff's sign on a continuous support.
pub const SIGN_CHECK_POINTS: usize = 10_001;

const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// A value of the phenomenon: either a real number or a categorical label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Real(f64),
    Label(String),
}

impl Outcome {
    /// Parses `s` as a real if it looks like one, otherwise keeps it as a label.
    pub fn parse(s: &str) -> Outcome {
        let trimmed = s.trim();
        match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => Outcome::Real(v),
            _ => Outcome::Label(trimmed.to_string()),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Outcome::Real(v) => Some(*v),
            Outcome::Label(_) => None,
        }
    }
}

impl From<f64> for Outcome {
    fn from(v: f64) -> Self {
        Outcome::Real(v)
    }
}

impl From<&str> for Outcome {
    fn from(s: &str) -> Self {
        Outcome::Label(s.to_string())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Real(v) => write!(f, "{v}"),
            Outcome::Label(s) => f.write_str(s),
        }
    }
}

/// A finite probability table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    outcomes: Vec<Outcome>,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(outcomes: Vec<Outcome>, probabilities: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if outcomes.len() != probabilities.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probabilities.len()
            )));
        }
        for (o, &p) in outcomes.iter().zip(&probabilities) {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "probability of {o} is {p}"
                )));
            }
            if let Outcome::Real(v) = o {
                if !v.is_finite() {
                    return Err(Error::InvalidDistribution(format!("outcome {v} is not finite")));
                }
            }
        }
        for (i, o) in outcomes.iter().enumerate() {
            if outcomes[..i].contains(o) {
                return Err(Error::InvalidDistribution(format!("duplicate outcome {o}")));
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            outcomes,
            probabilities,
        })
    }

    /// Convenience constructor from `(outcome, probability)` pairs.
    pub fn from_pairs<O: Into<Outcome>>(pairs: impl IntoIterator<Item = (O, f64)>) -> Result<Self> {
        let (outcomes, probabilities) = pairs.into_iter().map(|(o, p)| (o.into(), p)).unzip();
        Self::new(outcomes, probabilities)
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, f64)> {
        self.outcomes.iter().zip(self.probabilities.iter().copied())
    }

    pub fn index_of(&self, y: &Outcome) -> Option<usize> {
        self.outcomes.iter().position(|o| o == y)
    }

    pub fn mass(&self, y: &Outcome) -> Result<f64> {
        self.index_of(y)
            .map(|i| self.probabilities[i])
            .ok_or_else(|| domain(format!("unknown outcome {y}")))
    }

    /// Mass at `y`, or 0 when `y` is not listed.
    pub fn mass_or_zero(&self, y: &Outcome) -> f64 {
        self.index_of(y).map_or(0.0, |i| self.probabilities[i])
    }

    pub fn is_numeric(&self) -> bool {
        self.outcomes.iter().all(|o| o.as_real().is_some())
    }
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            outcomes: Vec<Outcome>,
            probabilities: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        DiscreteDistribution::new(raw.outcomes, raw.probabilities).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalModel {
    mean: f64,
    sd: f64,
}

impl NormalModel {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "normal needs finite mean and sd > 0, got mean {mean}, sd {sd}"
            )));
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let z = (y - self.mean) / self.sd;
        FRAC_1_SQRT_2PI / self.sd * (-0.5 * z * z).exp()
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let z = (y - self.mean) / self.sd;
        FRAC_1_SQRT_2PI.ln() - self.sd.ln() - 0.5 * z * z
    }

    pub fn sf(&self, t: f64) -> f64 {
        std_normal_sf((t - self.mean) / self.sd)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        std_normal_sf((self.mean - t) / self.sd)
    }

    pub fn window(&self) -> (f64, f64) {
        (
            self.mean - NORMAL_WINDOW_SDS * self.sd,
            self.mean + NORMAL_WINDOW_SDS * self.sd,
        )
    }
}

impl<'de> Deserialize<'de> for NormalModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            mean: f64,
            sd: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        NormalModel::new(raw.mean, raw.sd).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquaredModel {
    degrees_of_freedom: u32,
}

impl ChiSquaredModel {
    pub fn new(degrees_of_freedom: u32) -> Result<Self> {
        if degrees_of_freedom == 0 {
            return Err(Error::InvalidDistribution(
                "chi-squared needs at least one degree of freedom".into(),
            ));
        }
        Ok(Self { degrees_of_freedom })
    }

    pub fn degrees_of_freedom(&self) -> u32 {
        self.degrees_of_freedom
    }

    fn half_df(&self) -> f64 {
        0.5 * self.degrees_of_freedom as f64
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let k = self.half_df();
        if y < 0.0 {
            return f64::NEG_INFINITY;
        }
        if y == 0.0 {
            return match self.degrees_of_freedom {
                1 => f64::INFINITY,
                2 => 0.5f64.ln(),
                _ => f64::NEG_INFINITY,
            };
        }
        (k - 1.0) * y.ln() - 0.5 * y - k * std::f64::consts::LN_2 - ln_gamma(k)
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    pub fn sf(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(1.0);
        }
        gamma_q(self.half_df(), 0.5 * t)
    }

    /// Upper end of the integration window, `df + 40 sqrt(df)`.
    pub fn window_upper(&self) -> f64 {
        let df = self.degrees_of_freedom as f64;
        df + 40.0 * df.sqrt()
    }
}

impl<'de> Deserialize<'de> for ChiSquaredModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            degrees_of_freedom: u32,
        }
        let raw = Raw::deserialize(deserializer)?;
        ChiSquaredModel::new(raw.degrees_of_freedom).map_err(serde::de::Error::custom)
    }
}

/// A hypothesized probability distribution for a single outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionModel {
    Discrete(DiscreteDistribution),
    Normal(NormalModel),
    ChiSquared(ChiSquaredModel),
}

impl From<DiscreteDistribution> for DistributionModel {
    fn from(d: DiscreteDistribution) -> Self {
        DistributionModel::Discrete(d)
    }
}

impl From<NormalModel> for DistributionModel {
    fn from(d: NormalModel) -> Self {
        DistributionModel::Normal(d)
    }
}

impl From<ChiSquaredModel> for DistributionModel {
    fn from(d: ChiSquaredModel) -> Self {
        DistributionModel::ChiSquared(d)
    }
}

impl DistributionModel {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        NormalModel::new(mean, sd).map(Self::Normal)
    }

    pub fn chi_squared(df: u32) -> Result<Self> {
        ChiSquaredModel::new(df).map(Self::ChiSquared)
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, DistributionModel::Discrete(_))
    }

    pub fn as_discrete(&self) -> Option<&DiscreteDistribution> {
        match self {
            DistributionModel::Discrete(d) => Some(d),
            _ => None,
        }
    }

    /// Checks that `y` is a possible value of the model's outcome space.
    pub fn check_outcome(&self, y: &Outcome) -> Result<()> {
        match (self, y) {
            (DistributionModel::Discrete(d), _) => d.mass(y).map(|_| ()),
            (DistributionModel::Normal(_), Outcome::Real(v)) if v.is_finite() => Ok(()),
            (DistributionModel::ChiSquared(_), Outcome::Real(v)) if v.is_finite() && *v >= 0.0 => {
                Ok(())
            }
            _ => Err(domain(format!("outcome {y} is outside the support of {self}"))),
        }
    }

    fn real_outcome(&self, y: &Outcome) -> Result<f64> {
        y.as_real()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| domain(format!("{self} needs a real outcome, got {y}")))
    }

    /// Mass (discrete) or density (continuous) at `y`.
    pub fn density(&self, y: &Outcome) -> Result<f64> {
        match self {
            DistributionModel::Discrete(d) => d.mass(y),
            DistributionModel::Normal(n) => Ok(n.pdf(self.real_outcome(y)?)),
            DistributionModel::ChiSquared(c) => Ok(c.pdf(self.real_outcome(y)?)),
        }
    }

    /// Natural log of [`density`](Self::density).
    pub fn ln_density(&self, y: &Outcome) -> Result<f64> {
        match self {
            DistributionModel::Discrete(d) => d.mass(y).map(f64::ln),
            DistributionModel::Normal(n) => Ok(n.ln_pdf(self.real_outcome(y)?)),
            DistributionModel::ChiSquared(c) => Ok(c.ln_pdf(self.real_outcome(y)?)),
        }
    }

    /// P(Y >= t).
    pub fn upper_tail(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(domain("tail probability at NaN"));
        }
        match self {
            DistributionModel::Discrete(d) => {
                let mut total = 0.0;
                for (o, p) in d.iter() {
                    let v = o.as_real().ok_or_else(|| {
                        Error::Unsupported(format!(
                            "tail probability needs numeric outcomes, found label {o}"
                        ))
                    })?;
                    if v >= t {
                        total += p;
                    }
                }
                Ok(total.min(1.0))
            }
            DistributionModel::Normal(n) => Ok(n.sf(t)),
            DistributionModel::ChiSquared(c) => c.sf(t),
        }
    }

    /// P(Y <= t).
    pub fn lower_tail(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(domain("tail probability at NaN"));
        }
        match self {
            DistributionModel::Discrete(_) => {
                let strictly_above = self.upper_tail(next_up(t))?;
                Ok((1.0 - strictly_above).max(0.0))
            }
            DistributionModel::Normal(n) => Ok(n.cdf(t)),
            DistributionModel::ChiSquared(c) => Ok(1.0 - c.sf(t)?),
        }
    }

    /// P(a <= Y <= b) for a continuous model, computed from whichever tail
    /// keeps precision.
    pub fn probability_between(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return Ok(0.0);
        }
        match self {
            DistributionModel::Discrete(d) => {
                let mut total = 0.0;
                for (o, p) in d.iter() {
                    let v = o.as_real().ok_or_else(|| {
                        Error::Unsupported(format!("interval probability needs numeric outcomes, found {o}"))
                    })?;
                    if v >= a && v <= b {
                        total += p;
                    }
                }
                Ok(total)
            }
            _ => {
                let center = self.center();
                let p = if a >= center {
                    self.upper_tail(a)? - self.upper_tail(b)?
                } else {
                    self.lower_tail(b)? - self.lower_tail(a)?
                };
                Ok(p.max(0.0))
            }
        }
    }

    fn center(&self) -> f64 {
        match self {
            DistributionModel::Discrete(_) => 0.0,
            DistributionModel::Normal(n) => n.mean,
            DistributionModel::ChiSquared(c) => c.degrees_of_freedom as f64,
        }
    }

    /// Integration window on the outcome scale, or `None` for discrete models.
    pub fn window(&self) -> Option<(f64, f64)> {
        match self {
            DistributionModel::Discrete(_) => None,
            DistributionModel::Normal(n) => Some(n.window()),
            DistributionModel::ChiSquared(c) => Some((0.0, c.window_upper())),
        }
    }

    /// Points at which a payoff's sign is checked: the discrete support, or
    /// an even grid over the window plus the given breakpoints.
    pub fn sign_check_points(&self, breakpoints: &[f64]) -> Vec<Outcome> {
        match self {
            DistributionModel::Discrete(d) => d.outcomes().to_vec(),
            _ => {
                let (lo, hi) = self.window().expect("continuous");
                let step = (hi - lo) / (SIGN_CHECK_POINTS - 1) as f64;
                (0..SIGN_CHECK_POINTS)
                    .map(|i| lo + step * i as f64)
                    .chain(breakpoints.iter().copied().filter(|b| *b >= lo && *b <= hi))
                    .map(Outcome::Real)
                    .collect()
            }
        }
    }

    /// E[f(Y)]. Exact sum for discrete models; adaptive quadrature over the
    /// model's window for continuous ones.
    pub fn expect(&self, f: impl Fn(&Outcome) -> f64) -> Result<f64> {
        self.expect_with_breakpoints(f, &[])
    }

    /// Like [`expect`](Self::expect), with known points where `f` jumps or kinks.
    pub fn expect_with_breakpoints(
        &self,
        f: impl Fn(&Outcome) -> f64,
        breakpoints: &[f64],
    ) -> Result<f64> {
        let value = match self {
            DistributionModel::Discrete(d) => d
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(o, p)| p * f(o))
                .sum(),
            DistributionModel::Normal(n) => {
                let (lo, hi) = n.window();
                integrate(
                    |y| {
                        let d = n.pdf(y);
                        if d == 0.0 {
                            0.0
                        } else {
                            d * f(&Outcome::Real(y))
                        }
                    },
                    lo,
                    hi,
                    breakpoints,
                    QuadratureOptions::default(),
                )?
                .value
            }
            DistributionModel::ChiSquared(c) => {
                // y = u^2 removes the y^(k/2 - 1) singularity at the origin
                let upper = c.window_upper().sqrt();
                let cuts: Vec<f64> = breakpoints
                    .iter()
                    .filter(|b| **b > 0.0)
                    .map(|b| b.sqrt())
                    .collect();
                let k = c.half_df();
                let log_norm = k * std::f64::consts::LN_2 + ln_gamma(k);
                integrate(
                    |u| {
                        if u <= 0.0 {
                            return 0.0;
                        }
                        let y = u * u;
                        // density(y) * dy/du = 2 u^(2k - 1) e^(-y/2) / (2^k Gamma(k))
                        let jac_density =
                            (std::f64::consts::LN_2 + (2.0 * k - 1.0) * u.ln() - 0.5 * y - log_norm)
                                .exp();
                        if jac_density == 0.0 {
                            0.0
                        } else {
                            jac_density * f(&Outcome::Real(y))
                        }
                    },
                    0.0,
                    upper,
                    &cuts,
                    QuadratureOptions::default(),
                )?
                .value
            }
        };
        if !value.is_finite() {
            return Err(Error::Numeric(format!("expectation under {self} is {value}")));
        }
        Ok(value)
    }

    /// Draws one outcome.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        match self {
            DistributionModel::Discrete(d) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (o, p) in d.iter() {
                    acc += p;
                    if u < acc {
                        return o.clone();
                    }
                }
                d.iter()
                    .filter(|(_, p)| *p > 0.0)
                    .last()
                    .map(|(o, _)| o.clone())
                    .expect("a distribution has positive mass somewhere")
            }
            DistributionModel::Normal(n) => {
                Outcome::Real(Normal::new(n.mean, n.sd).expect("validated").sample(rng))
            }
            DistributionModel::ChiSquared(c) => Outcome::Real(
                ChiSquared::new(c.degrees_of_freedom as f64)
                    .expect("validated")
                    .sample(rng),
            ),
        }
    }

    /// The t with P(Y >= t) = p, found by bisection on the tail probability.
    pub fn upper_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let (lo, hi) = match self {
            DistributionModel::Discrete(_) => {
                return Err(Error::Unsupported("quantiles of discrete models".into()))
            }
            DistributionModel::Normal(n) => (n.mean - 40.0 * n.sd, n.mean + 40.0 * n.sd),
            DistributionModel::ChiSquared(c) => (0.0, c.window_upper() * 4.0),
        };
        let target = p.ln();
        let scale = hi - lo;
        bisect(
            |t| self.upper_tail(t).map_or(f64::NAN, |q| q.ln() - target),
            lo,
            hi,
            1e-15 * scale,
        )
    }

    /// The t with P(Y <= t) = p.
    pub fn lower_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        match self {
            DistributionModel::Normal(n) => Ok(2.0 * n.mean - self.upper_quantile(p)?),
            DistributionModel::ChiSquared(c) => {
                let target = p.ln();
                let hi = c.window_upper() * 4.0;
                bisect(
                    |t| self.lower_tail(t).map_or(f64::NAN, |q| q.max(1e-300).ln() - target),
                    0.0,
                    hi,
                    1e-15 * hi,
                )
            }
            DistributionModel::Discrete(_) => {
                Err(Error::Unsupported("quantiles of discrete models".into()))
            }
        }
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionModel::Discrete(d) => {
                f.write_str("discrete{")?;
                for (i, (o, p)) in d.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{o}: {p}")?;
                }
                f.write_str("}")
            }
            DistributionModel::Normal(n) => write!(f, "normal(mean {}, sd {})", n.mean, n.sd),
            DistributionModel::ChiSquared(c) => write!(f, "chisq({})", c.degrees_of_freedom),
        }
    }
}

fn next_up(t: f64) -> f64 {
    if t.is_infinite() {
        t
    } else if t == 0.0 {
        f64::from_bits(1)
    } else if t > 0.0 {
        f64::from_bits(t.to_bits() + 1)
    } else {
        f64::from_bits(t.to_bits() - 1)
    }
}
