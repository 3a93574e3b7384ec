//! Turning p-values into betting scores.
//!
//! The calibrator used throughout is `S = 1/sqrt(p) - 1`. When `p` is
//! uniform under the null its expectation is exactly 1, so composing it
//! with a test's p-value function gives a legitimate bet, and therefore an
//! implied alternative with heavier tails than the null.

use serde::{Deserialize, Serialize};

use crate::bet::{Bet, ContinuousAlternative, ImpliedAlternative, Payoff};
use crate::dist::{DistributionModel, NormalModel, Outcome};
use crate::error::{domain, numeric, Error, Result};
use crate::special::std_normal_sf;

/// Largest null expectation accepted for a calibrated bet.
pub const CALIBRATED_EXPECTATION_LIMIT: f64 = 1.0 + 1e-3;

/// Shrinks a p-value to a betting score: `1/sqrt(p) - 1`.
pub fn shrink_pvalue(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!("p-value must lie in (0, 1], got {p}")));
    }
    Ok(1.0 / p.sqrt() - 1.0)
}

/// The significance levels tabulated when comparing the two scales.
pub const TABLE_PVALUES: [f64; 6] = [0.10, 0.05, 0.01, 0.005, 0.001, 0.000_001];

/// One row of the p-value / betting-score comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub p_value: f64,
    pub inverse: f64,
    pub betting_score: f64,
}

pub fn calibration_table(p_values: &[f64]) -> Result<Vec<CalibrationRow>> {
    p_values
        .iter()
        .map(|&p| {
            Ok(CalibrationRow {
                p_value: p,
                inverse: 1.0 / p,
                betting_score: shrink_pvalue(p)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    Upper,
    TwoSided,
}

/// The p-value function of a test statistic with a known null distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueFunction {
    pub statistic_model: DistributionModel,
    pub sidedness: Sidedness,
    /// Center of a two-sided test; ignored for upper-tailed ones.
    pub center: f64,
}

impl PValueFunction {
    /// `p(y) = P(T >= y)`.
    pub fn upper(statistic_model: DistributionModel) -> Self {
        Self {
            statistic_model,
            sidedness: Sidedness::Upper,
            center: 0.0,
        }
    }

    /// `p(y) = 2 (1 - Phi(|y - center| / sd))` for a normal statistic.
    pub fn two_sided(statistic_model: NormalModel, center: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(domain(format!("two-sided center must be finite, got {center}")));
        }
        Ok(Self {
            statistic_model: statistic_model.into(),
            sidedness: Sidedness::TwoSided,
            center,
        })
    }

    pub fn pvalue(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(domain("p-value at NaN"));
        }
        match self.sidedness {
            Sidedness::Upper => self.statistic_model.upper_tail(y),
            Sidedness::TwoSided => match &self.statistic_model {
                DistributionModel::Normal(n) => {
                    let z = (y - self.center).abs() / n.sd();
                    Ok((2.0 * std_normal_sf(z)).min(1.0))
                }
                other => Err(Error::Unsupported(format!(
                    "two-sided p-values need a normal statistic, got {other}"
                ))),
            },
        }
    }

    /// Calibrated score `1/sqrt(p(y)) - 1` for an observed statistic.
    pub fn calibrated_score(&self, y: f64) -> Result<f64> {
        shrink_pvalue(self.pvalue(y)?)
    }
}

/// The bet `y -> 1/sqrt(p(y)) - 1` against the statistic's null model.
///
/// Its null expectation is checked numerically and must not exceed
/// [`CALIBRATED_EXPECTATION_LIMIT`]; it is exactly 1 when the p-value is
/// uniform and less when it is stochastically larger.
pub fn calibrated_bet(f: &PValueFunction) -> Result<Bet> {
    if let (Sidedness::TwoSided, m) = (f.sidedness, &f.statistic_model) {
        if !matches!(m, DistributionModel::Normal(_)) {
            return Err(Error::Unsupported(format!(
                "two-sided p-values need a normal statistic, got {m}"
            )));
        }
    }
    let func = f.clone();
    let mut payoff = Payoff::new(move |y| match y.as_real().map(|v| func.pvalue(v)) {
        Some(Ok(p)) if p > 0.0 => 1.0 / p.sqrt() - 1.0,
        Some(Ok(_)) => f64::INFINITY,
        _ => f64::NAN,
    });
    if f.sidedness == Sidedness::TwoSided {
        payoff = payoff.with_breakpoints(vec![f.center]);
    }
    Bet::with_expectation_at_most(payoff, f.statistic_model.clone(), CALIBRATED_EXPECTATION_LIMIT)
        .map_err(|e| match e {
            Error::InvalidBet(msg) => Error::Calibration(msg),
            other => other,
        })
}

/// The calibrated bet's implied alternative for a continuous statistic.
pub fn calibrated_alternative(f: &PValueFunction) -> Result<ContinuousAlternative> {
    match calibrated_bet(f)?.implied_alternative()? {
        ImpliedAlternative::Continuous(q) => Ok(q),
        ImpliedAlternative::Discrete(_) => Err(Error::Unsupported(
            "calibrated alternative of a discrete statistic".into(),
        )),
    }
}

/// `Q(|Y - center| >= deviation)` under the calibrated alternative of a
/// two-sided normal test.
pub fn calibrated_alternative_tail(f: &PValueFunction, deviation: f64) -> Result<f64> {
    if f.sidedness != Sidedness::TwoSided {
        return Err(Error::Unsupported(
            "calibrated alternative tails are defined for two-sided tests".into(),
        ));
    }
    if !(deviation >= 0.0) {
        return Err(domain(format!("deviation must be nonnegative, got {deviation}")));
    }
    let q = calibrated_alternative(f)?;
    let center = f.center;
    let tail = q.probability(
        |y| (y - center).abs() >= deviation,
        &[center - deviation, center + deviation],
    )?;
    if !tail.is_finite() {
        return Err(numeric("calibrated alternative tail is not finite"));
    }
    Ok(tail)
}

/// Normal approximation to the frequency of successes in `trials`
/// Bernoulli(`probability`) trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyApproximation {
    pub trials: u64,
    pub probability: f64,
}

impl FrequencyApproximation {
    pub fn new(trials: u64, probability: f64) -> Result<Self> {
        if trials == 0 || !(probability > 0.0 && probability < 1.0) {
            return Err(domain(format!(
                "need trials > 0 and 0 < probability < 1, got {trials}, {probability}"
            )));
        }
        Ok(Self {
            trials,
            probability,
        })
    }

    pub fn expected_count(&self) -> f64 {
        self.trials as f64 * self.probability
    }

    /// Standard error of the success count.
    pub fn count_standard_error(&self) -> f64 {
        (self.trials as f64 * self.probability * (1.0 - self.probability)).sqrt()
    }

    /// Standard deviation of the success frequency.
    pub fn frequency_sd(&self) -> f64 {
        (self.probability * (1.0 - self.probability) / self.trials as f64).sqrt()
    }

    pub fn frequency(&self, count: u64) -> f64 {
        count as f64 / self.trials as f64
    }

    /// How many standard errors `count` lies from its expectation.
    pub fn deviation_in_standard_errors(&self, count: u64) -> f64 {
        (count as f64 - self.expected_count()) / self.count_standard_error()
    }

    pub fn frequency_model(&self) -> NormalModel {
        NormalModel::new(self.probability, self.frequency_sd()).expect("validated parameters")
    }
}

/// Calibrated betting score for a two-sided p-value evaluated at `outcome`.
pub fn calibrated_score_at(f: &PValueFunction, outcome: &Outcome) -> Result<f64> {
    let y = outcome
        .as_real()
        .ok_or_else(|| domain(format!("p-value of label {outcome}")))?;
    f.calibrated_score(y)
}
