//! Bounded-error protocols and the Hoeffding strategy.
//!
//! Each round Reality announces an error `e` in `[-1, 1]` and Skeptic, who
//! may buy any multiple of `e` at price 0, stakes a fraction of the current
//! capital. The Hoeffding strategy keeps that fraction at `tanh(lambda)`,
//! and since `1 + e tanh(lambda) >= exp(lambda e - lambda^2 / 2)` on
//! `[-1, 1]` its capital after `n` rounds is at least
//! `exp(lambda S_n - n lambda^2 / 2)`, where `S_n` is the sum of the errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::Outcome;
use crate::error::{domain, numeric, Error, Result};
use crate::protocol::{CapitalProcess, RoundRecord};
use crate::warranty::{check_grid, Interval, WarrantyCurve};

/// The level-20 constant rounded to two decimals, as usually quoted.
pub const ROUNDED_LEVEL_20_CONSTANT: f64 = 2.72;

/// Errors this far outside `[-1, 1]` are treated as rounding and clamped
/// when they arise from `y - mu`.
const BAND_SLACK: f64 = 1e-12;

/// `c = sqrt(2 ln(2 level))`: the deviation of the error sum, in units of
/// `sqrt(n)`, at which the two-sided strategy with `lambda = c / sqrt(n)`
/// is guaranteed to reach `level`.
pub fn level_constant(level: f64) -> Result<f64> {
    if !(level >= 1.0) || level.is_infinite() {
        return Err(domain(format!("level must be a finite number >= 1, got {level}")));
    }
    Ok((2.0 * (2.0 * level).ln()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Bets that the errors run positive.
    Positive,
    /// Bets that the errors run negative.
    Negative,
    /// Half the capital each way.
    TwoSided,
}

impl Side {
    fn accounts(self) -> &'static [(f64, f64)] {
        match self {
            Side::Positive => &[(1.0, 1.0)],
            Side::Negative => &[(1.0, -1.0)],
            Side::TwoSided => &[(0.5, 1.0), (0.5, -1.0)],
        }
    }
}

/// A sub-account: initial share of the capital and signed tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Account {
    pub weight: f64,
    /// Signed `lambda`; the stake fraction is `tanh(lambda)`.
    pub lambda: f64,
}

/// Strategies that split the capital into accounts, each staking a fixed
/// fraction of itself every round.
pub trait AffineStrategy {
    fn accounts(&self) -> Vec<Account>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingStrategy {
    pub lambda: f64,
    pub side: Side,
    /// Number of rounds `lambda` was tuned for, if any. Betting does not
    /// stop there.
    pub horizon: Option<u64>,
}

impl HoeffdingStrategy {
    pub fn new(lambda: f64, side: Side) -> Result<Self> {
        if !(lambda >= 0.0) || lambda.is_infinite() {
            return Err(domain(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self {
            lambda,
            side,
            horizon: None,
        })
    }

    /// `lambda = c / sqrt(n)` with `c` from [`level_constant`].
    pub fn for_horizon(n: u64, level: f64, side: Side) -> Result<Self> {
        if n == 0 {
            return Err(domain("horizon must be positive"));
        }
        let lambda = level_constant(level)? / (n as f64).sqrt();
        Ok(Self {
            horizon: Some(n),
            ..Self::new(lambda, side)?
        })
    }

    pub fn stake_fraction(&self) -> f64 {
        self.lambda.tanh()
    }
}

impl AffineStrategy for HoeffdingStrategy {
    fn accounts(&self) -> Vec<Account> {
        self.side
            .accounts()
            .iter()
            .map(|&(weight, sign)| Account {
                weight,
                lambda: sign * self.lambda,
            })
            .collect()
    }
}

/// Equal-weight average of Hoeffding strategies over several `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingMixture {
    pub lambdas: Vec<f64>,
    pub side: Side,
}

impl HoeffdingMixture {
    pub fn new(lambdas: Vec<f64>, side: Side) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(domain("mixture needs at least one lambda"));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0) || l.is_infinite()) {
            return Err(domain(format!("lambda must be finite and >= 0, got {l}")));
        }
        Ok(Self { lambdas, side })
    }

    /// `lambda_k = c / sqrt(2^k)` for `k = 0..=k_max`.
    pub fn geometric(c: f64, k_max: u32, side: Side) -> Result<Self> {
        Self::new(
            (0..=k_max).map(|k| c / 2f64.powi(k as i32).sqrt()).collect(),
            side,
        )
    }
}

impl AffineStrategy for HoeffdingMixture {
    fn accounts(&self) -> Vec<Account> {
        let share = 1.0 / self.lambdas.len() as f64;
        self.lambdas
            .iter()
            .flat_map(|&lambda| {
                self.side.accounts().iter().map(move |&(weight, sign)| Account {
                    weight: share * weight,
                    lambda: sign * lambda,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedErrorRound {
    pub round_index: usize,
    /// Stake as a fraction of `capital_before`, in `[-1, 1]`.
    pub stake_fraction: f64,
    pub error: f64,
    pub capital_before: f64,
    pub capital_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedRun {
    pub initial_capital: f64,
    pub rounds: Vec<BoundedErrorRound>,
}

impl BoundedRun {
    pub fn final_capital(&self) -> f64 {
        self.rounds
            .last()
            .map_or(self.initial_capital, |r| r.capital_after)
    }

    pub fn capitals(&self) -> Vec<f64> {
        std::iter::once(self.initial_capital)
            .chain(self.rounds.iter().map(|r| r.capital_after))
            .collect()
    }

    /// The run as a generic capital process with the errors as outcomes.
    pub fn to_capital_process(&self) -> CapitalProcess {
        CapitalProcess {
            initial_capital: self.initial_capital,
            rounds: self
                .rounds
                .iter()
                .map(|r| RoundRecord {
                    round_index: r.round_index,
                    outcome: Outcome::Real(r.error),
                    capital_before: r.capital_before,
                    capital_after: r.capital_after,
                    bet: None,
                })
                .collect(),
        }
    }
}

/// Plays the strategy against the given errors from capital 1.
pub fn run_bounded(strategy: &impl AffineStrategy, errors: &[f64]) -> Result<BoundedRun> {
    let accounts = strategy.accounts();
    let fractions: Vec<f64> = accounts.iter().map(|a| a.lambda.tanh()).collect();
    let mut balances: Vec<f64> = accounts.iter().map(|a| a.weight).collect();
    let mut capital: f64 = balances.iter().sum();
    let initial_capital = capital;
    let mut rounds = Vec::with_capacity(errors.len());
    for (i, &e) in errors.iter().enumerate() {
        if !(e.abs() <= 1.0) {
            return Err(domain(format!("round {}: error {e} is outside [-1, 1]", i + 1)));
        }
        let stake: f64 = balances.iter().zip(&fractions).map(|(b, f)| b * f).sum();
        let stake_fraction = if capital > 0.0 { stake / capital } else { 0.0 };
        for (b, f) in balances.iter_mut().zip(&fractions) {
            *b *= 1.0 + f * e;
        }
        let after: f64 = balances.iter().sum();
        if !after.is_finite() {
            return Err(numeric(format!("round {}: capital overflowed", i + 1)));
        }
        rounds.push(BoundedErrorRound {
            round_index: i + 1,
            stake_fraction,
            error: e,
            capital_before: capital,
            capital_after: after,
        });
        capital = after;
    }
    Ok(BoundedRun {
        initial_capital,
        rounds,
    })
}

/// The largest per-account lower bound `w exp(lambda S - n lambda^2 / 2)`
/// on the capital after `n` rounds with error sum `partial_sum`. For the
/// two-sided strategy this is `exp(lambda |S| - n lambda^2 / 2) / 2`.
pub fn guarantee_bound(strategy: &impl AffineStrategy, n: u64, partial_sum: f64) -> Result<f64> {
    if !(partial_sum.abs() <= n as f64) {
        return Err(domain(format!(
            "partial sum {partial_sum} is impossible after {n} rounds"
        )));
    }
    let n = n as f64;
    Ok(strategy
        .accounts()
        .iter()
        .map(|a| a.weight * (a.lambda * partial_sum - n * a.lambda * a.lambda / 2.0).exp())
        .fold(0.0, f64::max))
}

/// `[max y - 1, min y + 1]`: the values of `mu` for which every
/// measurement error `y - mu` lies in `[-1, 1]`.
pub fn feasible_band(measurements: &[f64]) -> Result<Interval> {
    if measurements.is_empty() {
        return Err(domain("no measurements"));
    }
    if let Some(y) = measurements.iter().find(|y| !y.is_finite()) {
        return Err(domain(format!("measurement {y} is not finite")));
    }
    let max = measurements.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = measurements.iter().copied().fold(f64::INFINITY, f64::min);
    let band = Interval {
        lo: max - 1.0,
        hi: min + 1.0,
    };
    if band.lo > band.hi {
        return Err(Error::InconsistentData(format!(
            "measurements span {min} to {max}, more than the error bound allows"
        )));
    }
    Ok(band)
}

/// `points` equally spaced values of `mu` across the feasible band.
pub fn measurement_grid(measurements: &[f64], points: usize) -> Result<Vec<f64>> {
    let band = feasible_band(measurements)?;
    if band.lo == band.hi || points == 1 {
        return Ok(vec![0.5 * (band.lo + band.hi)]);
    }
    crate::warranty::linear_grid(band.lo, band.hi, points)
}

fn errors_at(measurements: &[f64], mu: f64) -> Vec<f64> {
    measurements
        .iter()
        .map(|y| {
            let e = y - mu;
            if e.abs() <= 1.0 + BAND_SLACK {
                e.clamp(-1.0, 1.0)
            } else {
                e
            }
        })
        .collect()
}

/// `K(mu)`: the strategy's capital on errors `y_i - mu`, at the grid points
/// inside the feasible band.
pub fn measurement_capital_curve(
    measurements: &[f64],
    strategy: &(impl AffineStrategy + Sync),
    mu_grid: &[f64],
) -> Result<WarrantyCurve> {
    check_grid(mu_grid)?;
    let band = feasible_band(measurements)?;
    let grid: Vec<f64> = mu_grid
        .iter()
        .copied()
        .filter(|&mu| band.lo - BAND_SLACK <= mu && mu <= band.hi + BAND_SLACK)
        .collect();
    if grid.is_empty() {
        return Err(Error::InconsistentData(format!(
            "no grid point lies in the feasible band [{}, {}]",
            band.lo, band.hi
        )));
    }
    let capital: Vec<f64> = grid
        .par_iter()
        .map(|&mu| run_bounded(strategy, &errors_at(measurements, mu)).map(|r| r.final_capital()))
        .collect::<Result<_>>()?;
    WarrantyCurve::new(
        grid,
        capital,
        measurements.iter().copied().map(Outcome::Real).collect(),
    )
}

/// `ybar +- c / sqrt(n)` with `c` from [`level_constant`]: outside it the
/// two-sided strategy tuned for `n` rounds has reached `level`.
pub fn warranty_interval(measurements: &[f64], level: f64) -> Result<Interval> {
    let c = level_constant(level)?;
    if measurements.is_empty() {
        return Err(domain("no measurements"));
    }
    let n = measurements.len() as f64;
    let mean = measurements.iter().sum::<f64>() / n;
    let half = c / n.sqrt();
    Ok(Interval {
        lo: mean - half,
        hi: mean + half,
    })
}

/// Pointwise product of capital curves on one grid: the capital of a
/// Skeptic who reinvests across independent studies.
pub fn multiply_curves(curves: &[WarrantyCurve]) -> Result<WarrantyCurve> {
    let (first, rest) = curves
        .split_first()
        .ok_or_else(|| Error::EmptySelection("no curves to multiply".into()))?;
    let mut capital = first.capital.clone();
    let mut observations = first.observations.clone();
    for (i, c) in rest.iter().enumerate() {
        if c.grid != first.grid {
            return Err(Error::GridMismatch(format!(
                "curve {} has a different grid from curve 0",
                i + 1
            )));
        }
        for (k, x) in capital.iter_mut().zip(&c.capital) {
            *k *= x;
        }
        observations.extend_from_slice(&c.observations);
    }
    WarrantyCurve::new(first.grid.clone(), capital, observations)
}
