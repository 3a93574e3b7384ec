//! Multi-round testing protocols.
//!
//! Each round Skeptic buys a nonnegative payoff whose conditional null
//! expectation equals the current capital, Reality announces an outcome,
//! and the payoff's value there becomes the new capital.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bet::{likelihood_ratio_bet, Bet, Payoff};
use crate::dist::{DiscreteDistribution, DistributionModel, Outcome};
use crate::error::{domain, numeric, Error, Result};

/// Relative tolerance on `E_P(S_n | history) = K_{n-1}`.
pub const PRICING_TOLERANCE: f64 = 1e-6;

/// Largest number of paths [`lift_joint_bet`] will enumerate.
pub const MAX_LIFT_PATHS: usize = 1_000_000;

/// The null's conditional law of round `n` given the first `n - 1` outcomes.
pub trait ConditionalModel: Send + Sync {
    fn model(&self, history: &[Outcome]) -> Result<DistributionModel>;
}

/// The same law every round.
#[derive(Debug, Clone, PartialEq)]
pub struct Iid(pub DistributionModel);

impl ConditionalModel for Iid {
    fn model(&self, _history: &[Outcome]) -> Result<DistributionModel> {
        Ok(self.0.clone())
    }
}

/// A conditional model given by a closure.
pub struct ConditionalFn<F>(pub F);

impl<F> ConditionalModel for ConditionalFn<F>
where
    F: Fn(&[Outcome]) -> Result<DistributionModel> + Send + Sync,
{
    fn model(&self, history: &[Outcome]) -> Result<DistributionModel> {
        (self.0)(history)
    }
}

/// Skeptic's rule for choosing round `n`'s payoff.
///
/// The payoff must be priced at `capital` under `null`, which is the
/// conditional law of the coming outcome given `history`. Strategies see
/// only the past.
pub trait SkepticStrategy: Send + Sync {
    fn bet(&self, history: &[Outcome], capital: f64, null: &DistributionModel) -> Result<Payoff>;
}

impl<S: SkepticStrategy + ?Sized> SkepticStrategy for Arc<S> {
    fn bet(&self, history: &[Outcome], capital: f64, null: &DistributionModel) -> Result<Payoff> {
        (**self).bet(history, capital, null)
    }
}

impl<S: SkepticStrategy + ?Sized> SkepticStrategy for Box<S> {
    fn bet(&self, history: &[Outcome], capital: f64, null: &DistributionModel) -> Result<Payoff> {
        (**self).bet(history, capital, null)
    }
}

/// Keeps the capital as cash: `S_n = K_{n-1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantStrategy;

impl SkepticStrategy for ConstantStrategy {
    fn bet(&self, _history: &[Outcome], capital: f64, _null: &DistributionModel) -> Result<Payoff> {
        Ok(Payoff::constant(capital))
    }
}

/// Reinvests everything in the same unit bet each round.
#[derive(Debug, Clone)]
pub struct RepeatedBet(pub Bet);

impl SkepticStrategy for RepeatedBet {
    fn bet(&self, _history: &[Outcome], capital: f64, _null: &DistributionModel) -> Result<Payoff> {
        Ok(self.0.payoff().scaled(capital))
    }
}

/// Reinvests everything in a fixed schedule of unit bets, one per round.
#[derive(Debug, Clone)]
pub struct ScheduledBets(pub Vec<Bet>);

impl SkepticStrategy for ScheduledBets {
    fn bet(&self, history: &[Outcome], capital: f64, _null: &DistributionModel) -> Result<Payoff> {
        let n = history.len();
        self.0
            .get(n)
            .map(|b| b.payoff().scaled(capital))
            .ok_or_else(|| domain(format!("no bet scheduled for round {}", n + 1)))
    }
}

/// Bets the likelihood ratio of an alternative conditional model against
/// the null each round.
pub struct LikelihoodRatioStrategy {
    alternative: Arc<dyn ConditionalModel>,
}

impl LikelihoodRatioStrategy {
    pub fn new(alternative: impl ConditionalModel + 'static) -> Self {
        Self {
            alternative: Arc::new(alternative),
        }
    }

    pub fn iid(alternative: DistributionModel) -> Self {
        Self::new(Iid(alternative))
    }
}

impl SkepticStrategy for LikelihoodRatioStrategy {
    fn bet(&self, history: &[Outcome], capital: f64, null: &DistributionModel) -> Result<Payoff> {
        let alt = self.alternative.model(history)?;
        Ok(likelihood_ratio_bet(null, &alt)?.payoff().scaled(capital))
    }
}

/// A strategy given by a closure.
pub struct StrategyFn<F>(pub F);

impl<F> SkepticStrategy for StrategyFn<F>
where
    F: Fn(&[Outcome], f64, &DistributionModel) -> Result<Payoff> + Send + Sync,
{
    fn bet(&self, history: &[Outcome], capital: f64, null: &DistributionModel) -> Result<Payoff> {
        (self.0)(history, capital, null)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round_index: usize,
    pub outcome: Outcome,
    pub capital_before: f64,
    pub capital_after: f64,
    /// `None` once the capital has hit zero and no bet was placed.
    #[serde(skip)]
    pub bet: Option<Payoff>,
}

impl PartialEq for RoundRecord {
    fn eq(&self, other: &Self) -> bool {
        self.round_index == other.round_index
            && self.outcome == other.outcome
            && self.capital_before == other.capital_before
            && self.capital_after == other.capital_after
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalProcess {
    pub initial_capital: f64,
    pub rounds: Vec<RoundRecord>,
}

impl Default for CapitalProcess {
    fn default() -> Self {
        Self::new()
    }
}

impl CapitalProcess {
    /// An empty process with `K_0 = 1`.
    pub fn new() -> Self {
        Self {
            initial_capital: 1.0,
            rounds: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn final_capital(&self) -> f64 {
        self.rounds
            .last()
            .map_or(self.initial_capital, |r| r.capital_after)
    }

    /// `K_0, K_1, ..., K_N`.
    pub fn capitals(&self) -> Vec<f64> {
        std::iter::once(self.initial_capital)
            .chain(self.rounds.iter().map(|r| r.capital_after))
            .collect()
    }

    /// `K_n / K_{n-1}` per round; rounds after ruin count as 1.
    pub fn score_ratios(&self) -> Vec<f64> {
        self.rounds
            .iter()
            .map(|r| {
                if r.capital_before == 0.0 {
                    1.0
                } else {
                    r.capital_after / r.capital_before
                }
            })
            .collect()
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.rounds.iter().map(|r| r.outcome.clone()).collect()
    }

    /// The process stopped after `n` rounds.
    pub fn prefix(&self, n: usize) -> CapitalProcess {
        CapitalProcess {
            initial_capital: self.initial_capital,
            rounds: self.rounds[..n.min(self.rounds.len())].to_vec(),
        }
    }

    /// Plays further rounds with the same null and strategy.
    pub fn extend(
        &mut self,
        null: &dyn ConditionalModel,
        strategy: &dyn SkepticStrategy,
        outcomes: &[Outcome],
    ) -> Result<()> {
        let mut history = self.outcomes();
        for y in outcomes {
            let record = play_round(null, strategy, &history, self.final_capital(), y)?;
            history.push(y.clone());
            self.rounds.push(record);
        }
        Ok(())
    }
}

fn play_round(
    null: &dyn ConditionalModel,
    strategy: &dyn SkepticStrategy,
    history: &[Outcome],
    capital: f64,
    y: &Outcome,
) -> Result<RoundRecord> {
    let round = history.len() + 1;
    let violation = |message: String| Error::ProtocolViolation { round, message };
    let model = null.model(history)?;
    model
        .check_outcome(y)
        .map_err(|e| violation(format!("outcome {y} is not in the null's support: {e}")))?;

    if capital == 0.0 {
        return Ok(RoundRecord {
            round_index: round,
            outcome: y.clone(),
            capital_before: 0.0,
            capital_after: 0.0,
            bet: None,
        });
    }

    let payoff = strategy.bet(history, capital, &model)?;
    payoff.check_nonnegative(&model).map_err(|e| match e {
        Error::InvalidBet(msg) => violation(msg),
        other => other,
    })?;
    // price per unit of capital, so quadrature tolerances do not depend on
    // how small the capital has become
    let unit_price = match 1.0 / capital {
        inv if inv.is_finite() => payoff.scaled(inv).expectation(&model)?,
        _ => payoff.expectation(&model)? / capital,
    };
    if (unit_price - 1.0).abs() > PRICING_TOLERANCE {
        return Err(violation(format!(
            "payoff costs {} under the null but the capital is {capital}",
            unit_price * capital
        )));
    }
    let after = payoff.value(y);
    if after.is_nan() || after.is_infinite() {
        return Err(numeric(format!("round {round} payoff at {y} is {after}")));
    }
    if after < 0.0 {
        return Err(violation(format!("payoff at {y} is negative: {after}")));
    }
    Ok(RoundRecord {
        round_index: round,
        outcome: y.clone(),
        capital_before: capital,
        capital_after: after,
        bet: Some(payoff),
    })
}

/// Runs the protocol from `K_0 = 1` over the given outcomes.
pub fn run_protocol(
    null: &dyn ConditionalModel,
    strategy: &dyn SkepticStrategy,
    outcomes: &[Outcome],
) -> Result<CapitalProcess> {
    let mut process = CapitalProcess::new();
    process.extend(null, strategy, outcomes)?;
    Ok(process)
}

fn check_scores(scores: &[f64]) -> Result<()> {
    match scores.iter().position(|s| !(*s >= 0.0) || s.is_infinite()) {
        Some(i) => Err(domain(format!(
            "score {} at position {i} is not a finite nonnegative number",
            scores[i]
        ))),
        None => Ok(()),
    }
}

/// Evidence from successive bets, each staking the winnings of the last.
pub fn combine_sequential(scores: &[f64]) -> Result<f64> {
    check_scores(scores)?;
    Ok(scores.iter().product())
}

/// Evidence from unit stakes spread over simultaneous bets: total winnings
/// over total stake.
pub fn combine_parallel(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptySelection("no scores to average".into()));
    }
    check_scores(scores)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

type JointPayoff = Arc<dyn Fn(&[Outcome]) -> f64 + Send + Sync>;

/// The sequential strategy `S_n(y) = E(S | y_1, ..., y_{n-1}, y)` that
/// reproduces a joint bet on `N` i.i.d. discrete outcomes.
#[derive(Clone)]
pub struct LiftedJointBet {
    null: DiscreteDistribution,
    rounds: usize,
    joint: JointPayoff,
}

impl std::fmt::Debug for LiftedJointBet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiftedJointBet")
            .field("null", &self.null)
            .field("rounds", &self.rounds)
            .finish_non_exhaustive()
    }
}

/// Lifts `joint`, a payoff on outcome sequences with unit expectation
/// under `null^N`, to a round-by-round strategy.
pub fn lift_joint_bet(
    joint: impl Fn(&[Outcome]) -> f64 + Send + Sync + 'static,
    null: &DiscreteDistribution,
    rounds: usize,
) -> Result<LiftedJointBet> {
    if rounds == 0 {
        return Err(domain("a joint bet needs at least one round"));
    }
    let paths = (null.len() as f64).powi(rounds as i32);
    if paths > MAX_LIFT_PATHS as f64 {
        return Err(Error::Unsupported(format!(
            "{paths} outcome sequences exceed the enumeration limit {MAX_LIFT_PATHS}"
        )));
    }
    let lifted = LiftedJointBet {
        null: null.clone(),
        rounds,
        joint: Arc::new(joint),
    };
    let mut path = Vec::with_capacity(rounds);
    let mut bad = None;
    let total = lifted.conditional_expectation(&mut path, &mut |p, v| {
        if bad.is_none() && (!(v >= 0.0) || v.is_infinite()) {
            bad = Some((p.to_vec(), v));
        }
    });
    if let Some((p, v)) = bad {
        let labels: Vec<String> = p.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidBet(format!(
            "joint payoff at ({}) is {v}",
            labels.join(", ")
        )));
    }
    if (total - 1.0).abs() > PRICING_TOLERANCE {
        return Err(Error::InvalidBet(format!(
            "joint payoff has expectation {total} under the {rounds}-fold null, not 1"
        )));
    }
    Ok(lifted)
}

impl LiftedJointBet {
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `E(S | path)` by enumerating completions; `visit` sees every full
    /// path with its payoff.
    fn conditional_expectation(
        &self,
        path: &mut Vec<Outcome>,
        visit: &mut dyn FnMut(&[Outcome], f64),
    ) -> f64 {
        if path.len() == self.rounds {
            let v = (self.joint)(path);
            visit(path, v);
            return v;
        }
        let mut total = 0.0;
        for (y, p) in self.null.iter() {
            if p == 0.0 {
                continue;
            }
            path.push(y.clone());
            total += p * self.conditional_expectation(path, visit);
            path.pop();
        }
        total
    }
}

impl SkepticStrategy for LiftedJointBet {
    fn bet(&self, history: &[Outcome], _capital: f64, _null: &DistributionModel) -> Result<Payoff> {
        if history.len() >= self.rounds {
            return Err(domain(format!(
                "joint bet covers {} rounds, asked for round {}",
                self.rounds,
                history.len() + 1
            )));
        }
        let mut path = history.to_vec();
        let table: Vec<f64> = self
            .null
            .outcomes()
            .iter()
            .map(|y| {
                path.push(y.clone());
                let v = self.conditional_expectation(&mut path, &mut |_, _| {});
                path.pop();
                v
            })
            .collect();
        let null = self.null.clone();
        Ok(Payoff::new(move |y| {
            null.index_of(y).map_or(f64::NAN, |i| table[i])
        }))
    }
}
