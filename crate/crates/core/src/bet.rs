//! Bets against a null distribution and the quantities they determine.
//!
//! A [`Bet`] is a nonnegative payoff bought for one unit of money under the
//! null `P`, so `E_P(S) = 1`. Once `P` and `S` are fixed, so are:
//!
//! * the betting score `S(y)` for an observed outcome `y`,
//! * the implied alternative `Q = S P`, under which `S = Q/P` is the
//!   log-optimal (Kelly) bet,
//! * the implied target `exp(E_Q ln S) = exp(E_P(S ln S))`, the score one
//!   can hope for if `Q` is true. Gibbs's inequality keeps it at least 1.

use std::fmt;
use std::sync::Arc;

use crate::dist::{DiscreteDistribution, DistributionModel, Outcome};
use crate::error::{domain, numeric, Error, Result};

/// Relative tolerance on `E_P(S) = 1` for a bet to be accepted.
pub const BET_UNIT_TOLERANCE: f64 = 1e-6;

pub type PayoffFn = dyn Fn(&Outcome) -> f64 + Send + Sync;

/// A payoff function on outcomes, optionally annotated with the points
/// where it jumps or kinks so quadrature can split there.
#[derive(Clone)]
pub struct Payoff {
    func: Arc<PayoffFn>,
    breakpoints: Arc<[f64]>,
}

impl Payoff {
    pub fn new(func: impl Fn(&Outcome) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            func: Arc::new(func),
            breakpoints: Arc::from(Vec::new()),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value)
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = Arc::from(breakpoints);
        self
    }

    #[inline]
    pub fn value(&self, y: &Outcome) -> f64 {
        (self.func)(y)
    }

    #[inline]
    pub fn value_at(&self, y: f64) -> f64 {
        (self.func)(&Outcome::Real(y))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The payoff multiplied by `factor`, keeping breakpoints.
    pub fn scaled(&self, factor: f64) -> Payoff {
        let inner = Arc::clone(&self.func);
        Payoff {
            func: Arc::new(move |y| factor * inner(y)),
            breakpoints: Arc::clone(&self.breakpoints),
        }
    }

    /// `E_model(payoff)`, splitting quadrature at the payoff's breakpoints.
    pub fn expectation(&self, model: &DistributionModel) -> Result<f64> {
        model.expect_with_breakpoints(|y| self.value(y), &self.breakpoints)
    }

    /// Fails unless the payoff is finite and nonnegative on the model's
    /// support (continuous supports are checked on a grid).
    pub fn check_nonnegative(&self, model: &DistributionModel) -> Result<()> {
        for y in model.sign_check_points(&self.breakpoints) {
            let v = self.value(&y);
            if !(v >= 0.0) || v.is_infinite() {
                return Err(Error::InvalidBet(format!("payoff at {y} is {v}")));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Payoff")
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

/// A nonnegative payoff with unit price under its reference distribution.
#[derive(Debug, Clone)]
pub struct Bet {
    payoff: Payoff,
    reference: DistributionModel,
    expected_value: f64,
}

impl Bet {
    /// Wraps a payoff that already has expectation 1 under `reference`.
    pub fn new(payoff: Payoff, reference: DistributionModel) -> Result<Self> {
        payoff.check_nonnegative(&reference)?;
        let expected_value = payoff.expectation(&reference)?;
        if (expected_value - 1.0).abs() > BET_UNIT_TOLERANCE {
            return Err(Error::InvalidBet(format!(
                "expected value under {reference} is {expected_value}, not 1"
            )));
        }
        Ok(Self {
            payoff,
            reference,
            expected_value,
        })
    }

    /// Accepts any payoff whose expectation lies in `(0, max_expectation]`.
    /// Used for calibrated p-values, which may cost less than one unit.
    pub(crate) fn with_expectation_at_most(
        payoff: Payoff,
        reference: DistributionModel,
        max_expectation: f64,
    ) -> Result<Self> {
        payoff.check_nonnegative(&reference)?;
        let expected_value = payoff.expectation(&reference)?;
        if !(expected_value > 0.0 && expected_value <= max_expectation) {
            return Err(Error::InvalidBet(format!(
                "expected value under {reference} is {expected_value}, above {max_expectation}"
            )));
        }
        Ok(Self {
            payoff,
            reference,
            expected_value,
        })
    }

    /// The bet that always returns the money: `S = 1`.
    pub fn constant(reference: DistributionModel) -> Self {
        Self {
            payoff: Payoff::constant(1.0),
            reference,
            expected_value: 1.0,
        }
    }

    pub fn payoff(&self) -> &Payoff {
        &self.payoff
    }

    pub fn reference(&self) -> &DistributionModel {
        &self.reference
    }

    /// `E_P(S)` as computed when the bet was validated.
    pub fn expected_value(&self) -> f64 {
        self.expected_value
    }

    /// Betting score `S(y)`: the factor by which the bet multiplied the
    /// money it risked.
    pub fn score(&self, y: &Outcome) -> Result<f64> {
        self.reference.check_outcome(y)?;
        let s = self.payoff.value(y);
        if !s.is_finite() {
            return Err(numeric(format!("payoff at {y} is {s}")));
        }
        Ok(s)
    }

    /// The alternative `Q = S P` under which this bet is log-optimal.
    pub fn implied_alternative(&self) -> Result<ImpliedAlternative> {
        match &self.reference {
            DistributionModel::Discrete(p) => {
                let raw: Vec<f64> = p.iter().map(|(o, mass)| mass * self.payoff.value(o)).collect();
                let total: f64 = raw.iter().sum();
                // Renormalizing absorbs the validation tolerance on E_P(S).
                let masses = raw.iter().map(|m| m / total).collect();
                let q = DiscreteDistribution::new(p.outcomes().to_vec(), masses)?;
                Ok(ImpliedAlternative::Discrete(q))
            }
            _ => Ok(ImpliedAlternative::Continuous(ContinuousAlternative {
                bet: self.clone(),
            })),
        }
    }

    /// `exp(E_P(S ln S))`, with `0 ln 0 = 0`.
    pub fn implied_target(&self) -> Result<f64> {
        let mean_log = self.reference.expect_with_breakpoints(
            |y| {
                let s = self.payoff.value(y);
                if s == 0.0 {
                    0.0
                } else {
                    s * s.ln()
                }
            },
            self.payoff.breakpoints(),
        )?;
        let target = mean_log.exp();
        if !target.is_finite() {
            return Err(numeric(format!("implied target overflowed: E_P(S ln S) = {mean_log}")));
        }
        Ok(target)
    }
}

/// Builds the unit-price bet proportional to `raw`.
///
/// Multiplying `raw` by a positive constant gives the same bet.
pub fn make_bet(raw: Payoff, null: &DistributionModel) -> Result<Bet> {
    raw.check_nonnegative(null)?;
    let price = raw.expectation(null)?;
    if !(price.is_finite() && price > 0.0) {
        return Err(Error::InvalidBet(format!(
            "payoff has expected value {price} under {null}"
        )));
    }
    Bet::new(raw.scaled(1.0 / price), null.clone())
}

/// The bet `S = q/p` against `null` with respect to `alt`.
pub fn likelihood_ratio_bet(null: &DistributionModel, alt: &DistributionModel) -> Result<Bet> {
    match (null, alt) {
        (DistributionModel::Discrete(p), DistributionModel::Discrete(q)) => {
            for (o, q_mass) in q.iter() {
                if q_mass > 0.0 && p.mass_or_zero(o) == 0.0 {
                    return Err(Error::AbsoluteContinuity(format!(
                        "alternative puts mass {q_mass} on {o}, which the null rules out"
                    )));
                }
            }
            let table: Vec<(Outcome, f64)> = p
                .iter()
                .map(|(o, p_mass)| {
                    let ratio = if p_mass > 0.0 {
                        q.mass_or_zero(o) / p_mass
                    } else {
                        0.0
                    };
                    (o.clone(), ratio)
                })
                .collect();
            let payoff = Payoff::new(move |y| {
                table
                    .iter()
                    .find(|(o, _)| o == y)
                    .map_or(f64::NAN, |(_, r)| *r)
            });
            Bet::new(payoff, null.clone())
        }
        (DistributionModel::Discrete(_), _) | (_, DistributionModel::Discrete(_)) => Err(
            Error::Unsupported("likelihood ratio between a discrete and a continuous model".into()),
        ),
        _ => {
            let p_model = null.clone();
            let q_model = alt.clone();
            for y in alt.sign_check_points(&[]) {
                let p = null.density(&y)?;
                let q = alt.density(&y)?;
                if q > 0.0 && p == 0.0 {
                    return Err(Error::AbsoluteContinuity(format!(
                        "alternative density {q} at {y} where the null density is 0"
                    )));
                }
            }
            let payoff = Payoff::new(move |y| {
                let ln_q = q_model.ln_density(y).unwrap_or(f64::NAN);
                if ln_q == f64::NEG_INFINITY {
                    return 0.0;
                }
                let ln_p = p_model.ln_density(y).unwrap_or(f64::NAN);
                (ln_q - ln_p).exp()
            });
            Bet::new(payoff, null.clone())
        }
    }
}

/// The distribution `Q = S P` implied by a bet.
#[derive(Debug, Clone)]
pub enum ImpliedAlternative {
    Discrete(DiscreteDistribution),
    Continuous(ContinuousAlternative),
}

impl ImpliedAlternative {
    pub fn density(&self, y: &Outcome) -> Result<f64> {
        match self {
            ImpliedAlternative::Discrete(q) => q.mass(y),
            ImpliedAlternative::Continuous(q) => {
                let v = y
                    .as_real()
                    .ok_or_else(|| domain(format!("continuous alternative at label {y}")))?;
                Ok(q.density(v))
            }
        }
    }

    pub fn expect(&self, f: impl Fn(&Outcome) -> f64) -> Result<f64> {
        match self {
            ImpliedAlternative::Discrete(q) => {
                DistributionModel::Discrete(q.clone()).expect(f)
            }
            ImpliedAlternative::Continuous(q) => q.expect(f),
        }
    }
}

/// `Q = S P` for a continuous null, represented by its density
/// `q(y) = S(y) p(y)` rather than a fitted parametric family.
#[derive(Debug, Clone)]
pub struct ContinuousAlternative {
    bet: Bet,
}

impl ContinuousAlternative {
    pub fn density(&self, y: f64) -> f64 {
        let p = self
            .bet
            .reference
            .density(&Outcome::Real(y))
            .unwrap_or(0.0);
        if p == 0.0 {
            0.0
        } else {
            p * self.bet.payoff.value_at(y)
        }
    }

    /// `E_Q f(Y) = E_P (S f)(Y)`.
    pub fn expect(&self, f: impl Fn(&Outcome) -> f64) -> Result<f64> {
        self.expect_with_breakpoints(f, &[])
    }

    pub fn expect_with_breakpoints(
        &self,
        f: impl Fn(&Outcome) -> f64,
        breakpoints: &[f64],
    ) -> Result<f64> {
        let mut cuts = self.bet.payoff.breakpoints().to_vec();
        cuts.extend_from_slice(breakpoints);
        self.bet.reference.expect_with_breakpoints(
            |y| {
                let s = self.bet.payoff.value(y);
                if s == 0.0 {
                    0.0
                } else {
                    s * f(y)
                }
            },
            &cuts,
        )
    }

    /// `Q(Y >= t)`.
    pub fn upper_tail(&self, t: f64) -> Result<f64> {
        self.expect_with_breakpoints(
            |y| if y.as_real().is_some_and(|v| v >= t) { 1.0 } else { 0.0 },
            &[t],
        )
    }

    /// `Q(Y in A)` for `A = {y : predicate(y)}`, with the boundary points of
    /// `A` passed as breakpoints.
    pub fn probability(&self, predicate: impl Fn(f64) -> bool, boundary: &[f64]) -> Result<f64> {
        self.expect_with_breakpoints(
            |y| {
                if y.as_real().is_some_and(&predicate) {
                    1.0
                } else {
                    0.0
                }
            },
            boundary,
        )
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.expect(|_| 1.0)
    }

    pub fn bet(&self) -> &Bet {
        &self.bet
    }
}

/// Everything a study that tests `P` by betting reports.
#[derive(Debug, Clone)]
pub struct TestReport {
    pub null_hypothesis: DistributionModel,
    pub bet: Bet,
    pub implied_alternative: ImpliedAlternative,
    pub implied_target: f64,
    pub outcome: Outcome,
    pub betting_score: f64,
}

impl TestReport {
    pub fn build(bet: &Bet, outcome: Outcome) -> Result<Self> {
        let betting_score = bet.score(&outcome)?;
        let implied_target = bet.implied_target()?;
        if implied_target < 1.0 - 1e-9 && bet.expected_value() >= 1.0 - BET_UNIT_TOLERANCE {
            return Err(numeric(format!(
                "implied target {implied_target} below 1 for a unit bet"
            )));
        }
        Ok(Self {
            null_hypothesis: bet.reference().clone(),
            bet: bet.clone(),
            implied_alternative: bet.implied_alternative()?,
            implied_target,
            outcome,
            betting_score,
        })
    }
}
