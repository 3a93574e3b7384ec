//! All-or-nothing bets, the level-alpha Neyman–Pearson bet and power.

use serde::{Deserialize, Serialize};

use crate::bet::{Bet, Payoff};
use crate::dist::{DistributionModel, Outcome};
use crate::error::{domain, numeric, Error, Result};

/// Tolerance on the null probability of a continuous rejection region.
pub const REGION_SIZE_TOLERANCE: f64 = 1e-9;

const POWER_SCAN_POINTS: usize = 20_001;

/// A rejection region `E` for an all-or-nothing bet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectionRegion {
    /// `y >= threshold`
    Upper { threshold: f64 },
    /// `y <= threshold`
    Lower { threshold: f64 },
    /// `|y - center| > half_width`
    TwoSided { center: f64, half_width: f64 },
    /// An explicit set of outcomes.
    Outcomes { outcomes: Vec<Outcome> },
}

impl RejectionRegion {
    pub fn contains(&self, y: &Outcome) -> bool {
        match self {
            RejectionRegion::Outcomes { outcomes } => outcomes.contains(y),
            _ => match y.as_real() {
                None => false,
                Some(v) => match *self {
                    RejectionRegion::Upper { threshold } => v >= threshold,
                    RejectionRegion::Lower { threshold } => v <= threshold,
                    RejectionRegion::TwoSided { center, half_width } => {
                        (v - center).abs() > half_width
                    }
                    RejectionRegion::Outcomes { .. } => unreachable!(),
                },
            },
        }
    }

    /// Points where the region's indicator jumps.
    pub fn boundary(&self) -> Vec<f64> {
        match *self {
            RejectionRegion::Upper { threshold } | RejectionRegion::Lower { threshold } => {
                vec![threshold]
            }
            RejectionRegion::TwoSided { center, half_width } => {
                vec![center - half_width, center + half_width]
            }
            RejectionRegion::Outcomes { .. } => Vec::new(),
        }
    }

    /// `model(E)`.
    pub fn probability(&self, model: &DistributionModel) -> Result<f64> {
        match (self, model) {
            (_, DistributionModel::Discrete(d)) => Ok(d
                .iter()
                .filter(|(o, _)| self.contains(o))
                .map(|(_, p)| p)
                .sum()),
            (RejectionRegion::Outcomes { .. }, _) => Err(Error::Unsupported(
                "outcome-set regions need a discrete model".into(),
            )),
            (RejectionRegion::Upper { threshold }, _) => model.upper_tail(*threshold),
            (RejectionRegion::Lower { threshold }, _) => model.lower_tail(*threshold),
            (RejectionRegion::TwoSided { center, half_width }, _) => {
                Ok(model.upper_tail(center + half_width)? + model.lower_tail(center - half_width)?)
            }
        }
    }
}

/// The bet paying `1/level` on `region` and nothing elsewhere.
///
/// `level` should be the null probability of `region`; the unit-price
/// check on the resulting bet enforces that.
pub fn all_or_nothing_bet(
    null: &DistributionModel,
    region: &RejectionRegion,
    level: f64,
) -> Result<Bet> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(domain(format!("level must lie in (0, 1], got {level}")));
    }
    let payout = 1.0 / level;
    let owned = region.clone();
    let payoff = Payoff::new(move |y| if owned.contains(y) { payout } else { 0.0 })
        .with_breakpoints(region.boundary());
    Bet::new(payoff, null.clone())
}

/// A level-alpha Neyman–Pearson bet and the region it pays on.
#[derive(Debug, Clone)]
pub struct NeymanPearsonBet {
    pub bet: Bet,
    pub region: RejectionRegion,
    /// Null probability of the region. Equals alpha for continuous models;
    /// can fall short of it for discrete ones.
    pub size: f64,
    pub alpha: f64,
}

impl NeymanPearsonBet {
    pub fn threshold(&self) -> Option<f64> {
        match self.region {
            RejectionRegion::Upper { threshold } | RejectionRegion::Lower { threshold } => {
                Some(threshold)
            }
            _ => None,
        }
    }

    /// `alt(E)`: the probability the bet pays off if `alt` is true.
    pub fn power(&self, alt: &DistributionModel) -> Result<f64> {
        match (&self.region, alt) {
            (RejectionRegion::Outcomes { outcomes }, DistributionModel::Discrete(q)) => {
                Ok(outcomes.iter().map(|o| q.mass_or_zero(o)).sum())
            }
            _ => self.region.probability(alt),
        }
    }
}

/// The all-or-nothing bet against `null` whose region collects the largest
/// likelihood ratios `q/p`.
///
/// Continuous models must have a monotone likelihood ratio (normals with
/// a common sd, or two chi-squared laws); the region is then a tail whose
/// threshold is found by root search on the null tail probability.
///
/// For discrete models outcomes are added in decreasing likelihood-ratio
/// order (ties in outcome order) while the region's null probability stays
/// at most alpha, and the payoff is `1/P(E)`.
pub fn neyman_pearson_bet(
    null: &DistributionModel,
    alt: &DistributionModel,
    alpha: f64,
) -> Result<NeymanPearsonBet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    match (null, alt) {
        (DistributionModel::Discrete(p), DistributionModel::Discrete(q)) => {
            let mut ranked: Vec<(usize, f64, f64)> = p
                .iter()
                .enumerate()
                .map(|(i, (o, p_mass))| {
                    let q_mass = q.mass_or_zero(o);
                    let ratio = if p_mass > 0.0 {
                        q_mass / p_mass
                    } else if q_mass > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    (i, ratio, p_mass)
                })
                .collect();
            // stable: equal ratios keep outcome order
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1));

            let mut size = 0.0;
            let mut members = Vec::new();
            for &(i, _, p_mass) in &ranked {
                if size + p_mass > alpha * (1.0 + 1e-12) {
                    break;
                }
                size += p_mass;
                members.push(p.outcomes()[i].clone());
            }
            if size <= 0.0 {
                return Err(Error::InvalidBet(format!(
                    "no region of positive null probability fits within alpha = {alpha}"
                )));
            }
            let region = RejectionRegion::Outcomes { outcomes: members };
            let bet = all_or_nothing_bet(null, &region, size)?;
            Ok(NeymanPearsonBet {
                bet,
                region,
                size,
                alpha,
            })
        }
        (DistributionModel::Discrete(_), _) | (_, DistributionModel::Discrete(_)) => Err(
            Error::Unsupported("Neyman–Pearson bet between discrete and continuous models".into()),
        ),
        _ => {
            let upper = monotone_direction(null, alt)?;
            let region = if upper {
                RejectionRegion::Upper {
                    threshold: null.upper_quantile(alpha)?,
                }
            } else {
                RejectionRegion::Lower {
                    threshold: null.lower_quantile(alpha)?,
                }
            };
            let size = region.probability(null)?;
            if (size - alpha).abs() > REGION_SIZE_TOLERANCE {
                return Err(numeric(format!(
                    "threshold search reached size {size}, wanted {alpha}"
                )));
            }
            let bet = all_or_nothing_bet(null, &region, alpha)?;
            Ok(NeymanPearsonBet {
                bet,
                region,
                size,
                alpha,
            })
        }
    }
}

/// `true` when `q/p` increases with `y`, `false` when it decreases.
fn monotone_direction(null: &DistributionModel, alt: &DistributionModel) -> Result<bool> {
    match (null, alt) {
        (DistributionModel::Normal(p), DistributionModel::Normal(q)) => {
            if ((p.sd() - q.sd()) / p.sd()).abs() > 1e-12 {
                return Err(Error::Unsupported(
                    "Neyman–Pearson region for normals with different sd is not a tail".into(),
                ));
            }
            Ok(q.mean() >= p.mean())
        }
        (DistributionModel::ChiSquared(p), DistributionModel::ChiSquared(q)) => {
            Ok(q.degrees_of_freedom() >= p.degrees_of_freedom())
        }
        _ => Err(Error::Unsupported(format!(
            "no monotone likelihood ratio between {null} and {alt}"
        ))),
    }
}

/// `alt(S >= 1/alpha)`: how likely the bet is to multiply its stake by
/// `1/alpha` if `alt` is true.
pub fn power(bet: &Bet, alt: &DistributionModel, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let target = 1.0 / alpha;
    let payoff = bet.payoff();
    match (bet.reference(), alt) {
        (DistributionModel::Discrete(p), DistributionModel::Discrete(q)) => Ok(p
            .outcomes()
            .iter()
            .filter(|o| payoff.value(o) >= target)
            .map(|o| q.mass_or_zero(o))
            .sum()),
        (DistributionModel::Discrete(_), _) | (_, DistributionModel::Discrete(_)) => Err(
            Error::Unsupported("power of a bet against a model of a different kind".into()),
        ),
        _ => {
            let hits = |y: f64| payoff.value_at(y) >= target;
            let mut total = 0.0;
            for (lo, hi) in superlevel_intervals(hits, alt, payoff.breakpoints())? {
                total += alt.probability_between(lo, hi)?;
            }
            Ok(total.min(1.0))
        }
    }
}

/// Intervals of the real line on which `hits` holds, located on a fine grid
/// over `model`'s window and refined by bisection. The first and last
/// intervals extend to infinity when `hits` holds at the window's edges.
fn superlevel_intervals(
    hits: impl Fn(f64) -> bool,
    model: &DistributionModel,
    breakpoints: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = model
        .window()
        .ok_or_else(|| Error::Unsupported("scan needs a continuous model".into()))?;
    let step = (hi - lo) / (POWER_SCAN_POINTS - 1) as f64;
    let mut grid: Vec<f64> = (0..POWER_SCAN_POINTS).map(|i| lo + step * i as f64).collect();
    for &b in breakpoints {
        if b > lo && b < hi {
            grid.push(b);
            // both sides of a jump
            grid.push(f64::from_bits(b.to_bits().wrapping_sub(1)).max(lo));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let tol = 1e-13 * (hi - lo);
    let mut intervals = Vec::new();
    let mut inside = hits(grid[0]);
    let mut start = if inside { f64::NEG_INFINITY } else { f64::NAN };
    for pair in grid.windows(2) {
        let now = hits(pair[1]);
        if now == inside {
            continue;
        }
        let (mut a, mut b) = (pair[0], pair[1]);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if hits(mid) == inside {
                a = mid;
            } else {
                b = mid;
            }
        }
        let edge = if breakpoints.contains(&b) { b } else { 0.5 * (a + b) };
        if inside {
            intervals.push((start, edge));
        } else {
            start = edge;
        }
        inside = now;
    }
    if inside {
        intervals.push((start, f64::INFINITY));
    }
    Ok(intervals)
}
