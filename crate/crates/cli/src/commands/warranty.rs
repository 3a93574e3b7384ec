use std::collections::BTreeMap;

use bettest_core::bet::likelihood_ratio_bet;
use bettest_core::protocol::RepeatedBet;
use bettest_core::special::std_normal_upper_quantile;
use bettest_core::warranty::{
    capital_curve, confidence_to_warranty, linear_grid, Interval, ModelFamily, ParametricStrategy,
    DEFAULT_GRID_POINTS,
};
use bettest_core::{warranty_set, DiscreteDistribution, DistributionModel, Outcome, RejectionRegion, WarrantyCurve};
use serde::{Deserialize, Serialize};

use crate::args::WarrantyArgs;
use crate::error::{CliError, CliResult};
use crate::inputs::{ingest_observations, Column, InputLog};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// `N(theta, sd)`.
    NormalMean { sd: f64 },
    /// `P(1) = theta` on `{0, 1}`.
    Bernoulli,
}

impl Family {
    fn parse(s: &str) -> CliResult<Self> {
        let bad = || CliError::usage(format!("unknown family `{s}`")).at("--family");
        match s.split_once(':') {
            Some(("normal-mean", sd)) => {
                let sd: f64 = sd.trim().parse().map_err(|_| bad())?;
                if !(sd > 0.0 && sd.is_finite()) {
                    return Err(CliError::usage("normal-mean sd must be positive").at("--family"));
                }
                Ok(Family::NormalMean { sd })
            }
            None if s == "bernoulli" => Ok(Family::Bernoulli),
            _ => Err(bad()),
        }
    }

    pub fn model(self, theta: f64) -> bettest_core::Result<DistributionModel> {
        match self {
            Family::NormalMean { sd } => DistributionModel::normal(theta, sd),
            Family::Bernoulli => {
                if !(0.0..=1.0).contains(&theta) {
                    return Err(bettest_core::Error::Domain(format!(
                        "Bernoulli parameter {theta} outside [0, 1]"
                    )));
                }
                Ok(DiscreteDistribution::from_pairs([(0.0, 1.0 - theta), (1.0, theta)])?.into())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategyChoice {
    /// Bet `P_{theta + shift} / P_theta` every round.
    LikelihoodRatio { shift: f64 },
    /// All-or-nothing two-sided test of the sample mean at level `alpha`.
    Confidence { alpha: f64 },
}

impl StrategyChoice {
    fn parse(s: &str) -> CliResult<Self> {
        let bad = || CliError::usage(format!("unknown strategy `{s}`")).at("--strategy");
        let (kind, param) = s.split_once(':').ok_or_else(bad)?;
        let x: f64 = param.trim().parse().map_err(|_| bad())?;
        match kind {
            "likelihood-ratio" => Ok(StrategyChoice::LikelihoodRatio { shift: x }),
            "confidence" => Ok(StrategyChoice::Confidence { alpha: x }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarrantyPayload {
    pub family: Family,
    pub strategy: StrategyChoice,
    #[serde(flatten)]
    pub curve: WarrantyCurve,
    /// Warranty sets keyed by alpha.
    pub warranty_sets: BTreeMap<String, Vec<Interval>>,
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| {
        x.parse::<f64>()
            .map_err(|_| CliError::usage(format!("bad grid value `{x}`")).at("--grid"))
    };
    let (lo, hi, points) = match parts.as_slice() {
        [lo, hi] => (num(lo)?, num(hi)?, DEFAULT_GRID_POINTS),
        [lo, hi, n] => (
            num(lo)?,
            num(hi)?,
            n.parse()
                .map_err(|_| CliError::usage(format!("bad grid size `{n}`")).at("--grid"))?,
        ),
        _ => return Err(CliError::usage("grid must be LO,HI or LO,HI,POINTS").at("--grid")),
    };
    linear_grid(lo, hi, points).map_err(|e| CliError::from(e).at("--grid"))
}

pub fn run(args: &WarrantyArgs, inputs: &mut InputLog) -> CliResult<WarrantyPayload> {
    let family = Family::parse(&args.family)?;
    let strategy = StrategyChoice::parse(&args.strategy)?;
    let grid = parse_grid(&args.grid)?;
    let column = args.column.as_deref().map(Column::parse);
    let ys = ingest_observations(&args.data, column.as_ref(), inputs)?;

    let mut alphas = args.alpha.clone();
    if alphas.is_empty() {
        alphas.push(match strategy {
            StrategyChoice::Confidence { alpha } => alpha,
            StrategyChoice::LikelihoodRatio { .. } => 0.05,
        });
    }

    let curve = match strategy {
        StrategyChoice::LikelihoodRatio { shift } => {
            let per_theta = ParametricStrategy::new(grid, move |theta| {
                let null = family.model(theta)?;
                let alt = family.model(theta + shift)?;
                Ok(RepeatedBet(likelihood_ratio_bet(&null, &alt)?))
            })?;
            let outcomes: Vec<Outcome> = ys.iter().copied().map(Outcome::Real).collect();
            capital_curve(&per_theta, &ModelFamily::iid(move |t| family.model(t)), &outcomes)?
        }
        StrategyChoice::Confidence { alpha } => {
            let Family::NormalMean { sd } = family else {
                return Err(CliError::usage("confidence strategies need the normal-mean family")
                    .at("--strategy"));
            };
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CliError::usage("confidence alpha must lie in (0, 1)").at("--strategy"));
            }
            let n = ys.len() as f64;
            let se = sd / n.sqrt();
            let half = se * std_normal_upper_quantile(alpha / 2.0)?;
            let mean = ys.iter().sum::<f64>() / n;
            let mut curve = confidence_to_warranty(
                &grid,
                move |theta| DistributionModel::normal(theta, se),
                move |theta| {
                    Ok(RejectionRegion::TwoSided {
                        center: theta,
                        half_width: half,
                    })
                },
                alpha,
                &Outcome::Real(mean),
            )?;
            curve.observations = ys.iter().copied().map(Outcome::Real).collect();
            curve
        }
    };

    let mut warranty_sets = BTreeMap::new();
    for alpha in alphas {
        let set = warranty_set(&curve, alpha).map_err(|e| CliError::from(e).at("--alpha"))?;
        warranty_sets.insert(format!("{alpha}"), set.intervals);
    }
    Ok(WarrantyPayload {
        family,
        strategy,
        curve,
        warranty_sets,
    })
}
