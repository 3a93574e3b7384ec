use std::path::{Path, PathBuf};

use bettest_core::bet::likelihood_ratio_bet;
use bettest_core::neyman_pearson::{all_or_nothing_bet, neyman_pearson_bet};
use bettest_core::protocol::{ConstantStrategy, Iid, RepeatedBet, SkepticStrategy};
use bettest_core::{run_protocol, CapitalProcess, DistributionModel, Outcome, RejectionRegion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::args::ProtocolRunArgs;
use crate::error::{CliError, CliResult};
use crate::inputs::{ingest_observations, parse_model, Column, InputLog};

/// Skeptic's strategy in a scenario file. Every strategy reinvests the
/// whole capital each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StrategySpec {
    Constant,
    LikelihoodRatio { alternative: String },
    NeymanPearson { alternative: String, alpha: f64 },
    AllOrNothing { region: RejectionRegion, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    /// Model the outcomes are drawn from.
    pub from: String,
    pub rounds: usize,
}

/// A protocol run as described in a JSON scenario file. Exactly one of
/// `outcomes`, `data` and `simulate` supplies Reality's moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolScenario {
    pub null: String,
    pub strategy: StrategySpec,
    #[serde(default)]
    pub outcomes: Option<Vec<Outcome>>,
    /// CSV path, relative to the scenario file.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub column: Option<String>,
    #[serde(default)]
    pub simulate: Option<Simulation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPayload {
    pub null: DistributionModel,
    pub strategy: StrategySpec,
    pub final_capital: f64,
    pub capital_process: CapitalProcess,
}

fn build_strategy(
    spec: &StrategySpec,
    null: &DistributionModel,
    inputs: &mut InputLog,
) -> CliResult<Box<dyn SkepticStrategy>> {
    Ok(match spec {
        StrategySpec::Constant => Box::new(ConstantStrategy),
        StrategySpec::LikelihoodRatio { alternative } => {
            let alt = parse_model(alternative, inputs).map_err(|e| e.at("strategy.alternative"))?;
            Box::new(RepeatedBet(likelihood_ratio_bet(null, &alt)?))
        }
        StrategySpec::NeymanPearson { alternative, alpha } => {
            let alt = parse_model(alternative, inputs).map_err(|e| e.at("strategy.alternative"))?;
            Box::new(RepeatedBet(neyman_pearson_bet(null, &alt, *alpha)?.bet))
        }
        StrategySpec::AllOrNothing { region, alpha } => {
            Box::new(RepeatedBet(all_or_nothing_bet(null, region, *alpha)?))
        }
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn run(args: &ProtocolRunArgs, seed: u64, inputs: &mut InputLog) -> CliResult<ProtocolPayload> {
    let bytes = inputs.read_file(&args.scenario)?;
    let source = args.scenario.display().to_string();
    let scenario: ProtocolScenario = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::validation("invalid_scenario", e.to_string())
            .at(format!("{source}: line {}", e.line()))
    })?;
    let null = parse_model(&scenario.null, inputs).map_err(|e| e.at("null"))?;
    let strategy = build_strategy(&scenario.strategy, &null, inputs)?;

    let base = args.scenario.parent().unwrap_or(Path::new("."));
    let outcomes = match (&scenario.outcomes, &scenario.data, &scenario.simulate) {
        (Some(ys), None, None) => ys.clone(),
        (None, Some(path), None) => {
            let column = scenario.column.as_deref().map(Column::parse);
            ingest_observations(&resolve(base, path), column.as_ref(), inputs)?
                .into_iter()
                .map(Outcome::Real)
                .collect()
        }
        (None, None, Some(sim)) => {
            let model = parse_model(&sim.from, inputs).map_err(|e| e.at("simulate.from"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..sim.rounds).map(|_| model.sample(&mut rng)).collect()
        }
        _ => {
            return Err(CliError::validation(
                "invalid_scenario",
                "give exactly one of `outcomes`, `data`, `simulate`",
            )
            .at(source))
        }
    };

    let process = run_protocol(&Iid(null.clone()), strategy.as_ref(), &outcomes)?;
    Ok(ProtocolPayload {
        null,
        strategy: scenario.strategy,
        final_capital: process.final_capital(),
        capital_process: process,
    })
}
