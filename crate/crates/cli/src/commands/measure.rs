use bettest_core::bounded::{
    measurement_capital_curve, measurement_grid, warranty_interval, HoeffdingStrategy, Side,
};
use bettest_core::warranty::Interval;
use bettest_core::warranty_set;
use serde::{Deserialize, Serialize};

use crate::args::{CombineArgs, MeasureArgs};
use crate::error::{CliError, CliResult};
use crate::inputs::{ingest_observations, Column, InputLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurePayload {
    pub n: usize,
    pub mean: f64,
    pub level: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// `mean +- c / sqrt(n)`.
    pub interval: Interval,
    pub grid: Vec<f64>,
    pub capital: Vec<f64>,
    /// Grid points where the capital stays below `level`.
    pub warranty_set: Vec<Interval>,
}

pub fn run(args: &MeasureArgs, inputs: &mut InputLog) -> CliResult<MeasurePayload> {
    if !(args.level > 1.0 && args.level.is_finite()) {
        return Err(CliError::usage(format!("level must exceed 1, got {}", args.level)).at("--level"));
    }
    let column = args.column.as_deref().map(Column::parse);
    let ys = ingest_observations(&args.data, column.as_ref(), inputs)?;
    let n = ys.len();
    let strategy = match (args.lambda, args.horizon) {
        (Some(l), _) => HoeffdingStrategy::new(l, Side::TwoSided)
            .map_err(|e| CliError::from(e).at("--lambda"))?,
        (None, Some(h)) => HoeffdingStrategy::for_horizon(h, args.level, Side::TwoSided)
            .map_err(|e| CliError::from(e).at("--horizon"))?,
        (None, None) => HoeffdingStrategy::for_horizon(n as u64, args.level, Side::TwoSided)?,
    };
    let grid = measurement_grid(&ys, args.grid_points).map_err(|e| CliError::from(e).at("--data"))?;
    let curve = measurement_capital_curve(&ys, &strategy, &grid)?;
    let set = warranty_set(&curve, 1.0 / args.level)?;
    Ok(MeasurePayload {
        n,
        mean: ys.iter().sum::<f64>() / n as f64,
        level: args.level,
        lambda: strategy.lambda,
        horizon: strategy.horizon,
        interval: warranty_interval(&ys, args.level)?,
        grid: curve.grid,
        capital: curve.capital,
        warranty_set: set.intervals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinePayload {
    pub count: usize,
    /// Score of reinvesting each bet's winnings in the next.
    pub product: f64,
    /// Score of splitting one unit evenly across the bets.
    pub mean: f64,
}

pub fn combine(args: &CombineArgs, inputs: &mut InputLog) -> CliResult<CombinePayload> {
    use bettest_core::protocol::{combine_parallel, combine_sequential};
    let column = args.column.as_deref().map(Column::parse);
    let scores = ingest_observations(&args.data, column.as_ref(), inputs)?;
    Ok(CombinePayload {
        count: scores.len(),
        product: combine_sequential(&scores)?,
        mean: combine_parallel(&scores)?,
    })
}
