use bettest_core::calibration::{
    calibrated_alternative_tail, calibration_table, CalibrationRow, PValueFunction, Sidedness,
    TABLE_PVALUES,
};
use bettest_core::{DistributionModel, NormalModel};
use serde::{Deserialize, Serialize};

use crate::args::CalibrateArgs;
use crate::error::{CliError, CliResult};
use crate::inputs::{parse_model, InputLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeTail {
    pub deviation: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticCalibration {
    pub statistic_model: DistributionModel,
    pub sidedness: Sidedness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub value: f64,
    pub p_value: f64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternative_tail: Option<AlternativeTail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratePayload {
    pub rows: Vec<CalibrationRow>,
    /// The score when exactly one p-value was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<StatisticCalibration>,
}

pub fn run(args: &CalibrateArgs, inputs: &mut InputLog) -> CliResult<CalibratePayload> {
    let mut ps = args.p.clone();
    if args.table {
        ps.extend_from_slice(&TABLE_PVALUES);
    }
    if ps.is_empty() && args.null.is_none() {
        return Err(CliError::usage("give --p, --table, or --null with --y"));
    }
    let rows = calibration_table(&ps).map_err(|e| CliError::from(e).at("--p"))?;
    let score = (args.p.len() == 1 && !args.table).then(|| rows[0].betting_score);

    let statistic = match &args.null {
        None => None,
        Some(spec) => {
            let model = parse_model(spec, inputs).map_err(|e| e.at("--null"))?;
            let value = args
                .y
                .ok_or_else(|| CliError::usage("--null needs --y").at("--y"))?;
            let f = match args.center {
                None => PValueFunction::upper(model.clone()),
                Some(c) => {
                    let DistributionModel::Normal(n) = &model else {
                        return Err(CliError::usage("two-sided calibration needs a normal null")
                            .at("--center"));
                    };
                    PValueFunction::two_sided(NormalModel::new(n.mean(), n.sd())?, c)?
                }
            };
            let p_value = f.pvalue(value)?;
            let score = f.calibrated_score(value)?;
            let alternative_tail = match args.deviation {
                None => None,
                Some(d) => Some(AlternativeTail {
                    deviation: d,
                    probability: calibrated_alternative_tail(&f, d)?,
                }),
            };
            Some(StatisticCalibration {
                statistic_model: model,
                sidedness: f.sidedness,
                center: args.center,
                value,
                p_value,
                score,
                alternative_tail,
            })
        }
    };
    Ok(CalibratePayload {
        rows,
        score,
        statistic,
    })
}
