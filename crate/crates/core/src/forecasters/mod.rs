//! One-step-ahead interval forecasters and the rolling hold-out evaluation.

mod decomp_svr;
pub mod evaluation;
pub mod holt;
pub mod vecm;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_ts::{Interval, IntervalSeries, Transform, YearMonth};

pub use decomp_svr::{bemd_svr_forecast, emd_svr_forecast, ComponentTraining, PipelineConfig, TunedPipeline};
pub use evaluation::{rolling_evaluation, EvaluationConfig, EvaluationOutput};
pub use holt::{holt_interval_forecast, HoltConfig, HoltFit};
pub use vecm::{vec_forecast, VecConfig};

/// What to do with a forecast whose lower bound exceeds its upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Repair {
    Swap,
    None,
}

impl std::str::FromStr for Repair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swap" => Ok(Repair::Swap),
            "none" => Ok(Repair::None),
            other => Err(Error::InvalidParameter(format!("unknown repair rule {other:?}"))),
        }
    }
}

/// A forecast before any ordering repair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawForecast {
    pub lower: f64,
    pub upper: f64,
}

impl RawForecast {
    pub fn is_ordered(&self) -> bool {
        self.lower <= self.upper
    }

    /// Applies `repair`; the flag reports whether the bounds were swapped.
    pub fn repaired(self, repair: Repair) -> (RawForecast, bool) {
        match repair {
            Repair::Swap if !self.is_ordered() => {
                log::info!("swapping inverted forecast [{}, {}]", self.lower, self.upper);
                (RawForecast { lower: self.upper, upper: self.lower }, true)
            }
            _ => (self, false),
        }
    }

    pub fn into_interval(self) -> Result<Interval> {
        Interval::new(self.lower, self.upper)
    }
}

/// Forecasting models compared in the evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Naive,
    BemdSvr(PipelineConfig),
    EmdSvr(PipelineConfig),
    Holt(HoltConfig),
    Vec(VecConfig),
}

impl ModelSpec {
    pub fn name(&self) -> String {
        match self {
            ModelSpec::Naive => "Naive".into(),
            ModelSpec::BemdSvr(c) => format!("BEMD-SVR({})", c.transform),
            ModelSpec::EmdSvr(_) => "EMD-SVR".into(),
            ModelSpec::Holt(_) => "HoltI".into(),
            ModelSpec::Vec(_) => "VEC".into(),
        }
    }

    /// Model selection on the estimation sample.
    pub fn prepare(&self, estimation: &IntervalSeries, seed: u64) -> Result<PreparedModel> {
        Ok(match self {
            ModelSpec::Naive => PreparedModel::Naive,
            ModelSpec::BemdSvr(cfg) => PreparedModel::Decomposition(TunedPipeline::tune_bemd(estimation, cfg, seed)?),
            ModelSpec::EmdSvr(cfg) => PreparedModel::Decomposition(TunedPipeline::tune_emd(estimation, cfg, seed)?),
            ModelSpec::Holt(cfg) => PreparedModel::Holt(*cfg),
            ModelSpec::Vec(cfg) => PreparedModel::Vec(*cfg),
        })
    }
}

/// A model ready to walk forward through the hold-out window.
#[derive(Debug, Clone)]
pub enum PreparedModel {
    Naive,
    Decomposition(TunedPipeline),
    Holt(HoltConfig),
    Vec(VecConfig),
}

impl PreparedModel {
    /// Forecast of the period following `history`.
    pub fn forecast_next(&self, history: &IntervalSeries, seed: u64) -> Result<RawForecast> {
        match self {
            PreparedModel::Naive => {
                let last = naive_forecast(history)?;
                Ok(RawForecast { lower: last.lower(), upper: last.upper() })
            }
            PreparedModel::Decomposition(p) => p.forecast_next(history, seed),
            PreparedModel::Holt(cfg) => holt::holt_raw(history, cfg, seed),
            PreparedModel::Vec(cfg) => vecm::vec_raw(history, cfg),
        }
    }
}

/// Random-walk forecast: the last observed interval.
pub fn naive_forecast(history: &IntervalSeries) -> Result<Interval> {
    if history.is_empty() {
        return Err(Error::EmptyInput("history"));
    }
    Ok(history.last())
}

/// One hold-out forecast and its realised value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRecord {
    pub replication: usize,
    pub model: String,
    pub period: YearMonth,
    pub pred_lower: f64,
    pub pred_upper: f64,
    pub actual: Interval,
    pub repaired: bool,
}

impl fmt::Display for ForecastRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            self.replication,
            self.model,
            self.period.year,
            self.period.month,
            self.pred_lower,
            self.pred_upper,
            self.actual.lower(),
            self.actual.upper(),
            u8::from(self.repaired)
        )
    }
}

/// Header of the forecast records CSV.
pub const RECORDS_HEADER: &str =
    "replication,model,year,month,pred_lower,pred_upper,actual_lower,actual_upper,repaired";

/// Both bounds of each component for the split `Transform` convention.
pub(crate) fn split_bounds(t: Transform, re: f64, im: f64) -> (f64, f64) {
    match t {
        Transform::Trans1 => (re, im),
        Transform::Trans2 => (im, re),
    }
}
