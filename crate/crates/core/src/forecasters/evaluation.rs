//! Rolling one-step-ahead evaluation over a hold-out window.
//!
//! Each model is selected on the estimation sample, then walks forward: the
//! forecast of hold-out period `t` uses every observation before `t`. A
//! replication repeats the whole procedure with seed `base_seed + r`.

use crate::error::{Error, Result};
use crate::forecasters::{ForecastRecord, ModelSpec, Repair};
use crate::interval_ts::IntervalSeries;
use crate::stats::{theil_u_bounds, AccuracySample};

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    /// Length of the hold-out window at the end of the series.
    pub holdout: usize,
    pub replications: usize,
    pub base_seed: u64,
    /// Models besides the naive benchmark, which is always evaluated.
    pub models: Vec<ModelSpec>,
    pub repair: Repair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationOutput {
    /// Sorted by replication, period, then model order.
    pub records: Vec<ForecastRecord>,
    /// U^I per replication for each model, naive first.
    pub scores: Vec<AccuracySample>,
    /// Number of swapped forecasts per model, aligned with `scores`.
    pub repairs: Vec<usize>,
}

impl EvaluationOutput {
    pub fn score(&self, model: &str) -> Option<&AccuracySample> {
        self.scores.iter().find(|s| s.model == model)
    }
}

pub fn rolling_evaluation(series: &IntervalSeries, cfg: &EvaluationConfig) -> Result<EvaluationOutput> {
    if cfg.replications == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    if cfg.holdout == 0 || cfg.holdout >= series.len() {
        return Err(Error::InvalidParameter(format!(
            "hold-out length {} must be between 1 and {}",
            cfg.holdout,
            series.len() - 1
        )));
    }
    let split = series.len() - cfg.holdout;
    let estimation = series.slice(0..split)?;
    let actuals = &series.intervals()[split - 1..];

    let mut models = vec![ModelSpec::Naive];
    models.extend(cfg.models.iter().filter(|m| **m != ModelSpec::Naive).cloned());
    let mut names: Vec<String> = Vec::with_capacity(models.len());
    for m in &models {
        let name = m.name();
        if names.contains(&name) {
            return Err(Error::InvalidParameter(format!("model {name} listed twice")));
        }
        names.push(name);
    }

    let mut scores: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.replications); models.len()];
    let mut repairs = vec![0usize; models.len()];
    let mut records = Vec::with_capacity(cfg.replications * cfg.holdout * models.len());
    for r in 0..cfg.replications {
        let seed = cfg.base_seed.wrapping_add(r as u64);
        let mut per_model = Vec::with_capacity(models.len());
        for (mi, spec) in models.iter().enumerate() {
            log::info!("replication {r}: {}", names[mi]);
            let prepared = spec.prepare(&estimation, seed)?;
            let mut preds = Vec::with_capacity(cfg.holdout);
            let mut flags = Vec::with_capacity(cfg.holdout);
            for t in split..series.len() {
                let raw = prepared.forecast_next(&series.slice(0..t)?, seed)?;
                let (fixed, swapped) = raw.repaired(cfg.repair);
                repairs[mi] += usize::from(swapped);
                preds.push((fixed.lower, fixed.upper));
                flags.push(swapped);
            }
            scores[mi].push(theil_u_bounds(actuals, &preds)?);
            per_model.push((preds, flags));
        }
        for h in 0..cfg.holdout {
            for (mi, (preds, flags)) in per_model.iter().enumerate() {
                records.push(ForecastRecord {
                    replication: r,
                    model: names[mi].clone(),
                    period: series.periods()[split + h],
                    pred_lower: preds[h].0,
                    pred_upper: preds[h].1,
                    actual: series.intervals()[split + h],
                    repaired: flags[h],
                });
            }
        }
    }
    let scores = names.into_iter().zip(scores).map(|(n, v)| AccuracySample::new(n, v)).collect();
    Ok(EvaluationOutput { records, scores, repairs })
}
