//! Decomposition-and-ensemble forecasting: BEMD-SVR and its univariate
//! EMD-SVR counterpart.
//!
//! 1. Map the interval series to a complex signal (BEMD only).
//! 2. Decompose into IMFs plus a residual.
//! 3. Forecast each component of each bound one step ahead with its own SVR
//!    on lagged values of that component (RBF for IMFs, linear for the residual).
//! 4. Combine the component forecasts of each bound with a linear-kernel SVR
//!    trained on in-sample `(components at t) -> bound at t` pairs.

use std::sync::Mutex;

use crate::bemd::{bemd_decompose, emd_decompose, SiftConfig};
use crate::error::{Error, Result};
use crate::forecasters::{split_bounds, RawForecast, Repair};
use crate::interval_ts::{Interval, IntervalSeries, Scale, Transform};
use crate::svr::{self, grid::exp2_range, SvrHyper, SvrModel, TrainOptions};

/// How the component models get their training pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentTraining {
    /// Lag embedding of the components of one decomposition of the history.
    /// End effects make the last values, which feed the forecast, unlike the
    /// interior values the models were trained on.
    InSample,
    /// Each pair comes from decompositions of growing prefixes of the history,
    /// so training inputs are end values just like the forecast input.
    Expanding,
}

impl std::str::FromStr for ComponentTraining {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in-sample" => Ok(Self::InSample),
            "expanding" => Ok(Self::Expanding),
            other => Err(Error::InvalidParameter(format!("unknown component training {other:?}"))),
        }
    }
}

/// Configuration shared by BEMD-SVR and EMD-SVR.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub transform: Transform,
    pub sift: SiftConfig,
    /// Autoregressive lag order of the component models.
    pub lag: usize,
    /// Candidates for IMF models (RBF kernel).
    pub imf_grid: Vec<SvrHyper>,
    /// Candidates for residual models (linear kernel).
    pub residue_grid: Vec<SvrHyper>,
    /// Candidates for the ensemble model (linear kernel).
    pub ensemble_grid: Vec<SvrHyper>,
    pub folds: usize,
    /// SMO iteration cap for every fit. Linear kernels on strongly collinear
    /// lag vectors can otherwise take millions of iterations.
    pub max_smo_iterations: usize,
    pub repair: Repair,
    pub training: ComponentTraining,
    /// Re-run the grid searches at every hold-out step.
    pub retune_each_step: bool,
    /// Take logs of a raw-scale history internally and exponentiate the forecast.
    pub log_inputs: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let costs = exp2_range(-4, 10, 2);
        // Linear-kernel SMO slows down sharply for large C on collinear lag
        // features, and the linear models never need much capacity.
        let linear_costs = exp2_range(-4, 2, 2);
        let epsilons = exp2_range(-8, -1, 2);
        Self {
            transform: Transform::Trans1,
            sift: SiftConfig::default(),
            lag: 12,
            imf_grid: svr::rbf_grid(&costs, &epsilons, &exp2_range(-6, 4, 2)),
            residue_grid: svr::linear_grid(&linear_costs, &epsilons),
            ensemble_grid: svr::linear_grid(&linear_costs, &epsilons),
            folds: 5,
            max_smo_iterations: 50_000,
            repair: Repair::Swap,
            training: ComponentTraining::Expanding,
            retune_each_step: false,
            log_inputs: false,
        }
    }
}

impl PipelineConfig {
    /// Smaller grids for quick runs: `C ∈ {2^-2, 2^2, 2^6}` (linear: `{2^-2, 2^0, 2^2}`),
    /// `ε ∈ {2^-7, 2^-4}`, `γ ∈ {2^-5, 2^-2, 2^1}`.
    pub fn compact() -> Self {
        let costs = [0.25, 4.0, 64.0];
        let epsilons = [2f64.powi(-7), 2f64.powi(-4)];
        Self {
            imf_grid: svr::rbf_grid(&costs, &epsilons, &[2f64.powi(-5), 0.25, 2.0]),
            residue_grid: svr::linear_grid(&[0.25, 1.0, 4.0], &epsilons),
            ensemble_grid: svr::linear_grid(&[0.25, 1.0, 4.0], &epsilons),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sift.validate()?;
        if self.lag == 0 {
            return Err(Error::InvalidParameter("lag order must be at least 1".into()));
        }
        if self.imf_grid.is_empty() || self.residue_grid.is_empty() || self.ensemble_grid.is_empty() {
            return Err(Error::EmptyInput("hyperparameter grid"));
        }
        if self.max_smo_iterations == 0 {
            return Err(Error::InvalidParameter("SMO iteration cap must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidParameter("need at least 2 folds".into()));
        }
        Ok(())
    }

    /// Shortest prefix decomposed when training on expanding windows.
    fn first_prefix(&self) -> usize {
        (2 * self.lag).max(24)
    }

    /// Shortest usable history.
    pub fn min_history(&self) -> usize {
        match self.training {
            ComponentTraining::InSample => (self.lag + 2).max(24).max(self.lag + 2 * self.folds),
            ComponentTraining::Expanding => self.first_prefix() + 2 * self.folds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Bivariate,
    Univariate,
}

/// Component series of both bounds, IMFs first and residual last.
struct BoundComponents {
    lower: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

/// Hyperparameters selected for one bound.
#[derive(Debug, Clone, PartialEq)]
struct BoundHypers {
    components: Vec<SvrHyper>,
    ensemble: SvrHyper,
}

/// Pipeline with tuned hyperparameters and a fixed number of IMFs.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedPipeline {
    cfg: PipelineConfig,
    method: Method,
    num_imfs: usize,
    lower: BoundHypers,
    upper: BoundHypers,
    cache: PrefixCache,
}

fn working_series(history: &IntervalSeries, cfg: &PipelineConfig) -> Result<IntervalSeries> {
    if cfg.log_inputs && history.scale() == Scale::Raw {
        history.log_transform()
    } else {
        Ok(history.clone())
    }
}

fn decompose(series: &IntervalSeries, cfg: &PipelineConfig, method: Method, imfs: Option<usize>) -> Result<BoundComponents> {
    if imfs == Some(0) {
        // The tuned layout has no IMFs: the whole series is the residual.
        return Ok(BoundComponents { lower: vec![series.lower()], upper: vec![series.upper()] });
    }
    let sift = SiftConfig { max_imfs: imfs.or(cfg.sift.max_imfs), ..cfg.sift.clone() };
    match method {
        Method::Bivariate => {
            let c = series.to_complex(cfg.transform);
            let mut d = bemd_decompose(&c, &sift)?;
            if let Some(k) = imfs {
                d = d.padded_to(k);
            }
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for comp in d.components() {
                let (l, u): (Vec<f64>, Vec<f64>) =
                    comp.iter().map(|z| split_bounds(cfg.transform, z.re, z.im)).unzip();
                lower.push(l);
                upper.push(u);
            }
            Ok(BoundComponents { lower, upper })
        }
        Method::Univariate => {
            let dl = emd_decompose(&series.lower(), &sift)?;
            let du = emd_decompose(&series.upper(), &sift)?;
            // Both bounds share one component layout so that the tuned
            // hyperparameters line up with the components at forecast time.
            let k = imfs.unwrap_or_else(|| dl.num_imfs().max(du.num_imfs()));
            let collect = |d: crate::bemd::Decomposition<f64>| -> Vec<Vec<f64>> {
                d.padded_to(k).components().cloned().collect()
            };
            Ok(BoundComponents { lower: collect(dl), upper: collect(du) })
        }
    }
}

fn lag_embedding(series: &[f64], lag: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    (lag..series.len()).map(|t| (series[t - lag..t].to_vec(), series[t])).unzip()
}

/// Training data and forecast inputs of one bound.
struct BoundData {
    /// Per component: lag vectors, targets, and the input for the forecast.
    comp_x: Vec<Vec<Vec<f64>>>,
    comp_y: Vec<Vec<f64>>,
    comp_next: Vec<Vec<f64>>,
    /// Component values at `t` against the bound at `t`.
    ens_x: Vec<Vec<f64>>,
    ens_y: Vec<f64>,
}

fn in_sample_data(components: &[Vec<f64>], target: &[f64], lag: usize) -> BoundData {
    let (comp_x, comp_y) = components.iter().map(|c| lag_embedding(c, lag)).unzip();
    let comp_next = components.iter().map(|c| c[c.len() - lag..].to_vec()).collect();
    let n = target.len();
    let ens_x = (0..n).map(|t| components.iter().map(|c| c[t]).collect()).collect();
    BoundData { comp_x, comp_y, comp_next, ens_x, ens_y: target.to_vec() }
}

/// What a model needs from the decomposition of one prefix: the last `lag`
/// values and the end value of every component of both bounds.
#[derive(Debug, Clone, PartialEq)]
struct PrefixFeatures {
    lags: [Vec<Vec<f64>>; 2],
    ends: [Vec<f64>; 2],
}

impl PrefixFeatures {
    fn of(comps: &BoundComponents, lag: usize) -> Self {
        let tail = |cs: &[Vec<f64>]| cs.iter().map(|c| c[c.len() - lag..].to_vec()).collect::<Vec<_>>();
        let end = |cs: &[Vec<f64>]| cs.iter().map(|c| c[c.len() - 1]).collect::<Vec<_>>();
        Self { lags: [tail(&comps.lower), tail(&comps.upper)], ends: [end(&comps.lower), end(&comps.upper)] }
    }
}

/// Builds pairs from consecutive prefixes: the lag vector of a component in
/// the decomposition ending at `t` is paired with that component's end value
/// in the decomposition ending at `t + 1`.
fn expanding_data(feats: &[PrefixFeatures], target: &[f64], bound: usize) -> BoundData {
    let k = feats[0].ends[bound].len();
    let mut comp_x = vec![Vec::with_capacity(feats.len()); k];
    let mut comp_y = vec![Vec::with_capacity(feats.len()); k];
    for w in feats.windows(2) {
        for j in 0..k {
            comp_x[j].push(w[0].lags[bound][j].clone());
            comp_y[j].push(w[1].ends[bound][j]);
        }
    }
    let last = &feats[feats.len() - 1];
    let offset = target.len() - feats.len();
    BoundData {
        comp_x,
        comp_y,
        comp_next: last.lags[bound].clone(),
        ens_x: feats.iter().map(|f| f.ends[bound].clone()).collect(),
        ens_y: target[offset..].to_vec(),
    }
}

/// Prefix decompositions from earlier calls, reused while the history only grows.
#[derive(Debug, Default)]
struct PrefixCache(Mutex<Option<(Vec<Interval>, Vec<PrefixFeatures>)>>);

impl Clone for PrefixCache {
    fn clone(&self) -> Self {
        Self(Mutex::new(self.0.lock().expect("cache lock").clone()))
    }
}

impl PartialEq for PrefixCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

fn tune_bound(data: &BoundData, cfg: &PipelineConfig, seed: u64) -> Result<BoundHypers> {
    let last = data.comp_x.len() - 1;
    let mut chosen = Vec::with_capacity(data.comp_x.len());
    for (j, (x, y)) in data.comp_x.iter().zip(&data.comp_y).enumerate() {
        let grid = if j == last { &cfg.residue_grid } else { &cfg.imf_grid };
        let seed = seed.wrapping_add(j as u64);
        chosen.push(svr::grid_search_cv_capped(x, y, grid, cfg.folds, seed, cfg.max_smo_iterations)?.best);
    }
    let ensemble =
        svr::grid_search_cv_capped(&data.ens_x, &data.ens_y, &cfg.ensemble_grid, cfg.folds, seed, cfg.max_smo_iterations)?
            .best;
    Ok(BoundHypers { components: chosen, ensemble })
}

fn fit(x: &[Vec<f64>], y: &[f64], h: &SvrHyper, cap: usize) -> Result<SvrModel> {
    let opts = TrainOptions { max_iterations: cap, ..TrainOptions::default() };
    Ok(svr::train_with(x, y, h, opts)?.0)
}

/// Steps 3 and 4 for one bound with fixed hyperparameters.
fn forecast_bound(data: &BoundData, hypers: &BoundHypers, cap: usize) -> Result<f64> {
    let mut next = Vec::with_capacity(data.comp_x.len());
    for j in 0..data.comp_x.len() {
        let model = fit(&data.comp_x[j], &data.comp_y[j], &hypers.components[j], cap)?;
        next.push(model.predict(&data.comp_next[j])?);
    }
    fit(&data.ens_x, &data.ens_y, &hypers.ensemble, cap)?.predict(&next)
}

impl TunedPipeline {
    pub fn tune_bemd(estimation: &IntervalSeries, cfg: &PipelineConfig, seed: u64) -> Result<Self> {
        Self::tune(estimation, cfg, Method::Bivariate, seed)
    }

    pub fn tune_emd(estimation: &IntervalSeries, cfg: &PipelineConfig, seed: u64) -> Result<Self> {
        Self::tune(estimation, cfg, Method::Univariate, seed)
    }

    fn tune(estimation: &IntervalSeries, cfg: &PipelineConfig, method: Method, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if estimation.len() < cfg.min_history() {
            return Err(Error::TooShort { needed: cfg.min_history(), got: estimation.len() });
        }
        let series = working_series(estimation, cfg)?;
        let num_imfs = decompose(&series, cfg, method, None)?.lower.len() - 1;
        let mut tuned = Self {
            cfg: cfg.clone(),
            method,
            num_imfs,
            lower: BoundHypers { components: vec![], ensemble: cfg.ensemble_grid[0] },
            upper: BoundHypers { components: vec![], ensemble: cfg.ensemble_grid[0] },
            cache: PrefixCache::default(),
        };
        let [lower, upper] = tuned.bound_data(&series)?;
        tuned.lower = tune_bound(&lower, cfg, seed)?;
        tuned.upper = tune_bound(&upper, cfg, seed.wrapping_add(1 << 32))?;
        Ok(tuned)
    }

    pub fn num_imfs(&self) -> usize {
        self.num_imfs
    }

    fn bound_data(&self, series: &IntervalSeries) -> Result<[BoundData; 2]> {
        let lag = self.cfg.lag;
        match self.cfg.training {
            ComponentTraining::InSample => {
                let comps = decompose(series, &self.cfg, self.method, Some(self.num_imfs))?;
                Ok([
                    in_sample_data(&comps.lower, &series.lower(), lag),
                    in_sample_data(&comps.upper, &series.upper(), lag),
                ])
            }
            ComponentTraining::Expanding => {
                let feats = self.prefix_features(series)?;
                Ok([expanding_data(&feats, &series.lower(), 0), expanding_data(&feats, &series.upper(), 1)])
            }
        }
    }

    /// Features of every prefix `[0, t)` with `t` from the first usable
    /// length up to the whole series.
    fn prefix_features(&self, series: &IntervalSeries) -> Result<Vec<PrefixFeatures>> {
        let mut guard = self.cache.0.lock().expect("cache lock");
        let data = series.intervals();
        let mut feats = match guard.take() {
            Some((cached, feats)) if cached.len() <= data.len() && cached[..] == data[..cached.len()] => feats,
            _ => Vec::new(),
        };
        let first = self.cfg.first_prefix();
        for end in first + feats.len()..=data.len() {
            let comps = decompose(&series.slice(0..end)?, &self.cfg, self.method, Some(self.num_imfs))?;
            feats.push(PrefixFeatures::of(&comps, self.cfg.lag));
        }
        *guard = Some((data.to_vec(), feats.clone()));
        Ok(feats)
    }

    /// Decomposes `history` into the tuned component layout, refits every SVR
    /// with the tuned hyperparameters and forecasts the next interval.
    pub fn forecast_next(&self, history: &IntervalSeries, seed: u64) -> Result<RawForecast> {
        if history.len() < self.cfg.min_history() {
            return Err(Error::TooShort { needed: self.cfg.min_history(), got: history.len() });
        }
        if self.cfg.retune_each_step {
            let retuned = Self::tune(history, &self.cfg, self.method, seed)?;
            return retuned.forecast_fixed(history);
        }
        self.forecast_fixed(history)
    }

    fn forecast_fixed(&self, history: &IntervalSeries) -> Result<RawForecast> {
        let series = working_series(history, &self.cfg)?;
        let [lower_data, upper_data] = self.bound_data(&series)?;
        let cap = self.cfg.max_smo_iterations;
        let mut lower = forecast_bound(&lower_data, &self.lower, cap)?;
        let mut upper = forecast_bound(&upper_data, &self.upper, cap)?;
        if series.scale() != history.scale() {
            lower = lower.exp();
            upper = upper.exp();
        }
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::Numerical("non-finite forecast".into()));
        }
        Ok(RawForecast { lower, upper })
    }
}

fn finish(raw: RawForecast, repair: Repair) -> Result<Interval> {
    raw.repaired(repair).0.into_interval()
}

/// BEMD-SVR one-step forecast of the period after `history`.
pub fn bemd_svr_forecast(history: &IntervalSeries, cfg: &PipelineConfig, seed: u64) -> Result<Interval> {
    let tuned = TunedPipeline::tune_bemd(history, cfg, seed)?;
    finish(tuned.forecast_next(history, seed)?, cfg.repair)
}

/// EMD-SVR one-step forecast: each bound decomposed and modelled on its own.
pub fn emd_svr_forecast(history: &IntervalSeries, cfg: &PipelineConfig, seed: u64) -> Result<Interval> {
    let tuned = TunedPipeline::tune_emd(history, cfg, seed)?;
    finish(tuned.forecast_next(history, seed)?, cfg.repair)
}
