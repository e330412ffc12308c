//! Holt's linear exponential smoothing for the bivariate `(lower, upper)` series.
//!
//! ```text
//! ℓ_t = A y_t + (I - A)(ℓ_{t-1} + b_{t-1})
//! b_t = B (ℓ_t - ℓ_{t-1}) + (I - B) b_{t-1}
//! ŷ_{t+1} = ℓ_t + b_t
//! ```
//!
//! `A` and `B` are full 2x2 matrices whose entries are kept in `(0, 1)` through
//! a logistic map. They minimise the sum of squared one-step errors, found by
//! Nelder-Mead from several seeded starting points.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forecasters::{RawForecast, Repair};
use crate::interval_ts::{Interval, IntervalSeries};

type Mat = [[f64; 2]; 2];
type V2 = [f64; 2];

const LOGIT_BOUND: f64 = 30.0;
const MIN_HISTORY: usize = 6;
const SIMPLEX_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltConfig {
    pub starts: usize,
    pub max_iterations: u64,
    pub repair: Repair,
}

impl Default for HoltConfig {
    fn default() -> Self {
        Self { starts: 8, max_iterations: 400, repair: Repair::Swap }
    }
}

/// Fitted smoothing matrices and the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct HoltFit {
    pub alpha: Mat,
    pub beta: Mat,
    pub level: V2,
    pub trend: V2,
    /// Sum of squared one-step errors at the optimum.
    pub sse: f64,
    /// Best objective after each start, in start order.
    pub start_objectives: Vec<f64>,
}

impl HoltFit {
    pub fn forecast(&self) -> RawForecast {
        RawForecast { lower: self.level[0] + self.trend[0], upper: self.level[1] + self.trend[1] }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-LOGIT_BOUND, LOGIT_BOUND)).exp())
}

fn unpack(theta: &[f64]) -> (Mat, Mat) {
    let m = |o: usize| [[logistic(theta[o]), logistic(theta[o + 1])], [logistic(theta[o + 2]), logistic(theta[o + 3])]];
    (m(0), m(4))
}

fn mul(m: &Mat, v: V2) -> V2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Runs the recursions; returns SSE and the final `(ℓ, b)`.
fn filter(y: &[V2], a: &Mat, b: &Mat) -> (f64, V2, V2) {
    let mut level = y[0];
    let mut trend = [y[1][0] - y[0][0], y[1][1] - y[0][1]];
    let mut sse = 0.0;
    for (t, obs) in y.iter().enumerate().skip(1) {
        let pred = [level[0] + trend[0], level[1] + trend[1]];
        if t >= 2 {
            sse += (obs[0] - pred[0]).powi(2) + (obs[1] - pred[1]).powi(2);
        }
        let innov = [obs[0] - pred[0], obs[1] - pred[1]];
        let a_innov = mul(a, innov);
        let new_level = [pred[0] + a_innov[0], pred[1] + a_innov[1]];
        let step = [new_level[0] - level[0] - trend[0], new_level[1] - level[1] - trend[1]];
        let b_step = mul(b, step);
        trend = [trend[0] + b_step[0], trend[1] + b_step[1]];
        level = new_level;
    }
    (sse, level, trend)
}

struct Problem<'a> {
    y: &'a [V2],
}

impl Problem<'_> {
    fn sse(&self, theta: &[f64]) -> f64 {
        let (a, b) = unpack(theta);
        filter(self.y, &a, &b).0
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.sse(theta))
    }
}

fn minimise(problem: Problem<'_>, start: Vec<f64>, max_iterations: u64) -> (Vec<f64>, f64) {
    let start_cost = problem.sse(&start);
    let mut simplex = vec![start.clone()];
    for i in 0..start.len() {
        let mut v = start.clone();
        v[i] += SIMPLEX_STEP;
        simplex.push(v);
    }
    let solver = match NelderMead::new(simplex).with_sd_tolerance(1e-12) {
        Ok(s) => s,
        Err(_) => return (start, start_cost),
    };
    match Executor::new(problem, solver).configure(|s| s.max_iters(max_iterations)).run() {
        Ok(res) => {
            let state = res.state();
            match state.best_param.as_ref() {
                Some(p) if state.best_cost.is_finite() && state.best_cost <= start_cost => {
                    (p.clone(), state.best_cost)
                }
                _ => (start, start_cost),
            }
        }
        Err(e) => {
            log::debug!("Nelder-Mead stopped early: {e}");
            (start, start_cost)
        }
    }
}

/// Estimates `A` and `B` on `history`.
pub fn fit_holt(history: &IntervalSeries, cfg: &HoltConfig, seed: u64) -> Result<HoltFit> {
    if history.len() < MIN_HISTORY {
        return Err(Error::TooShort { needed: MIN_HISTORY, got: history.len() });
    }
    if cfg.starts == 0 {
        return Err(Error::InvalidParameter("need at least one starting point".into()));
    }
    let y: Vec<V2> = history.intervals().iter().map(|i| [i.lower(), i.upper()]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut start_objectives = Vec::with_capacity(cfg.starts);
    for _ in 0..cfg.starts {
        let start: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (theta, cost) = minimise(Problem { y: &y }, start, cfg.max_iterations);
        start_objectives.push(cost);
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((theta, cost));
        }
    }
    let (theta, _) = best.expect("at least one start");
    let (alpha, beta) = unpack(&theta);
    let (sse, level, trend) = filter(&y, &alpha, &beta);
    if !sse.is_finite() {
        return Err(Error::Numerical("Holt smoothing diverged".into()));
    }
    Ok(HoltFit { alpha, beta, level, trend, sse, start_objectives })
}

pub(crate) fn holt_raw(history: &IntervalSeries, cfg: &HoltConfig, seed: u64) -> Result<RawForecast> {
    Ok(fit_holt(history, cfg, seed)?.forecast())
}

/// One-step HoltI forecast of the period after `history`.
pub fn holt_interval_forecast(history: &IntervalSeries, cfg: &HoltConfig, seed: u64) -> Result<Interval> {
    holt_raw(history, cfg, seed)?.repaired(cfg.repair).0.into_interval()
}
