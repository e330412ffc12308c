//! Vector error-correction model for the bound pair.
//!
//! With `R_t = U_t - L_t` acting as the cointegrating combination of the bounds,
//! each differenced bound is regressed by OLS on
//!
//! ```text
//! [1, ΔL_{t-1..t-p}, ΔU_{t-1..t-p}, R_{t-1}]
//! ```
//!
//! and the lag order `p` minimises BIC over `1..=max_lag` on a common sample.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forecasters::{RawForecast, Repair};
use crate::interval_ts::{Interval, IntervalSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecConfig {
    pub max_lag: usize,
    /// Include the lagged spread `R_{t-1}` as a regressor.
    pub include_ec: bool,
    /// Include lags of the other bound's differences.
    pub include_cross: bool,
    pub repair: Repair,
}

impl Default for VecConfig {
    fn default() -> Self {
        Self { max_lag: 4, include_ec: true, include_cross: true, repair: Repair::Swap }
    }
}

impl VecConfig {
    pub fn min_history(&self) -> usize {
        3 * self.max_lag + 10
    }
}

/// Fitted equations for one lag order.
#[derive(Debug, Clone)]
pub struct VecFit {
    pub lag: usize,
    pub bic: f64,
    /// Coefficients of the ΔL and ΔU equations, in design column order.
    pub coef_lower: Vec<f64>,
    pub coef_upper: Vec<f64>,
    next_row: Vec<f64>,
    last: (f64, f64),
}

impl VecFit {
    pub fn forecast(&self) -> RawForecast {
        let dot = |c: &[f64]| c.iter().zip(&self.next_row).map(|(a, b)| a * b).sum::<f64>();
        RawForecast { lower: self.last.0 + dot(&self.coef_lower), upper: self.last.1 + dot(&self.coef_upper) }
    }
}

fn design_row(dl: &[f64], du: &[f64], r: &[f64], t: usize, p: usize, cfg: &VecConfig) -> Vec<f64> {
    // `t` indexes the differenced series; dl[t] = L[t+1] - L[t].
    let mut row = vec![1.0];
    row.extend((1..=p).map(|k| dl[t - k]));
    if cfg.include_cross {
        row.extend((1..=p).map(|k| du[t - k]));
    }
    if cfg.include_ec {
        row.push(r[t]);
    }
    row
}

/// Least squares through an SVD pseudo-inverse, so collinear designs still
/// get the minimum-norm solution.
fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10 * x.nrows().max(x.ncols()) as f64;
    svd.solve(y, eps).map_err(|e| Error::Numerical(e.to_string()))
}

/// Fits every lag order on the same sample and keeps the BIC minimiser.
pub fn fit_vec(history: &IntervalSeries, cfg: &VecConfig) -> Result<VecFit> {
    if cfg.max_lag == 0 {
        return Err(Error::InvalidParameter("max_lag must be at least 1".into()));
    }
    let n = history.len();
    if n < cfg.min_history() {
        return Err(Error::TooShort { needed: cfg.min_history(), got: n });
    }
    let l = history.lower();
    let u = history.upper();
    let dl: Vec<f64> = l.windows(2).map(|w| w[1] - w[0]).collect();
    let du: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    if dl.iter().chain(&du).all(|&d| d == 0.0) {
        return Err(Error::RankDeficient("both bounds are constant"));
    }
    let r: Vec<f64> = l.iter().zip(&u).map(|(a, b)| b - a).collect();

    let t0 = cfg.max_lag;
    let rows = dl.len() - t0;
    let y_l = DVector::from_iterator(rows, dl[t0..].iter().copied());
    let y_u = DVector::from_iterator(rows, du[t0..].iter().copied());

    let mut best: Option<VecFit> = None;
    for p in 1..=cfg.max_lag {
        let design: Vec<Vec<f64>> = (t0..dl.len()).map(|t| design_row(&dl, &du, &r, t, p, cfg)).collect();
        let k = design[0].len();
        let x = DMatrix::from_fn(rows, k, |i, j| design[i][j]);
        let b_l = least_squares(&x, &y_l)?;
        let b_u = least_squares(&x, &y_u)?;
        let e_l = &y_l - &x * &b_l;
        let e_u = &y_u - &x * &b_u;
        let tn = rows as f64;
        let s11 = e_l.dot(&e_l) / tn;
        let s22 = e_u.dot(&e_u) / tn;
        let s12 = e_l.dot(&e_u) / tn;
        // A perfect fit gives ln 0; floor the determinant so ties resolve by
        // the penalty term, which prefers the smallest order.
        let det = (s11 * s22 - s12 * s12).max(f64::MIN_POSITIVE);
        let bic = det.ln() + 2.0 * k as f64 * tn.ln() / tn;
        if best.as_ref().is_none_or(|b| bic < b.bic) {
            best = Some(VecFit {
                lag: p,
                bic,
                coef_lower: b_l.iter().copied().collect(),
                coef_upper: b_u.iter().copied().collect(),
                next_row: design_row(&dl, &du, &r, dl.len(), p, cfg),
                last: (l[n - 1], u[n - 1]),
            });
        }
    }
    Ok(best.expect("max_lag >= 1"))
}

pub(crate) fn vec_raw(history: &IntervalSeries, cfg: &VecConfig) -> Result<RawForecast> {
    let f = fit_vec(history, cfg)?.forecast();
    if !(f.lower.is_finite() && f.upper.is_finite()) {
        return Err(Error::Numerical("non-finite VEC forecast".into()));
    }
    Ok(f)
}

/// One-step VEC forecast of the period after `history`.
pub fn vec_forecast(history: &IntervalSeries, cfg: &VecConfig) -> Result<Interval> {
    vec_raw(history, cfg)?.repaired(cfg.repair).0.into_interval()
}
