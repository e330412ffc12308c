//! ε-support vector regression with linear and RBF kernels.

pub mod grid;
pub mod smo;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use grid::{default_grid, grid_search_cv, grid_search_cv_capped, linear_grid, rbf_grid, CvResult};

/// Default KKT violation tolerance of the solver.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
const MAX_ITERATIONS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    /// Row-major Gram matrix of `rows`.
    pub fn gram(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        let n = rows.len();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.eval(&rows[i], &rows[j]);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        g
    }
}

/// Hyperparameters of one ε-SVR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyper {
    pub cost: f64,
    pub epsilon: f64,
    pub kernel: KernelSpec,
}

impl SvrHyper {
    pub fn linear(cost: f64, epsilon: f64) -> Self {
        Self { cost, epsilon, kernel: KernelSpec::Linear }
    }

    pub fn rbf(cost: f64, epsilon: f64, gamma: f64) -> Self {
        Self { cost, epsilon, kernel: KernelSpec::Rbf { gamma } }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::InvalidParameter(format!("cost must be positive, got {}", self.cost)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if let KernelSpec::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
            }
        }
        Ok(())
    }
}

/// Per-feature affine map to zero mean and unit standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; d];
        for row in x {
            for ((s, v), m) in std.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        // Constant features are centred but left unscaled.
        let std = std.into_iter().map(|v| if v > 1e-300 { v.sqrt() } else { 1.0 }).collect();
        Self { mean, std }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// Trained ε-SVR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub hyper: SvrHyper,
    pub standardization: Standardization,
    /// Standardized training rows with non-zero coefficient.
    pub support_inputs: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
}

/// Diagnostics from a training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Option<Vec<f64>>,
    /// `β_i` for every training row, in input order.
    pub all_coefs: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub tolerance: f64,
    /// SMO iteration cap; hitting it leaves `converged` false.
    pub max_iterations: usize,
    pub record_objective: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, max_iterations: MAX_ITERATIONS, record_objective: false }
    }
}

pub(crate) fn check_inputs(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptyInput("training rows"));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let d = x[0].len();
    for row in x {
        if row.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(d)
}

/// Trains an ε-SVR on rows `x` and targets `y`.
pub fn train(x: &[Vec<f64>], y: &[f64], hyper: &SvrHyper) -> Result<SvrModel> {
    train_with(x, y, hyper, TrainOptions::default()).map(|(m, _)| m)
}

pub fn train_with(x: &[Vec<f64>], y: &[f64], hyper: &SvrHyper, opts: TrainOptions) -> Result<(SvrModel, TrainReport)> {
    check_inputs(x, y)?;
    hyper.validate()?;
    let standardization = Standardization::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardization.apply(r)).collect();
    let gram = hyper.kernel.gram(&z);
    Ok(fit_standardized(z, &gram, y, hyper, standardization, opts))
}

/// Trains on rows that are already standardized, with a precomputed Gram matrix.
pub(crate) fn fit_standardized(
    z: Vec<Vec<f64>>,
    gram: &[f64],
    y: &[f64],
    hyper: &SvrHyper,
    standardization: Standardization,
    opts: TrainOptions,
) -> (SvrModel, TrainReport) {
    let params = smo::SmoParams {
        cost: hyper.cost,
        epsilon: hyper.epsilon,
        tolerance: opts.tolerance,
        max_iterations: opts.max_iterations,
        record_objective: opts.record_objective,
    };
    let sol = smo::solve(gram, y, &params);
    if !sol.converged {
        log::warn!("SMO stopped at the iteration cap ({} iterations)", sol.iterations);
    }
    let (support_inputs, dual_coefs): (Vec<_>, Vec<_>) =
        z.into_iter().zip(&sol.coefs).filter(|(_, &b)| b != 0.0).map(|(r, &b)| (r, b)).unzip();
    let model = SvrModel { hyper: *hyper, standardization, support_inputs, dual_coefs, bias: sol.bias };
    let report = TrainReport {
        iterations: sol.iterations,
        converged: sol.converged,
        objective_trace: sol.objective_trace,
        all_coefs: sol.coefs,
    };
    (model, report)
}

impl SvrModel {
    pub fn input_dim(&self) -> usize {
        self.standardization.mean.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        let z = self.standardization.apply(x);
        Ok(self.decision(&z))
    }

    fn decision(&self, z: &[f64]) -> f64 {
        self.support_inputs
            .iter()
            .zip(&self.dual_coefs)
            .map(|(s, b)| b * self.hyper.kernel.eval(s, z))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
