//! Grid search over SVR hyperparameters scored by k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_inputs, smo, KernelSpec, Standardization, SvrHyper, MAX_ITERATIONS};
use crate::error::{Error, Result};

/// Solver tolerance used while scoring grid points.
const CV_TOLERANCE: f64 = 1e-3;

/// Powers of two from `2^lo` to `2^hi` in steps of `2^step`.
pub fn exp2_range(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(|e| 2f64.powi(e)).collect()
}

/// Cartesian product `C x ε x γ` of RBF hyperparameters.
pub fn rbf_grid(costs: &[f64], epsilons: &[f64], gammas: &[f64]) -> Vec<SvrHyper> {
    let mut out = Vec::with_capacity(costs.len() * epsilons.len() * gammas.len());
    for &g in gammas {
        for &c in costs {
            for &e in epsilons {
                out.push(SvrHyper::rbf(c, e, g));
            }
        }
    }
    out
}

/// Cartesian product `C x ε` of linear-kernel hyperparameters.
pub fn linear_grid(costs: &[f64], epsilons: &[f64]) -> Vec<SvrHyper> {
    costs.iter().flat_map(|&c| epsilons.iter().map(move |&e| SvrHyper::linear(c, e))).collect()
}

/// `C ∈ {2^-4 … 2^10}`, `ε ∈ {2^-8 … 2^-1}`, `γ ∈ {2^-6 … 2^4}`, each a ×4 ladder.
pub fn default_grid() -> Vec<SvrHyper> {
    rbf_grid(&exp2_range(-4, 10, 2), &exp2_range(-8, -1, 2), &exp2_range(-6, 4, 2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best: SvrHyper,
    /// Mean fold RMSE of every grid point, in grid order.
    pub scores: Vec<f64>,
}

/// Row indices of each fold: seeded shuffle, then contiguous split.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    folds
}

struct FoldData {
    train_y: Vec<f64>,
    valid_y: Vec<f64>,
    train_z: Vec<Vec<f64>>,
    valid_z: Vec<Vec<f64>>,
}

/// Kernel matrices of one fold for one kernel.
struct FoldKernel {
    gram: Vec<f64>,
    /// `valid x train`, row-major.
    cross: Vec<f64>,
}

impl FoldData {
    fn kernel(&self, k: &KernelSpec) -> FoldKernel {
        let cross = self
            .valid_z
            .iter()
            .flat_map(|v| self.train_z.iter().map(move |t| k.eval(v, t)))
            .collect();
        FoldKernel { gram: k.gram(&self.train_z), cross }
    }

    fn rmse(&self, fk: &FoldKernel, h: &SvrHyper, max_iterations: usize) -> f64 {
        let params = smo::SmoParams {
            cost: h.cost,
            epsilon: h.epsilon,
            tolerance: CV_TOLERANCE,
            max_iterations,
            record_objective: false,
        };
        let sol = smo::solve(&fk.gram, &self.train_y, &params);
        let nt = self.train_y.len();
        let sse: f64 = self
            .valid_y
            .iter()
            .enumerate()
            .map(|(v, y)| {
                let row = &fk.cross[v * nt..(v + 1) * nt];
                let f: f64 = row.iter().zip(&sol.coefs).map(|(k, b)| k * b).sum::<f64>() + sol.bias;
                (y - f) * (y - f)
            })
            .sum();
        (sse / self.valid_y.len() as f64).sqrt()
    }
}

/// Selects the grid point with the lowest mean fold RMSE; ties keep the
/// earliest grid entry.
pub fn grid_search_cv(x: &[Vec<f64>], y: &[f64], grid: &[SvrHyper], k: usize, seed: u64) -> Result<CvResult> {
    grid_search_cv_capped(x, y, grid, k, seed, MAX_ITERATIONS)
}

/// [`grid_search_cv`] with an SMO iteration cap per fold fit.
pub fn grid_search_cv_capped(
    x: &[Vec<f64>],
    y: &[f64],
    grid: &[SvrHyper],
    k: usize,
    seed: u64,
    max_iterations: usize,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("hyperparameter grid"));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {k}")));
    }
    check_inputs(x, y)?;
    if x.len() < k {
        return Err(Error::TooShort { needed: k, got: x.len() });
    }
    for h in grid {
        h.validate()?;
    }

    let folds: Vec<FoldData> = make_folds(x.len(), k, seed)
        .into_iter()
        .map(|valid| {
            let mut in_valid = vec![false; x.len()];
            valid.iter().for_each(|&i| in_valid[i] = true);
            let train: Vec<usize> = (0..x.len()).filter(|&i| !in_valid[i]).collect();
            let train_x: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let st = Standardization::fit(&train_x);
            FoldData {
                train_y: train.iter().map(|&i| y[i]).collect(),
                valid_y: valid.iter().map(|&i| y[i]).collect(),
                train_z: train_x.iter().map(|r| st.apply(r)).collect(),
                valid_z: valid.iter().map(|&i| st.apply(&x[i])).collect(),
            }
        })
        .collect();

    // Grid points sharing a kernel reuse the fold kernel matrices.
    let mut kernels: Vec<KernelSpec> = Vec::new();
    for h in grid {
        if !kernels.contains(&h.kernel) {
            kernels.push(h.kernel);
        }
    }
    let mut scores = vec![0.0; grid.len()];
    for kernel in &kernels {
        let members: Vec<usize> = (0..grid.len()).filter(|&i| grid[i].kernel == *kernel).collect();
        let fold_kernels: Vec<FoldKernel> = folds.iter().map(|f| f.kernel(kernel)).collect();
        let score_of = |&i: &usize| {
            folds.iter().zip(&fold_kernels).map(|(f, fk)| f.rmse(fk, &grid[i], max_iterations)).sum::<f64>() / k as f64
        };
        #[cfg(feature = "parallel")]
        let member_scores: Vec<f64> = {
            use rayon::prelude::*;
            members.par_iter().map(score_of).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let member_scores: Vec<f64> = members.iter().map(score_of).collect();
        for (i, s) in members.into_iter().zip(member_scores) {
            scores[i] = s;
        }
    }

    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    Ok(CvResult { best: grid[best], scores })
}
