//! Reference ε-SVR solver: accelerated projected gradient on the dense dual.
//!
//! Deliberately shares nothing with the library solver. The feasible set
//! `{0 <= a <= C, Σα - Σα* = 0}` is handled by exact projection, found by
//! bisection on the multiplier of the equality constraint.

pub struct OracleSolution {
    pub beta: Vec<f64>,
    pub bias: f64,
}

pub fn standardize(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let d = x[0].len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std = (0..d)
        .map(|j| {
            let v = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if v > 1e-300 {
                v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    (mean, std)
}

pub fn kernel(gamma: Option<f64>, a: &[f64], b: &[f64]) -> f64 {
    match gamma {
        None => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Some(g) => (-g * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp(),
    }
}

fn project(v: &[f64], n: usize, c: f64) -> Vec<f64> {
    // a_i(μ) = clip(v_i - μ s_i, 0, C); Σ s_i a_i(μ) decreases in μ.
    let constraint = |mu: f64| -> f64 {
        (0..2 * n).map(|i| if i < n { (v[i] - mu).clamp(0.0, c) } else { -(v[i] + mu).clamp(0.0, c) }).sum()
    };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if constraint(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    (0..2 * n).map(|i| if i < n { (v[i] - mu).clamp(0.0, c) } else { (v[i] + mu).clamp(0.0, c) }).collect()
}

/// Solves `min ½ βᵀKβ + ε Σ(α + α*) - yᵀβ` with `β = α - α*`.
pub fn solve(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> OracleSolution {
    let n = y.len();
    let lipschitz = 2.0 * k.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1e-12;
    let step = 1.0 / lipschitz;
    let beta_of = |a: &[f64]| (0..n).map(|i| a[i] - a[i + n]).collect::<Vec<f64>>();
    let kb = |b: &[f64]| (0..n).map(|i| (0..n).map(|j| k[i][j] * b[j]).sum()).collect::<Vec<f64>>();

    let mut a = vec![0.0; 2 * n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..400_000 {
        let g = kb(&beta_of(&z));
        let v: Vec<f64> = (0..2 * n)
            .map(|i| if i < n { z[i] - step * (g[i] + eps - y[i]) } else { z[i] - step * (-g[i - n] + eps + y[i - n]) })
            .collect();
        let next = project(&v, n, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = next.iter().zip(&a).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        z = next.iter().zip(&a).map(|(p, q)| p + (t - 1.0) / t_next * (p - q)).collect();
        a = next;
        t = t_next;
        if moved < 1e-13 {
            break;
        }
    }

    let beta = beta_of(&a);
    let f = kb(&beta);
    let tol = 1e-7 * c;
    let mut free = Vec::new();
    let (mut lb, mut ub) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let (al, au) = (a[i], a[i + n]);
        if al > tol && al < c - tol {
            free.push(y[i] - f[i] - eps);
        }
        if au > tol && au < c - tol {
            free.push(y[i] - f[i] + eps);
        }
        // Bounds on b implied by the KKT conditions at the box edges.
        let r = y[i] - f[i];
        if al <= tol {
            ub = ub.min(r + eps);
        }
        if au <= tol {
            lb = lb.max(r - eps);
        }
        if al >= c - tol {
            lb = lb.max(r - eps);
        }
        if au >= c - tol {
            ub = ub.min(r + eps);
        }
    }
    let bias = if free.is_empty() { 0.5 * (lb + ub) } else { free.iter().sum::<f64>() / free.len() as f64 };
    OracleSolution { beta, bias }
}

/// Oracle prediction with the same feature standardization as the model.
pub fn fit_predict(x: &[Vec<f64>], y: &[f64], gamma: Option<f64>, c: f64, eps: f64, queries: &[Vec<f64>]) -> Vec<f64> {
    let (mean, std) = standardize(x);
    let z = |r: &[f64]| r.iter().zip(&mean).zip(&std).map(|((v, m), s)| (v - m) / s).collect::<Vec<f64>>();
    let zx: Vec<Vec<f64>> = x.iter().map(|r| z(r)).collect();
    let k: Vec<Vec<f64>> = zx.iter().map(|a| zx.iter().map(|b| kernel(gamma, a, b)).collect()).collect();
    let sol = solve(&k, y, c, eps);
    queries
        .iter()
        .map(|q| {
            let zq = z(q);
            zx.iter().zip(&sol.beta).map(|(r, b)| b * kernel(gamma, r, &zq)).sum::<f64>() + sol.bias
        })
        .collect()
}

/// One random regression problem: training rows, targets, kernel, `C`, `ε`, queries.
pub struct RandomProblem {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub gamma: Option<f64>,
    pub cost: f64,
    pub epsilon: f64,
    pub queries: Vec<Vec<f64>>,
}

/// Small seeded problems (`n <= 12`); even indices use the linear kernel,
/// odd ones RBF.
pub fn random_problem(index: u64) -> RandomProblem {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(index);
    let n = rng.gen_range(4..=12);
    let d = rng.gen_range(1..=3);
    let row = |rng: &mut rand_chacha::ChaCha8Rng| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<f64>>();
    let x: Vec<Vec<f64>> = (0..n).map(|_| row(&mut rng)).collect();
    let y = x.iter().map(|r| r[0].sin() + 0.5 * r.iter().sum::<f64>() + rng.gen_range(-0.1..0.1)).collect();
    let gamma = if index % 2 == 0 { None } else { Some(rng.gen_range(0.1..1.0)) };
    let cost = rng.gen_range(5.0..15.0);
    let epsilon = rng.gen_range(0.05..0.2);
    let queries = (0..5).map(|_| row(&mut rng)).collect();
    RandomProblem { x, y, gamma, cost, epsilon, queries }
}
