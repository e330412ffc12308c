//! Sequential minimal optimization for the ε-SVR dual.
//!
//! The dual is written over `2n` variables `a = (α, α*)` with labels
//! `s = (+1, …, +1, -1, …, -1)`:
//!
//! ```text
//! min  ½ aᵀ Q a + pᵀ a   s.t.  sᵀ a = 0,  0 ≤ a ≤ C
//! Q_ij = s_i s_j K(i mod n, j mod n),   p = (ε - y, ε + y)
//! ```
//!
//! Working pairs are the maximal-violating pair with second-order selection
//! of the partner, as in LIBSVM.

const TAU: f64 = 1e-12;

/// Output of one solve.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    /// `β_i = α_i - α*_i`, one per training row.
    pub coefs: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Dual objective (maximization form) after every iteration, if requested.
    pub objective_trace: Option<Vec<f64>>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SmoParams {
    pub cost: f64,
    pub epsilon: f64,
    /// Stop when the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub record_objective: bool,
}

/// Solves the dual given the `n x n` kernel matrix in row-major order.
pub fn solve(kernel: &[f64], y: &[f64], params: &SmoParams) -> SmoSolution {
    let n = y.len();
    debug_assert_eq!(kernel.len(), n * n);
    let l = 2 * n;
    let c = params.cost;
    let k = |i: usize, j: usize| kernel[(i % n) * n + (j % n)];
    let sign = |i: usize| if i < n { 1.0 } else { -1.0 };

    // The bias is free, so shifting the targets by their mean changes only the
    // bias. Centred targets keep the gradients small and the solver fast.
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let p: Vec<f64> = (0..l)
        .map(|i| if i < n { params.epsilon - (y[i] - y_mean) } else { params.epsilon + (y[i - n] - y_mean) })
        .collect();
    let qd: Vec<f64> = (0..l).map(|i| k(i, i)).collect();
    let mut alpha = vec![0.0; l];
    let mut grad = p.clone();

    let objective = |alpha: &[f64], grad: &[f64]| -> f64 {
        -0.5 * alpha.iter().zip(grad).zip(&p).map(|((a, g), pi)| a * (g + pi)).sum::<f64>()
    };
    let mut trace = params.record_objective.then(|| vec![objective(&alpha, &grad)]);
    let mut last_obj = 0.0f64;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iterations {
        let Some((i, j)) = select_working_set(&alpha, &grad, &qd, c, n, kernel, params.tolerance) else {
            converged = true;
            break;
        };
        iterations += 1;
        let (si, sj) = (sign(i), sign(j));
        let qij = si * sj * k(i, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if si != sj {
            let quad = (qd[i] + qd[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (si * (alpha[i] - old_i), sj * (alpha[j] - old_j));
        // Entry t and t + n share the kernel row and differ only in sign.
        let (ki, kj) = (&kernel[(i % n) * n..][..n], &kernel[(j % n) * n..][..n]);
        let (g_pos, g_neg) = grad.split_at_mut(n);
        for t in 0..n {
            let delta = ki[t] * di + kj[t] * dj;
            g_pos[t] += delta;
            g_neg[t] -= delta;
        }

        if cfg!(debug_assertions) || trace.is_some() {
            let obj = objective(&alpha, &grad);
            debug_assert!(
                obj >= last_obj - 1e-9 * (1.0 + last_obj.abs()),
                "dual objective decreased: {last_obj} -> {obj}"
            );
            last_obj = obj;
            if let Some(tr) = trace.as_mut() {
                tr.push(obj);
            }
        }
    }

    let bias = y_mean - compute_rho(&alpha, &grad, c, n);
    let coefs = (0..n).map(|i| alpha[i] - alpha[i + n]).collect();
    SmoSolution { coefs, bias, iterations, objective_trace: trace, converged }
}

fn select_working_set(
    alpha: &[f64],
    grad: &[f64],
    qd: &[f64],
    c: f64,
    n: usize,
    kernel: &[f64],
    tolerance: f64,
) -> Option<(usize, usize)> {
    let l = alpha.len();
    let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
    let mut gmax = f64::NEG_INFINITY;
    let mut gmax2 = f64::NEG_INFINITY;
    let mut i_sel = None;
    for t in 0..l {
        if t < n {
            if alpha[t] < c && -grad[t] >= gmax {
                gmax = -grad[t];
                i_sel = Some(t);
            }
        } else if alpha[t] > 0.0 && grad[t] >= gmax {
            gmax = grad[t];
            i_sel = Some(t);
        }
    }
    let i = i_sel?;
    let si = sign(i);
    let ki = &kernel[(i % n) * n..][..n];
    let mut j_sel = None;
    let mut best = f64::INFINITY;
    for t in 0..l {
        let (tk, positive) = if t < n { (t, true) } else { (t - n, false) };
        // Q_it = s_i s_t K_it
        let qit = if positive { si * ki[tk] } else { -si * ki[tk] };
        let (grad_diff, quad) = if positive {
            if alpha[t] <= 0.0 {
                continue;
            }
            gmax2 = gmax2.max(grad[t]);
            (gmax + grad[t], qd[i] + qd[t] - 2.0 * si * qit)
        } else {
            if alpha[t] >= c {
                continue;
            }
            gmax2 = gmax2.max(-grad[t]);
            (gmax - grad[t], qd[i] + qd[t] + 2.0 * si * qit)
        };
        if grad_diff > 0.0 {
            let obj_diff = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
            if obj_diff <= best {
                best = obj_diff;
                j_sel = Some(t);
            }
        }
    }
    if gmax + gmax2 < tolerance {
        return None;
    }
    j_sel.map(|j| (i, j))
}

/// Threshold from free variables, or the midpoint of the feasible range.
fn compute_rho(alpha: &[f64], grad: &[f64], c: f64, n: usize) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut nr_free = 0usize;
    for t in 0..alpha.len() {
        let positive = t < n;
        let yg = if positive { grad[t] } else { -grad[t] };
        if alpha[t] >= c {
            if positive {
                lb = lb.max(yg);
            } else {
                ub = ub.min(yg);
            }
        } else if alpha[t] <= 0.0 {
            if positive {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            nr_free += 1;
            sum_free += yg;
        }
    }
    if nr_free > 0 {
        sum_free / nr_free as f64
    } else {
        (ub + lb) / 2.0
    }
}
