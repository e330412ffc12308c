//! Natural cubic spline through strictly increasing knots.

/// Natural cubic spline sharing one knot vector across several value channels
/// (real and imaginary parts, for instance).
#[derive(Debug, Clone)]
pub struct NaturalSpline<const N: usize> {
    knots: Vec<f64>,
    values: Vec<[f64; N]>,
    second: Vec<[f64; N]>,
}

impl<const N: usize> NaturalSpline<N> {
    /// Fits the spline. `knots` must be strictly increasing and non-empty.
    pub fn fit(knots: Vec<f64>, values: Vec<[f64; N]>) -> Self {
        assert_eq!(knots.len(), values.len());
        assert!(!knots.is_empty());
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        let k = knots.len();
        let mut second = vec![[0.0; N]; k];
        if k > 2 {
            // Thomas algorithm on the interior equations; end moments are zero.
            let m = k - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![[0.0; N]; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                for c in 0..N {
                    rhs[i][c] = 6.0
                        * ((values[i + 2][c] - values[i + 1][c]) / h1 - (values[i + 1][c] - values[i][c]) / h0);
                }
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                for c in 0..N {
                    rhs[i][c] -= w * rhs[i - 1][c];
                }
            }
            for i in (0..m).rev() {
                for c in 0..N {
                    let next = if i + 1 < m { second[i + 2][c] } else { 0.0 };
                    second[i + 1][c] = (rhs[i][c] - upper[i] * next) / diag[i];
                }
            }
        }
        Self { knots, values, second }
    }

    /// Evaluates at `x`; outside the knot range the end cubic pieces are extended.
    pub fn eval(&self, x: f64) -> [f64; N] {
        let k = self.knots.len();
        if k == 1 {
            return self.values[0];
        }
        let j = match self.knots.partition_point(|&t| t <= x) {
            0 => 0,
            p if p >= k => k - 2,
            p => p - 1,
        };
        self.eval_segment(j, x)
    }

    fn eval_segment(&self, j: usize, x: f64) -> [f64; N] {
        let h = self.knots[j + 1] - self.knots[j];
        let dx = x - self.knots[j];
        let mut out = [0.0; N];
        for (c, o) in out.iter_mut().enumerate() {
            let (y0, y1) = (self.values[j][c], self.values[j + 1][c]);
            let (m0, m1) = (self.second[j][c], self.second[j + 1][c]);
            let b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
            let cc = m0 / 2.0;
            let d = (m1 - m0) / (6.0 * h);
            *o = y0 + dx * (b + dx * (cc + dx * d));
        }
        out
    }

    /// Evaluates on the integer grid `0..n`.
    pub fn eval_grid(&self, n: usize) -> Vec<[f64; N]> {
        if self.knots.len() == 1 {
            return vec![self.values[0]; n];
        }
        let mut out = Vec::with_capacity(n);
        let mut j = 0;
        for t in 0..n {
            let x = t as f64;
            while j + 2 < self.knots.len() && self.knots[j + 1] <= x {
                j += 1;
            }
            out.push(self.eval_segment(j, x));
        }
        out
    }

    pub fn second_derivatives(&self) -> &[[f64; N]] {
        &self.second
    }
}
