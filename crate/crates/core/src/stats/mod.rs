//! Interval Theil's U and the model comparison procedure (one-way ANOVA
//! followed by Tukey's HSD).

pub mod qtable;

use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::interval_ts::Interval;
pub use qtable::q_critical;

/// Interval Theil's U over a hold-out window.
///
/// `actuals` holds the interval preceding the first forecast followed by the
/// `n` hold-out intervals; `forecasts` holds the `n` one-step forecasts. The
/// denominator is the squared error of the random-walk forecast.
pub fn theil_u_interval(actuals: &[Interval], forecasts: &[Interval]) -> Result<f64> {
    let bounds: Vec<(f64, f64)> = forecasts.iter().map(|f| (f.lower(), f.upper())).collect();
    theil_u_bounds(actuals, &bounds)
}

/// Same as [`theil_u_interval`] for forecasts given as `(lower, upper)` pairs
/// that need not be ordered.
pub fn theil_u_bounds(actuals: &[Interval], forecasts: &[(f64, f64)]) -> Result<f64> {
    if forecasts.is_empty() {
        return Err(Error::EmptyInput("forecasts"));
    }
    if actuals.len() != forecasts.len() + 1 {
        return Err(Error::DimensionMismatch { expected: forecasts.len() + 1, got: actuals.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, &(fl, fu)) in actuals.windows(2).zip(forecasts) {
        let (prev, cur) = (w[0], w[1]);
        num += (cur.upper() - fu).powi(2) + (cur.lower() - fl).powi(2);
        den += (cur.upper() - prev.upper()).powi(2) + (cur.lower() - prev.lower()).powi(2);
    }
    if den == 0.0 {
        return Err(Error::Degenerate("actual intervals are constant over the window"));
    }
    Ok((num / den).sqrt())
}

/// Accuracy values of one model across replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracySample {
    pub model: String,
    pub values: Vec<f64>,
}

impl AccuracySample {
    pub fn new(model: impl Into<String>, values: Vec<f64>) -> Self {
        Self { model: model.into(), values }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    /// Within-group mean square.
    pub ms_within: f64,
}

fn check_groups(groups: &[AccuracySample]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 groups, got {}", groups.len())));
    }
    for g in groups {
        if g.values.len() < 2 {
            return Err(Error::InvalidParameter(format!("group {} needs at least 2 values", g.model)));
        }
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(())
}

pub fn one_way_anova(groups: &[AccuracySample]) -> Result<AnovaResult> {
    check_groups(groups)?;
    let total: usize = groups.iter().map(|g| g.values.len()).sum();
    let grand = groups.iter().flat_map(|g| &g.values).sum::<f64>() / total as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.mean();
        ssb += g.values.len() as f64 * (m - grand).powi(2);
        ssw += g.values.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let df_between = groups.len() - 1;
    let df_within = total - groups.len();
    let ms_within = ssw / df_within as f64;
    let (f, p) = if ssb == 0.0 {
        (0.0, 1.0)
    } else if ssw == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ssb / df_between as f64) / ms_within;
        let dist = FisherSnedecor::new(df_between as f64, df_within as f64)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        (f, dist.sf(f).clamp(0.0, 1.0))
    };
    Ok(AnovaResult { f, p, df_between, df_within, ms_within })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseComparison {
    pub model_a: String,
    pub model_b: String,
    /// `mean_a - mean_b`.
    pub mean_diff: f64,
    pub q: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub anova: AnovaResult,
    pub alpha: f64,
    pub q_critical: f64,
    pub pairs: Vec<PairwiseComparison>,
    /// `(model, mean)` sorted by ascending mean.
    pub ranking: Vec<(String, f64)>,
    /// Whether each adjacent pair in `ranking` differs significantly.
    pub adjacent_significant: Vec<bool>,
}

/// Tukey's honest significant difference test for equal group sizes.
pub fn tukey_hsd(groups: &[AccuracySample], alpha: f64) -> Result<ComparisonReport> {
    check_groups(groups)?;
    let n = groups[0].values.len();
    if groups.iter().any(|g| g.values.len() != n) {
        return Err(Error::UnsupportedDesign("Tukey HSD requires equal group sizes".into()));
    }
    let anova = one_way_anova(groups)?;
    let q_crit = q_critical(alpha, groups.len(), anova.df_within as f64)?;
    let se = (anova.ms_within / n as f64).sqrt();
    let q_of = |diff: f64| {
        if diff == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            diff.abs() / se
        }
    };

    let mut pairs = Vec::new();
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            let diff = groups[a].mean() - groups[b].mean();
            let q = q_of(diff);
            pairs.push(PairwiseComparison {
                model_a: groups[a].model.clone(),
                model_b: groups[b].model.clone(),
                mean_diff: diff,
                q,
                significant: q > q_crit,
            });
        }
    }

    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| groups[a].mean().total_cmp(&groups[b].mean()));
    let ranking: Vec<(String, f64)> = order.iter().map(|&i| (groups[i].model.clone(), groups[i].mean())).collect();
    let adjacent_significant =
        order.windows(2).map(|w| q_of(groups[w[0]].mean() - groups[w[1]].mean()) > q_crit).collect();

    Ok(ComparisonReport { anova, alpha, q_critical: q_crit, pairs, ranking, adjacent_significant })
}

impl ComparisonReport {
    /// `best < next <* worst`: `<*` marks a significant gap between neighbours.
    pub fn ranking_line(&self) -> String {
        let mut s = String::new();
        for (i, (name, _)) in self.ranking.iter().enumerate() {
            if i > 0 {
                s.push_str(if self.adjacent_significant[i - 1] { " <* " } else { " < " });
            }
            s.push_str(name);
        }
        s
    }

    pub fn is_significant(&self, a: &str, b: &str) -> Option<bool> {
        self.pairs
            .iter()
            .find(|p| (p.model_a == a && p.model_b == b) || (p.model_a == b && p.model_b == a))
            .map(|p| p.significant)
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let width = self.ranking.iter().map(|(m, _)| m.len()).max().unwrap_or(5).max(7);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "ANOVA F({}, {}) = {:.4}, p = {:.4e}",
            self.anova.df_between, self.anova.df_within, self.anova.f, self.anova.p
        );
        let _ = writeln!(out, "Tukey HSD alpha = {}, q_crit = {:.3}", self.alpha, self.q_critical);
        let _ = writeln!(out, "{:<4} {:<width$} {:>12}", "rank", "model", "mean");
        for (i, (m, v)) in self.ranking.iter().enumerate() {
            let _ = writeln!(out, "{:<4} {:<width$} {:>12.6}", i + 1, m, v);
        }
        let _ = writeln!(out, "{:<width$} {:<width$} {:>12} {:>10} {:>4}", "model_a", "model_b", "mean_diff", "q", "sig");
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{:<width$} {:<width$} {:>12.6} {:>10.4} {:>4}",
                p.model_a,
                p.model_b,
                p.mean_diff,
                p.q,
                if p.significant { "*" } else { "" }
            );
        }
        let _ = writeln!(out, "ranking: {}", self.ranking_line());
        out
    }

    /// Pairwise table as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model_a,model_b,mean_diff,q,significant\n");
        for p in &self.pairs {
            let _ = writeln!(out, "{},{},{},{},{}", p.model_a, p.model_b, p.mean_diff, p.q, u8::from(p.significant));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(l: f64, u: f64) -> Interval {
        Interval::new(l, u).unwrap()
    }

    #[test]
    fn theil_hand_value() {
        let actuals = [iv(0.0, 1.0), iv(1.0, 2.0), iv(2.0, 3.0)];
        let forecasts = [iv(0.5, 1.5), iv(1.5, 2.5)];
        assert!((theil_u_interval(&actuals, &forecasts).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn theil_perfect_and_naive() {
        let actuals = [iv(0.0, 1.0), iv(1.0, 3.0), iv(0.5, 2.0), iv(2.0, 2.5)];
        assert_eq!(theil_u_interval(&actuals, &actuals[1..]).unwrap(), 0.0);
        assert_eq!(theil_u_interval(&actuals, &actuals[..3]).unwrap(), 1.0);
    }

    #[test]
    fn theil_errors() {
        let flat = [iv(1.0, 2.0); 3];
        assert!(matches!(theil_u_interval(&flat, &flat[1..]), Err(Error::Degenerate(_))));
        assert!(matches!(theil_u_interval(&flat, &flat), Err(Error::DimensionMismatch { .. })));
    }

    fn groups(v: &[&[f64]]) -> Vec<AccuracySample> {
        v.iter().enumerate().map(|(i, g)| AccuracySample::new(format!("m{i}"), g.to_vec())).collect()
    }

    #[test]
    fn anova_hand_value() {
        let g = groups(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], &[3.0, 4.0, 5.0]]);
        let r = one_way_anova(&g).unwrap();
        assert!((r.f - 3.0).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (2, 6));
        assert!(r.p > 0.05 && r.p < 0.2);
    }

    #[test]
    fn identical_groups() {
        let g = groups(&[&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]]);
        let r = one_way_anova(&g).unwrap();
        assert_eq!((r.f, r.p), (0.0, 1.0));
        let t = tukey_hsd(&g, 0.05).unwrap();
        assert!(t.pairs.iter().all(|p| !p.significant));
        let constant = groups(&[&[2.0, 2.0], &[2.0, 2.0]]);
        assert_eq!(one_way_anova(&constant).unwrap().p, 1.0);
    }

    #[test]
    fn two_group_f_is_pooled_t_squared() {
        let a = [0.3, 1.7, 2.2, 0.9, 1.4];
        let b = [2.1, 2.9, 1.8, 3.3, 2.6];
        let g = groups(&[&a, &b]);
        let f = one_way_anova(&g).unwrap().f;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let ss = |v: &[f64]| v.iter().map(|x| (x - mean(v)).powi(2)).sum::<f64>();
        let sp2 = (ss(&a) + ss(&b)) / (a.len() + b.len() - 2) as f64;
        let t = (mean(&a) - mean(&b)) / (sp2 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
        assert!((f - t * t).abs() <= 1e-9);
    }

    #[test]
    fn tukey_examples() {
        let g = groups(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], &[3.0, 4.0, 5.0]]);
        let t = tukey_hsd(&g, 0.05).unwrap();
        let extreme = t.pairs.iter().find(|p| p.model_a == "m0" && p.model_b == "m2").unwrap();
        assert!((extreme.q - 2.0 / (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(!extreme.significant);
        assert_eq!(t.ranking_line(), "m0 < m1 < m2");

        let g = groups(&[&[0.0, 1e-6, 0.0], &[10.0, 10.0, 10.0 + 1e-6], &[20.0 - 1e-6, 20.0, 20.0]]);
        let t = tukey_hsd(&g, 0.05).unwrap();
        assert!(t.pairs.iter().all(|p| p.significant));
        assert_eq!(t.ranking_line(), "m0 <* m1 <* m2");
        assert!(t.to_text().contains("ranking: m0 <* m1 <* m2"));
    }

    #[test]
    fn tukey_rejects_unequal_sizes() {
        let g = groups(&[&[1.0, 2.0, 3.0], &[2.0, 3.0]]);
        assert!(matches!(tukey_hsd(&g, 0.05), Err(Error::UnsupportedDesign(_))));
    }

    proptest! {
        #[test]
        fn theil_is_scale_invariant(
            base in prop::collection::vec((-5.0f64..5.0, 0.0f64..3.0, -1.0f64..1.0, -1.0f64..1.0), 3..20),
            scale in 0.01f64..100.0,
            shift in -50.0f64..50.0,
        ) {
            let actual: Vec<Interval> = base.iter().map(|b| iv(b.0, b.0 + b.1)).collect();
            let fc: Vec<Interval> = base[1..].iter().map(|b| iv(b.0 + b.2, b.0 + b.1 + b.2 + b.3.abs())).collect();
            let u = theil_u_interval(&actual, &fc);
            let map = |v: &Interval| iv(v.lower() * scale + shift, v.upper() * scale + shift);
            let a2: Vec<Interval> = actual.iter().map(map).collect();
            let f2: Vec<Interval> = fc.iter().map(map).collect();
            if let Ok(u) = u {
                let u2 = theil_u_interval(&a2, &f2).unwrap();
                prop_assert!((u - u2).abs() <= 1e-9 * (1.0 + u));
            }
        }

        #[test]
        fn anova_and_tukey_properties(
            vals in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 4), 2..6),
        ) {
            let g: Vec<AccuracySample> = vals.iter().enumerate()
                .map(|(i, v)| AccuracySample::new(format!("g{i}"), v.clone())).collect();
            let a = one_way_anova(&g).unwrap();
            prop_assert!(a.f >= 0.0);
            prop_assert!((0.0..=1.0).contains(&a.p));
            let t05 = tukey_hsd(&g, 0.05).unwrap();
            let t01 = tukey_hsd(&g, 0.01).unwrap();
            for (p5, p1) in t05.pairs.iter().zip(&t01.pairs) {
                prop_assert!(!p1.significant || p5.significant);
                prop_assert_eq!(t05.is_significant(&p5.model_a, &p5.model_b), t05.is_significant(&p5.model_b, &p5.model_a));
            }
            for w in t05.ranking.windows(2) {
                prop_assert!(w[0].1 <= w[1].1);
            }
        }
    }
}
