use bemdsvr::interval_ts::{Interval, IntervalSeries, Scale};
use bemdsvr::stats::{one_way_anova, theil_u_interval, tukey_hsd, AccuracySample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iv(l: f64, u: f64) -> Interval {
    Interval::new(l, u).unwrap()
}

#[test]
fn naive_forecasts_score_one_and_perfect_forecasts_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let actuals: Vec<Interval> = (0..13)
            .map(|_| {
                let l: f64 = rng.gen_range(-5.0..5.0);
                iv(l, l + rng.gen_range(0.0..3.0))
            })
            .collect();
        let naive = &actuals[..12];
        assert!((theil_u_interval(&actuals, naive).unwrap() - 1.0).abs() <= 1e-12);
        assert_eq!(theil_u_interval(&actuals, &actuals[1..]).unwrap(), 0.0);
    }
}

#[test]
fn hand_value_and_scale_invariance() {
    let actuals = [iv(0.0, 1.0), iv(1.0, 2.0), iv(2.0, 3.0)];
    let forecasts = [iv(0.5, 1.5), iv(1.5, 2.5)];
    assert!((theil_u_interval(&actuals, &forecasts).unwrap() - 0.5).abs() <= 1e-12);
    let scale = |i: &Interval| iv(3.0 * i.lower() - 7.0, 3.0 * i.upper() - 7.0);
    let a2: Vec<Interval> = actuals.iter().map(scale).collect();
    let f2: Vec<Interval> = forecasts.iter().map(scale).collect();
    assert!((theil_u_interval(&a2, &f2).unwrap() - 0.5).abs() <= 1e-12);
}

#[test]
fn anova_cases() {
    let g = |name: &str, v: &[f64]| AccuracySample::new(name, v.to_vec());
    let r = one_way_anova(&[g("a", &[1.0, 2.0, 3.0]), g("b", &[2.0, 3.0, 4.0]), g("c", &[3.0, 4.0, 5.0])]).unwrap();
    assert!((r.f - 3.0).abs() < 1e-12);
    let same = [g("a", &[1.0, 2.0, 3.0]), g("b", &[1.0, 2.0, 3.0])];
    let r = one_way_anova(&same).unwrap();
    assert_eq!((r.f, r.p), (0.0, 1.0));
    assert!(tukey_hsd(&same, 0.05).unwrap().pairs.iter().all(|p| !p.significant));

    // Two groups: F is the squared pooled t statistic.
    let a = [0.3, 0.9, 1.4, 0.7, 1.1];
    let b = [1.2, 1.9, 1.6, 2.4, 1.3];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ss = |v: &[f64]| v.iter().map(|x| (x - mean(v)).powi(2)).sum::<f64>();
    let sp2 = (ss(&a) + ss(&b)) / 8.0;
    let t = (mean(&a) - mean(&b)) / (sp2 * (2.0 / 5.0)).sqrt();
    let r = one_way_anova(&[g("a", &a), g("b", &b)]).unwrap();
    assert!((r.f - t * t).abs() <= 1e-9);
}

#[test]
fn interval_series_round_trip_through_csv() {
    let s = IntervalSeries::from_bounds(&[1.5, 2.25, -0.1], &[2.0, 2.25, 0.3], Scale::NaturalLog).unwrap();
    let mut buf = Vec::new();
    bemdsvr::interval_ts::write_interval_csv(&mut buf, &s).unwrap();
    let back = bemdsvr::interval_ts::read_interval_csv(&buf[..], Scale::NaturalLog).unwrap();
    assert_eq!(back, vec![s]);
}
