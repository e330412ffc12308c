use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::Command;

use bemdsvr::bemd::SiftConfig;
use bemdsvr::interval_ts::{read_interval_csv, IntervalSeries, Scale, Transform};
use bemdsvr::synthetic::SyntheticSpec;
use bemdsvr_cli::{
    cmd_decompose, cmd_evaluate, cmd_forecast, cmd_gen_synthetic, cmd_ingest, CliError, DecomposeMethod, ModelName,
    RunConfig,
};

/// Two calendar years of hourly demand, every day and hour present.
fn write_two_years(path: &Path) {
    let mut s = String::from("date,hour,demand_mwh\n");
    for (y, m, d) in calendar_days(2010, 2011) {
        for h in 1..=24 {
            let v = 50_000.0 + 1_000.0 * h as f64 + 37.0 * d as f64 + 500.0 * m as f64 + (y - 2010) as f64;
            let _ = writeln!(s, "{y:04}-{m:02}-{d:02},{h},{v}");
        }
    }
    fs::write(path, s).unwrap();
}

fn calendar_days(from: i32, to: i32) -> Vec<(i32, u32, u32)> {
    let mut out = Vec::new();
    for y in from..=to {
        for m in 1..=12u32 {
            let days = match m {
                2 if y % 4 == 0 => 29,
                2 => 28,
                4 | 6 | 9 | 11 => 30,
                _ => 31,
            };
            out.extend((1..=days).map(|d| (y, m, d)));
        }
    }
    out
}

#[test]
fn ingest_writes_one_file_per_hour() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    write_two_years(&raw);
    let out = dir.path().join("series");
    let summary = cmd_ingest(&raw, &out, &[], 20).unwrap();
    assert_eq!(summary.files.len(), 24);
    assert!(summary.months.iter().all(|&m| m == 24));
    let counts = fs::read_to_string(out.join("counts.csv")).unwrap();
    assert_eq!(counts.lines().count(), 1 + 24 * 24);
    assert!(counts.lines().nth(1).unwrap().starts_with("1,2010,1,31"));
}

#[test]
fn ingest_log_scales_the_january_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    let mut s = String::from("date,hour,demand_mwh\n");
    for (d, v) in [(3, 71234.0), (9, 64812.0), (17, 89265.0), (24, 80011.0)] {
        let _ = writeln!(s, "2011-01-{d:02},1,{v}");
    }
    fs::write(&raw, s).unwrap();
    cmd_ingest(&raw, dir.path(), &[1], 1).unwrap();
    let back = read_interval_csv(fs::File::open(dir.path().join("hour_01.csv")).unwrap(), Scale::NaturalLog).unwrap();
    let first = back[0].intervals()[0];
    assert_eq!(first.lower(), 64812f64.ln());
    assert_eq!(first.upper(), 89265f64.ln());
}

#[test]
fn ingest_reports_bad_hour_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    fs::write(&raw, "date,hour,demand_mwh\n2011-01-01,1,5.0\n2011-01-01,25,6.0\n").unwrap();
    match cmd_ingest(&raw, dir.path(), &[], 1) {
        Err(CliError::Data(m)) => assert!(m.contains("line 3"), "{m}"),
        other => panic!("expected a data error, got {other:?}"),
    }
}

#[test]
fn synthetic_output_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec { seed: 5, ..SyntheticSpec::default() };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    cmd_gen_synthetic(&spec, &a).unwrap();
    cmd_gen_synthetic(&spec, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let flat = SyntheticSpec { noise_sd: 0.0, seasonal_amplitude: 0.0, ..spec };
    let s = cmd_gen_synthetic(&flat, &a).unwrap();
    assert!(s.lower().iter().enumerate().all(|(t, l)| *l == 10.0 + 0.05 * t as f64));
    assert!(matches!(cmd_gen_synthetic(&SyntheticSpec { radius_ar: 1.0, ..spec }, &a), Err(CliError::Usage(_))));
}

fn two_tone(n: usize) -> IntervalSeries {
    let tone = |t: f64| (2.0 * std::f64::consts::PI * t / 6.0).sin() + 2.0 * (2.0 * std::f64::consts::PI * t / 30.0).sin();
    let lower: Vec<f64> = (0..n).map(|t| tone(t as f64)).collect();
    let upper: Vec<f64> = (0..n).map(|t| tone(t as f64 + 0.5) + 3.0).collect();
    IntervalSeries::from_bounds(&lower, &upper, Scale::Raw).unwrap()
}

#[test]
fn decompose_two_tone_and_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let sift = SiftConfig::default();
    for method in [DecomposeMethod::Bemd(Transform::Trans1), DecomposeMethod::Emd] {
        let d = cmd_decompose(&two_tone(120), method, &sift, &out).unwrap();
        assert!(d.num_imfs >= 2, "{method:?}: {d:?}");
        assert!(d.reconstruction_error <= 1e-8);
        let dump = fs::read_to_string(&out).unwrap();
        assert_eq!(dump.lines().next(), Some("t,component,part,value"));
        assert_eq!(dump.lines().count(), 1 + 120 * 2 * (d.num_imfs + 1));
    }
    let t: Vec<f64> = (0..60).map(|t| t as f64).collect();
    let u: Vec<f64> = t.iter().map(|v| 2.0 * v + 1.0).collect();
    let mono = IntervalSeries::from_bounds(&t, &u, Scale::Raw).unwrap();
    let d = cmd_decompose(&mono, DecomposeMethod::Bemd(Transform::Trans1), &sift, &out).unwrap();
    assert_eq!(d.num_imfs, 0);
}

fn synthetic_input(dir: &Path, length: usize) -> std::path::PathBuf {
    let path = dir.join("s.csv");
    cmd_gen_synthetic(&SyntheticSpec { length, seed: 1, ..SyntheticSpec::default() }, &path).unwrap();
    path
}

fn light_config(dir: &Path, input: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.apply_text(&format!(
        "input = {}\nscale = raw\nholdout = 6\nreplications = 2\nmodels = holt,vec\nout_dir = {}\n",
        input.display(),
        dir.join("run").display()
    ))
    .unwrap();
    cfg
}

#[test]
fn naive_only_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_input(dir.path(), 60);
    let mut cfg = light_config(dir.path(), &input);
    cfg.apply("models", "naive").unwrap();
    let summary = cmd_evaluate(&cfg).unwrap();
    assert_eq!(summary.hours[0].models, vec!["Naive".to_string()]);
    let table = fs::read_to_string(summary.out_dir.join("u_table.txt")).unwrap();
    assert_eq!(table.lines().nth(1).unwrap().split_whitespace().nth(1), Some("1.000"));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_input(dir.path(), 60);
    let cfg = light_config(dir.path(), &input);
    let first = cmd_evaluate(&cfg).unwrap();
    let mut again = RunConfig::default();
    again.apply_file(&first.out_dir.join("manifest.txt")).unwrap();
    again.out_dir = dir.path().join("again");
    let second = cmd_evaluate(&again).unwrap();
    for (a, b) in first.files.iter().zip(&second.files) {
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{}", a.display());
    }
    let ranking = fs::read_to_string(first.out_dir.join("comparison.csv")).unwrap();
    assert!(ranking.lines().nth(1).unwrap().contains(" < ") || ranking.contains(" <* "));

    // A changed input no longer matches the recorded digest.
    cmd_gen_synthetic(&SyntheticSpec { length: 60, seed: 2, ..SyntheticSpec::default() }, &input).unwrap();
    assert!(matches!(cmd_evaluate(&again), Err(CliError::Data(_))));
}

#[test]
fn split_must_leave_enough_history() {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_input(dir.path(), 60);
    let mut cfg = light_config(dir.path(), &input);
    cfg.apply("split", "2001-06").unwrap();
    assert!(matches!(cmd_evaluate(&cfg), Err(CliError::Usage(_))));
    cfg.apply("split", "2004-12").unwrap();
    assert!(matches!(cmd_evaluate(&cfg), Err(CliError::Usage(_))));
    cfg.apply("split", "2004-06").unwrap();
    assert_eq!(cmd_evaluate(&cfg).unwrap().hours[0].holdout, 7);
}

#[test]
fn forecast_continues_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_input(dir.path(), 60);
    let s = bemdsvr_cli::commands::read_one_series(&input, Scale::Raw, None).unwrap();
    let cfg = RunConfig::default();
    let f = cmd_forecast(&s, ModelName::Vec, &cfg, 0).unwrap();
    assert_eq!(f.period.to_string(), "2005-01");
    assert!(f.forecast.lower <= f.forecast.upper);
    assert!(f.csv_line().starts_with("2005,1,,"));
}

#[test]
fn exit_codes() {
    let bin = env!("CARGO_BIN_EXE_bemdsvr");
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).env("BEMDSVR_OUT", dir.path()).output().unwrap();

    let ok = status(&["gen-synthetic", "--length", "60"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("synthetic.csv").exists());

    assert_eq!(status(&["evaluate", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(status(&["gen-synthetic", "--length", "10"]).status.code(), Some(1));
    let missing = status(&["decompose", "--series", "/nonexistent/x.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&missing.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
}
