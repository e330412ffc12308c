use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bemdsvr::bemd::{bemd_decompose, emd_decompose, Decomposition, SiftConfig};
use bemdsvr::forecasters::{rolling_evaluation, EvaluationConfig, RawForecast, RECORDS_HEADER};
use bemdsvr::interval_ts::{
    aggregate_with_counts, read_demand_csv, read_interval_csv, write_interval_csv, IntervalSeries, Scale, Transform,
    YearMonth,
};
use bemdsvr::stats::{tukey_hsd, ComparisonReport};
use bemdsvr::synthetic::{generate, SyntheticSpec};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::config::{ModelName, RunConfig};
use crate::CliError;

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

/// Every series in an interval CSV.
pub fn read_series(path: &Path, scale: Scale) -> Result<Vec<IntervalSeries>, CliError> {
    read_interval_csv(open(path)?, scale).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// The series for `hour`, or the only series when `hour` is `None`.
pub fn read_one_series(path: &Path, scale: Scale, hour: Option<u8>) -> Result<IntervalSeries, CliError> {
    let mut groups = read_series(path, scale)?;
    match hour {
        Some(h) => groups
            .into_iter()
            .find(|s| s.hour() == Some(h))
            .ok_or_else(|| CliError::Data(format!("{}: no series for hour {h}", path.display()))),
        None if groups.len() == 1 => Ok(groups.remove(0)),
        None => Err(CliError::Usage(format!("{} holds {} series; pick one with --hour", path.display(), groups.len()))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub files: Vec<PathBuf>,
    /// Months per written series, aligned with `files`.
    pub months: Vec<usize>,
}

/// Aggregates hourly demand into monthly log-scale interval series, one file
/// per hour, plus `counts.csv` with the number of records behind each month.
pub fn cmd_ingest(input: &Path, out_dir: &Path, hours: &[u8], min_records: usize) -> Result<IngestSummary, CliError> {
    let records = read_demand_csv(open(input)?).map_err(|e| match e {
        e @ bemdsvr::Error::Schema { .. } => CliError::Data(format!("{}: {e}", input.display())),
        e => e.into(),
    })?;
    let hours: Vec<u8> = if hours.is_empty() { (1..=24).collect() } else { hours.to_vec() };
    let mut counts = String::from("hour,year,month,records\n");
    let mut summary = IngestSummary { files: Vec::new(), months: Vec::new() };
    for h in hours {
        let (series, month_counts) = aggregate_with_counts(&records, h, min_records)
            .map_err(|e| CliError::Data(format!("hour {h}: {e}")))?;
        let series = series.log_transform()?;
        for c in &month_counts {
            let _ = writeln!(counts, "{h},{},{},{}", c.period.year, c.period.month, c.records);
        }
        let path = out_dir.join(format!("hour_{h:02}.csv"));
        let mut w = create(&path)?;
        write_interval_csv(&mut w, &series)?;
        summary.months.push(series.len());
        summary.files.push(path);
    }
    write_text(&out_dir.join("counts.csv"), &counts)?;
    Ok(summary)
}

/// Writes a seeded synthetic series on the raw scale.
pub fn cmd_gen_synthetic(spec: &SyntheticSpec, out: &Path) -> Result<IntervalSeries, CliError> {
    let series = generate(spec)?;
    let mut w = create(out)?;
    write_interval_csv(&mut w, &series)?;
    w.flush().map_err(|e| CliError::io(out, e))?;
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecomposeMethod {
    Bemd(Transform),
    /// Separate univariate decompositions; the dump puts the lower bound in
    /// `re` and the upper bound in `im`.
    Emd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeSummary {
    pub num_imfs: usize,
    pub sift_counts: Vec<usize>,
    /// Max reconstruction error relative to the largest input magnitude.
    pub reconstruction_error: f64,
}

/// Decomposes `series` and writes the `t,component,part,value` dump.
pub fn cmd_decompose(
    series: &IntervalSeries,
    method: DecomposeMethod,
    sift: &SiftConfig,
    out: &Path,
) -> Result<DecomposeSummary, CliError> {
    let (d, err) = match method {
        DecomposeMethod::Bemd(t) => {
            let c = series.to_complex(t);
            let d = bemd_decompose(&c, sift)?;
            let err = d.reconstruction_error(c.samples());
            (d, err)
        }
        DecomposeMethod::Emd => {
            let (lower, upper) = (series.lower(), series.upper());
            let dl = emd_decompose(&lower, sift)?;
            let du = emd_decompose(&upper, sift)?;
            let err = dl.reconstruction_error(&lower).max(du.reconstruction_error(&upper));
            let k = dl.num_imfs().max(du.num_imfs());
            let (dl, du) = (dl.padded_to(k), du.padded_to(k));
            let join = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(&re, &im)| Complex64::new(re, im)).collect();
            let d = Decomposition {
                imfs: dl.imfs.iter().zip(&du.imfs).map(|(a, b)| join(a, b)).collect(),
                residual: join(&dl.residual, &du.residual),
                sift_counts: dl.sift_counts.iter().zip(&du.sift_counts).map(|(a, b)| a + b).collect(),
            };
            (d, err)
        }
    };
    let mut w = create(out)?;
    d.write_dump(&mut w)?;
    Ok(DecomposeSummary { num_imfs: d.num_imfs(), sift_counts: d.sift_counts.clone(), reconstruction_error: err })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutput {
    pub period: YearMonth,
    pub hour: Option<u8>,
    /// Bounds after the configured repair.
    pub forecast: RawForecast,
    pub repaired: bool,
}

impl ForecastOutput {
    pub const HEADER: &'static str = "year,month,hour,lower,upper,repaired";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.period.year,
            self.period.month,
            self.hour.map(|h| h.to_string()).unwrap_or_default(),
            self.forecast.lower,
            self.forecast.upper,
            u8::from(self.repaired)
        )
    }
}

/// One-step forecast of the month after `series`, fitting on all of it.
pub fn cmd_forecast(series: &IntervalSeries, model: ModelName, cfg: &RunConfig, seed: u64) -> Result<ForecastOutput, CliError> {
    if series.is_empty() {
        return Err(CliError::Data("empty series".into()));
    }
    let prepared = cfg.model_spec(model).prepare(series, seed)?;
    let (forecast, repaired) = prepared.forecast_next(series, seed)?.repaired(cfg.repair);
    Ok(ForecastOutput {
        period: series.periods()[series.len() - 1].next(),
        hour: series.hour(),
        forecast,
        repaired,
    })
}

/// Results for one hour of an evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct HourResult {
    pub hour: Option<u8>,
    pub holdout: usize,
    pub models: Vec<String>,
    pub mean_u: Vec<f64>,
    pub repairs: Vec<usize>,
    pub comparison: Option<ComparisonReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateSummary {
    pub out_dir: PathBuf,
    pub hours: Vec<HourResult>,
    /// Result tables, excluding the manifest.
    pub files: Vec<PathBuf>,
}

fn hour_label(h: Option<u8>) -> String {
    h.map(|h| format!("{h:02}")).unwrap_or_else(|| "-".into())
}

/// Rolling hold-out evaluation of every configured model on every selected
/// hour, with accuracy tables, ANOVA/Tukey comparison, forecast records and
/// a manifest that reproduces the run.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluateSummary, CliError> {
    cfg.validate()?;
    let input = cfg.input.as_deref().ok_or_else(|| CliError::Usage("no input series configured".into()))?;
    let digest = sha256_file(input)?;
    if let Some(expected) = &cfg.input_sha256 {
        if *expected != digest {
            return Err(CliError::Data(format!("{}: digest {digest} does not match {expected}", input.display())));
        }
    }
    let mut groups = read_series(input, cfg.scale)?;
    if !cfg.hours.is_empty() {
        for h in &cfg.hours {
            if !groups.iter().any(|s| s.hour() == Some(*h)) {
                return Err(CliError::Data(format!("{}: no series for hour {h}", input.display())));
            }
        }
        groups.retain(|s| s.hour().is_some_and(|h| cfg.hours.contains(&h)));
    }
    let models: Vec<_> = cfg.models.iter().filter(|m| **m != ModelName::Naive).map(|m| cfg.model_spec(*m)).collect();

    let mut results = Vec::with_capacity(groups.len());
    let mut outputs = Vec::with_capacity(groups.len());
    for series in &groups {
        let holdout = match cfg.split {
            Some(p) => {
                let pos = series
                    .position(p)
                    .ok_or_else(|| CliError::Data(format!("split {p} outside hour {} series", hour_label(series.hour()))))?;
                series.len() - pos
            }
            None => cfg.holdout,
        };
        if holdout < 2 || series.len() < holdout + 24 {
            return Err(CliError::Usage(format!(
                "hour {}: need >= 24 estimation and >= 2 hold-out points, got {} and {holdout}",
                hour_label(series.hour()),
                series.len().saturating_sub(holdout)
            )));
        }
        log::info!("evaluating hour {} ({} points, hold-out {holdout})", hour_label(series.hour()), series.len());
        let eval_cfg = EvaluationConfig {
            holdout,
            replications: cfg.replications,
            base_seed: cfg.base_seed,
            models: models.clone(),
            repair: cfg.repair,
        };
        let out = rolling_evaluation(series, &eval_cfg)?;
        let comparison =
            if out.scores.len() >= 2 && cfg.replications >= 2 { Some(tukey_hsd(&out.scores, cfg.alpha)?) } else { None };
        results.push(HourResult {
            hour: series.hour(),
            holdout,
            models: out.scores.iter().map(|s| s.model.clone()).collect(),
            mean_u: out.scores.iter().map(|s| s.mean()).collect(),
            repairs: out.repairs.clone(),
            comparison,
        });
        outputs.push(out);
    }

    let dir = &cfg.out_dir;
    let mut files = Vec::new();
    let mut put = |name: String, text: String| -> Result<(), CliError> {
        let path = dir.join(name);
        write_text(&path, &text)?;
        files.push(path);
        Ok(())
    };
    put("u_table.txt".into(), u_table_text(&results))?;
    put("u_table.csv".into(), u_table_csv(&results))?;
    put("comparison.txt".into(), comparison_text(&results))?;
    put("comparison.csv".into(), comparison_csv(&results))?;

    let mut reps = String::from("hour,model,replication,u\n");
    let mut repairs = String::from("hour,model,repairs,forecasts\n");
    for (res, out) in results.iter().zip(&outputs) {
        let h = hour_label(res.hour);
        for (s, n) in out.scores.iter().zip(&out.repairs) {
            for (r, u) in s.values.iter().enumerate() {
                let _ = writeln!(reps, "{h},{},{r},{u}", s.model);
            }
            let _ = writeln!(repairs, "{h},{},{n},{}", s.model, res.holdout * cfg.replications);
        }
        let mut records = format!("{RECORDS_HEADER}\n");
        for r in &out.records {
            let _ = writeln!(records, "{r}");
        }
        let name = match res.hour {
            Some(h) => format!("records_h{h:02}.csv"),
            None => "records.csv".into(),
        };
        put(name, records)?;
    }
    put("u_replications.csv".into(), reps)?;
    put("repairs.csv".into(), repairs)?;

    let mut manifest = String::from("# bemdsvr run manifest; pass back with --config to repeat the run\n");
    let _ = writeln!(manifest, "version = {}", env!("CARGO_PKG_VERSION"));
    let recorded = RunConfig { input_sha256: Some(digest), ..cfg.clone() };
    manifest.push_str(&recorded.to_text());
    let last_seed = cfg.base_seed.wrapping_add(cfg.replications as u64 - 1);
    let _ = writeln!(manifest, "# replication seeds: {}..={last_seed}", cfg.base_seed);
    for f in &files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(manifest, "# sha256 {} {name}", sha256_file(f)?);
    }
    write_text(&dir.join("manifest.txt"), &manifest)?;

    Ok(EvaluateSummary { out_dir: dir.clone(), hours: results, files })
}

fn model_columns(results: &[HourResult]) -> Vec<String> {
    results.first().map(|r| r.models.clone()).unwrap_or_default()
}

/// Mean U^I per hour and model, one row per hour.
fn u_table_text(results: &[HourResult]) -> String {
    let cols = model_columns(results);
    let widths: Vec<usize> = cols.iter().map(|c| c.len().max(6)).collect();
    let mut s = format!("{:<4}", "hour");
    for (c, w) in cols.iter().zip(&widths) {
        let _ = write!(s, "  {c:>w$}");
    }
    s.push('\n');
    for r in results {
        let _ = write!(s, "{:<4}", hour_label(r.hour));
        for (u, w) in r.mean_u.iter().zip(&widths) {
            let _ = write!(s, "  {u:>w$.3}");
        }
        s.push('\n');
    }
    s
}

fn u_table_csv(results: &[HourResult]) -> String {
    let mut s = String::from("hour");
    for c in model_columns(results) {
        let _ = write!(s, ",{c}");
    }
    s.push('\n');
    for r in results {
        s.push_str(&hour_label(r.hour));
        for u in &r.mean_u {
            let _ = write!(s, ",{u}");
        }
        s.push('\n');
    }
    s
}

fn comparison_text(results: &[HourResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "== hour {} ==", hour_label(r.hour));
        match &r.comparison {
            Some(c) => s.push_str(&c.to_text()),
            None => s.push_str("comparison needs at least 2 models and 2 replications\n"),
        }
        s.push('\n');
    }
    s
}

/// One line per hour: ANOVA statistic, p-value and the ranking line.
fn comparison_csv(results: &[HourResult]) -> String {
    let mut s = String::from("hour,f,p,ranking\n");
    for r in results {
        match &r.comparison {
            Some(c) => {
                let _ = writeln!(s, "{},{},{},{}", hour_label(r.hour), c.anova.f, c.anova.p, c.ranking_line());
            }
            None => {
                let _ = writeln!(s, "{},,,", hour_label(r.hour));
            }
        }
    }
    s
}
