//! Flat `key = value` run configuration.
//!
//! Every field of [`RunConfig`] has a key. Files are applied first and flags
//! after them, so flags win. The run manifest is written in the same format
//! and can be fed back with `--config` to repeat a run.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bemdsvr::bemd::SiftConfig;
use bemdsvr::forecasters::{ComponentTraining, HoltConfig, ModelSpec, PipelineConfig, Repair, VecConfig};
use bemdsvr::interval_ts::{Scale, Transform, YearMonth};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BEMDSVR_OUT";
const FALLBACK_OUT_DIR: &str = "bemdsvr-out";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
}

/// Models the runner knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    Naive,
    BemdTrans1,
    BemdTrans2,
    Emd,
    Holt,
    Vec,
}

impl ModelName {
    pub const ALL: [ModelName; 6] = [
        ModelName::Naive,
        ModelName::BemdTrans1,
        ModelName::BemdTrans2,
        ModelName::Emd,
        ModelName::Holt,
        ModelName::Vec,
    ];

    fn key(self) -> &'static str {
        match self {
            ModelName::Naive => "naive",
            ModelName::BemdTrans1 => "bemd-svr-trans1",
            ModelName::BemdTrans2 => "bemd-svr-trans2",
            ModelName::Emd => "emd-svr",
            ModelName::Holt => "holt",
            ModelName::Vec => "vec",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ModelName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim().to_ascii_lowercase();
        if s == "bemd-svr" {
            return Ok(ModelName::BemdTrans1);
        }
        ModelName::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSize {
    Full,
    Compact,
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridSize::Full => "full",
            GridSize::Compact => "compact",
        })
    }
}

impl FromStr for GridSize {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "full" => Ok(GridSize::Full),
            "compact" => Ok(GridSize::Compact),
            other => Err(CliError::Usage(format!("unknown grid {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Checked against the input when set; manifests record it.
    pub input_sha256: Option<String>,
    pub scale: Scale,
    /// Empty means every hour in the input.
    pub hours: Vec<u8>,
    /// First hold-out month. Overrides `holdout`.
    pub split: Option<YearMonth>,
    pub holdout: usize,
    pub models: Vec<ModelName>,
    pub grid: GridSize,
    pub lag: usize,
    pub folds: usize,
    pub directions: usize,
    pub sd_threshold: f64,
    pub max_sift: usize,
    pub max_imfs: Option<usize>,
    pub training: ComponentTraining,
    pub retune: bool,
    pub log_inputs: bool,
    pub smo_cap: usize,
    pub repair: Repair,
    pub vec_max_lag: usize,
    pub holt_starts: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub alpha: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        let sift = SiftConfig::default();
        Self {
            input: None,
            input_sha256: None,
            scale: Scale::NaturalLog,
            hours: Vec::new(),
            split: None,
            holdout: 24,
            models: vec![ModelName::BemdTrans1, ModelName::BemdTrans2, ModelName::Emd, ModelName::Holt, ModelName::Vec],
            grid: GridSize::Compact,
            lag: pipeline.lag,
            folds: pipeline.folds,
            directions: sift.num_directions,
            sd_threshold: sift.sd_threshold,
            max_sift: sift.max_sift_iterations,
            max_imfs: sift.max_imfs,
            training: pipeline.training,
            retune: pipeline.retune_each_step,
            log_inputs: pipeline.log_inputs,
            smo_cap: pipeline.max_smo_iterations,
            repair: Repair::Swap,
            vec_max_lag: VecConfig::default().max_lag,
            holt_starts: HoltConfig::default().starts,
            replications: 20,
            base_seed: 0,
            alpha: 0.05,
            out_dir: default_out_dir(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| CliError::Usage(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!("{key}: expected true or false, got {value:?}"))),
    }
}

/// `"all"`, or comma-separated hours and ranges such as `1,3,7-9`.
pub fn parse_hours(value: &str) -> Result<Vec<u8>, CliError> {
    if value == "all" || value.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim) {
        let (a, b) = match part.split_once('-') {
            Some((a, b)) => (parse::<u8>("hours", a)?, parse::<u8>("hours", b)?),
            None => {
                let h = parse::<u8>("hours", part)?;
                (h, h)
            }
        };
        if a == 0 || b > 24 || a > b {
            return Err(CliError::Usage(format!("hours: bad range {part:?}")));
        }
        out.extend(a..=b);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn format_hours(hours: &[u8]) -> String {
    if hours.is_empty() {
        return "all".into();
    }
    hours.iter().map(u8::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one field from its textual form.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "input" => self.input = (!v.is_empty()).then(|| PathBuf::from(v)),
            "input_sha256" => self.input_sha256 = (!v.is_empty()).then(|| v.to_ascii_lowercase()),
            "scale" => self.scale = parse(key, v)?,
            "hours" => self.hours = parse_hours(v)?,
            "split" => self.split = if v.is_empty() || v == "none" { None } else { Some(parse(key, v)?) },
            "holdout" => self.holdout = parse(key, v)?,
            "models" => {
                let mut models = Vec::new();
                for m in v.split(',').filter(|s| !s.trim().is_empty()) {
                    let m: ModelName = m.parse()?;
                    if !models.contains(&m) {
                        models.push(m);
                    }
                }
                self.models = models;
            }
            "grid" => self.grid = v.parse()?,
            "lag" => self.lag = parse(key, v)?,
            "folds" => self.folds = parse(key, v)?,
            "directions" => self.directions = parse(key, v)?,
            "sd_threshold" => self.sd_threshold = parse(key, v)?,
            "max_sift" => self.max_sift = parse(key, v)?,
            "max_imfs" => self.max_imfs = if v == "auto" || v.is_empty() { None } else { Some(parse(key, v)?) },
            "training" => self.training = parse(key, v)?,
            "retune" => self.retune = parse_bool(key, v)?,
            "log_inputs" => self.log_inputs = parse_bool(key, v)?,
            "smo_cap" => self.smo_cap = parse(key, v)?,
            "repair" => self.repair = parse(key, v)?,
            "vec_max_lag" => self.vec_max_lag = parse(key, v)?,
            "holt_starts" => self.holt_starts = parse(key, v)?,
            "replications" => self.replications = parse(key, v)?,
            "base_seed" => self.base_seed = parse(key, v)?,
            "alpha" => self.alpha = parse(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            // Informational keys written by manifests.
            "version" => {
                if v != env!("CARGO_PKG_VERSION") {
                    log::warn!("config written by version {v}, running {}", env!("CARGO_PKG_VERSION"));
                }
            }
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            self.apply(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text)
    }

    /// Applies `key=value` overrides as given on the command line.
    pub fn apply_overrides<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<(), CliError> {
        for p in pairs {
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("expected KEY=VALUE, got {p:?}")))?;
            self.apply(k, v)?;
        }
        Ok(())
    }

    /// All keys in a fixed order, in the format read by [`apply_text`](Self::apply_text).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("input", self.input.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        put("input_sha256", self.input_sha256.clone().unwrap_or_default());
        put("scale", self.scale.to_string());
        put("hours", format_hours(&self.hours));
        put("split", self.split.map(|p| p.to_string()).unwrap_or_else(|| "none".into()));
        put("holdout", self.holdout.to_string());
        put("models", self.models.iter().map(ModelName::to_string).collect::<Vec<_>>().join(","));
        put("grid", self.grid.to_string());
        put("lag", self.lag.to_string());
        put("folds", self.folds.to_string());
        put("directions", self.directions.to_string());
        put("sd_threshold", self.sd_threshold.to_string());
        put("max_sift", self.max_sift.to_string());
        put("max_imfs", self.max_imfs.map(|m| m.to_string()).unwrap_or_else(|| "auto".into()));
        put(
            "training",
            match self.training {
                ComponentTraining::InSample => "in-sample",
                ComponentTraining::Expanding => "expanding",
            }
            .into(),
        );
        put("retune", self.retune.to_string());
        put("log_inputs", self.log_inputs.to_string());
        put("smo_cap", self.smo_cap.to_string());
        put(
            "repair",
            match self.repair {
                Repair::Swap => "swap",
                Repair::None => "none",
            }
            .into(),
        );
        put("vec_max_lag", self.vec_max_lag.to_string());
        put("holt_starts", self.holt_starts.to_string());
        put("replications", self.replications.to_string());
        put("base_seed", self.base_seed.to_string());
        put("alpha", self.alpha.to_string());
        put("out_dir", self.out_dir.display().to_string());
        s
    }

    pub fn sift(&self) -> SiftConfig {
        SiftConfig {
            num_directions: self.directions,
            max_sift_iterations: self.max_sift,
            sd_threshold: self.sd_threshold,
            max_imfs: self.max_imfs,
            ..SiftConfig::default()
        }
    }

    pub fn pipeline(&self, transform: Transform) -> PipelineConfig {
        let base = match self.grid {
            GridSize::Full => PipelineConfig::default(),
            GridSize::Compact => PipelineConfig::compact(),
        };
        PipelineConfig {
            transform,
            sift: self.sift(),
            lag: self.lag,
            folds: self.folds,
            max_smo_iterations: self.smo_cap,
            repair: self.repair,
            training: self.training,
            retune_each_step: self.retune,
            log_inputs: self.log_inputs,
            ..base
        }
    }

    pub fn model_spec(&self, name: ModelName) -> ModelSpec {
        match name {
            ModelName::Naive => ModelSpec::Naive,
            ModelName::BemdTrans1 => ModelSpec::BemdSvr(self.pipeline(Transform::Trans1)),
            ModelName::BemdTrans2 => ModelSpec::BemdSvr(self.pipeline(Transform::Trans2)),
            ModelName::Emd => ModelSpec::EmdSvr(self.pipeline(Transform::Trans1)),
            ModelName::Holt => ModelSpec::Holt(HoltConfig { starts: self.holt_starts, repair: self.repair, ..HoltConfig::default() }),
            ModelName::Vec => ModelSpec::Vec(VecConfig { max_lag: self.vec_max_lag, repair: self.repair, ..VecConfig::default() }),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.replications == 0 {
            return Err(CliError::Usage("replications must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        self.sift().validate()?;
        self.pipeline(Transform::Trans1).validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("hours = 1-3, 5\nmodels = holt, vec # comment\nsplit = 2012-01\nmax_imfs = 3\n").unwrap();
        assert_eq!(cfg.hours, vec![1, 2, 3, 5]);
        assert_eq!(cfg.models, vec![ModelName::Holt, ModelName::Vec]);
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_keys_and_values_are_usage_errors() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.apply("colour", "red"), Err(CliError::Usage(_))));
        assert!(matches!(cfg.apply("lag", "twelve"), Err(CliError::Usage(_))));
        assert!(matches!(cfg.apply("hours", "0-3"), Err(CliError::Usage(_))));
        assert!(matches!(cfg.apply_text("lag 3"), Err(CliError::Usage(_))));
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("lag = 6").unwrap();
        cfg.apply_overrides(["lag=4"]).unwrap();
        assert_eq!(cfg.lag, 4);
    }
}
