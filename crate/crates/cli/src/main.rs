use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bemdsvr::interval_ts::{Scale, Transform, DEFAULT_MIN_RECORDS_PER_MONTH};
use bemdsvr::synthetic::SyntheticSpec;
use bemdsvr_cli::commands::read_one_series;
use bemdsvr_cli::config::{default_out_dir, parse_hours, OUT_DIR_ENV};
use bemdsvr_cli::{
    cmd_decompose, cmd_evaluate, cmd_forecast, cmd_gen_synthetic, cmd_ingest, CliError, DecomposeMethod, ModelName,
    RunConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bemdsvr", version, about = "Interval-valued time series forecasting experiments")]
#[command(after_help = "Outputs default to the directory named by BEMDSVR_OUT, or ./bemdsvr-out.")]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate hourly demand into monthly log-scale interval series.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `all` or a list such as `1,5,8-12`.
        #[arg(long, default_value = "all")]
        hours: String,
        /// Months with fewer records are logged as sparse.
        #[arg(long, default_value_t = DEFAULT_MIN_RECORDS_PER_MONTH)]
        min_records: usize,
    },
    /// Write a seeded synthetic interval series.
    GenSynthetic(SyntheticArgs),
    /// Decompose one series and dump its components.
    Decompose {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        hour: Option<u8>,
        #[arg(long, value_enum, default_value_t = Method::Bemd)]
        method: Method,
        #[arg(long, default_value = "trans1")]
        transform: String,
        #[arg(long)]
        max_imfs: Option<usize>,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-step forecast of the month after the series.
    Forecast {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        hour: Option<u8>,
        #[arg(long, default_value = "bemd-svr-trans1")]
        model: String,
        #[command(flatten)]
        run: RunArgs,
        /// Appends to this CSV instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rolling hold-out comparison of the configured models.
    Evaluate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        hours: Option<String>,
        /// First hold-out month, `YYYY-MM`.
        #[arg(long)]
        split: Option<String>,
        #[arg(long)]
        holdout: Option<usize>,
        /// Comma-separated: bemd-svr-trans1, bemd-svr-trans2, emd-svr, holt, vec.
        #[arg(long)]
        models: Option<String>,
        #[arg(long)]
        replications: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any config key, e.g. `--set lag=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// `full` or `compact` hyperparameter grids.
    #[arg(long)]
    grid: Option<String>,
}

impl RunArgs {
    fn build(&self, extra: &[(&str, Option<String>)]) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_overrides(self.set.iter().map(String::as_str))?;
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(g) = &self.grid {
            cfg.apply("grid", g)?;
        }
        for (k, v) in extra {
            if let Some(v) = v {
                cfg.apply(k, v)?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bemd,
    Emd,
}

#[derive(Args)]
struct SyntheticArgs {
    #[arg(long, default_value_t = SyntheticSpec::default().length)]
    length: usize,
    #[arg(long, default_value_t = SyntheticSpec::default().level)]
    level: f64,
    #[arg(long, default_value_t = SyntheticSpec::default().trend_slope)]
    trend_slope: f64,
    #[arg(long, default_value_t = SyntheticSpec::default().seasonal_amplitude)]
    seasonal_amplitude: f64,
    #[arg(long, default_value_t = SyntheticSpec::default().radius_mean)]
    radius_mean: f64,
    #[arg(long, default_value_t = SyntheticSpec::default().radius_ar)]
    radius_ar: f64,
    #[arg(long, default_value_t = SyntheticSpec::default().noise_sd)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { input, out, hours, min_records } => {
            let out = out.unwrap_or_else(default_out_dir);
            let summary = cmd_ingest(&input, &out, &parse_hours(&hours)?, min_records)?;
            for (f, m) in summary.files.iter().zip(&summary.months) {
                println!("{}\t{m} months", f.display());
            }
        }
        Command::GenSynthetic(a) => {
            let spec = SyntheticSpec {
                length: a.length,
                level: a.level,
                trend_slope: a.trend_slope,
                seasonal_amplitude: a.seasonal_amplitude,
                radius_mean: a.radius_mean,
                radius_ar: a.radius_ar,
                noise_sd: a.noise_sd,
                seed: a.seed,
            };
            let out = a.out.unwrap_or_else(|| default_out_dir().join("synthetic.csv"));
            let s = cmd_gen_synthetic(&spec, &out)?;
            println!("{}\t{} months", out.display(), s.len());
        }
        Command::Decompose { series, hour, method, transform, max_imfs, directions, out } => {
            let s = read_one_series(&series, Scale::Raw, hour)?;
            let method = match method {
                Method::Bemd => DecomposeMethod::Bemd(transform.parse::<Transform>()?),
                Method::Emd => DecomposeMethod::Emd,
            };
            let mut cfg = RunConfig::default();
            cfg.directions = directions;
            cfg.max_imfs = max_imfs;
            let sift = cfg.sift();
            sift.validate()?;
            let out = out.unwrap_or_else(|| default_out_dir().join("decomposition.csv"));
            let d = cmd_decompose(&s, method, &sift, &out)?;
            println!("imfs = {}", d.num_imfs);
            println!("sift_iterations = {:?}", d.sift_counts);
            println!("reconstruction_error = {:e}", d.reconstruction_error);
            println!("dump = {}", out.display());
        }
        Command::Forecast { series, hour, model, run, out } => {
            let cfg = run.build(&[])?;
            let s = read_one_series(&series, cfg.scale, hour)?;
            let f = cmd_forecast(&s, model.parse::<ModelName>()?, &cfg, cfg.base_seed)?;
            match out {
                Some(path) => {
                    let fresh = !path.exists();
                    let mut file = std::fs::OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&path)
                        .map_err(|e| CliError::io(&path, e))?;
                    let mut text = String::new();
                    if fresh {
                        text.push_str(bemdsvr_cli::ForecastOutput::HEADER);
                        text.push('\n');
                    }
                    text.push_str(&f.csv_line());
                    text.push('\n');
                    file.write_all(text.as_bytes()).map_err(|e| CliError::io(&path, e))?;
                }
                None => {
                    println!("{}", bemdsvr_cli::ForecastOutput::HEADER);
                    println!("{}", f.csv_line());
                }
            }
        }
        Command::Evaluate { input, hours, split, holdout, models, replications, run, out } => {
            let path_str = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
            let cfg = run.build(&[
                ("input", path_str(input)),
                ("hours", hours),
                ("split", split),
                ("holdout", holdout.map(|h| h.to_string())),
                ("models", models),
                ("replications", replications.map(|r| r.to_string())),
                ("out_dir", path_str(out)),
            ])?;
            let summary = cmd_evaluate(&cfg)?;
            print!("{}", std::fs::read_to_string(summary.out_dir.join("u_table.txt")).unwrap_or_default());
            for h in &summary.hours {
                if let Some(c) = &h.comparison {
                    let hour = h.hour.map(|h| format!("{h:02}")).unwrap_or_else(|| "-".into());
                    println!("hour {hour}: F = {:.3}, p = {:.3e}, {}", c.anova.f, c.anova.p, c.ranking_line());
                }
            }
            println!("results in {}", summary.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    log::debug!("default output directory from {OUT_DIR_ENV}: {}", default_out_dir().display());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
