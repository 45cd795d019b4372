//! Command-line front end: `calibrate`, `forecast`, `compare`, `segment`.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cirsharp::config::{RunConfig, SegmentationMode, OUT_DIR_ENV};
use cirsharp::market_data::{load_rate_series, maturity_labels, shift_if_needed, RateSeries};
use cirsharp::pipeline::{
    calibrate_series, change_point_segmentation, compare_with_cir, rolling_forecast, run_arima_cir,
    ForecastSummary,
};
use cirsharp::report;
use cirsharp::segmentation::{detect_change_points, Segmentation};
use cirsharp::{Error, Result};

#[derive(Parser)]
#[command(name = "cirsharp", version, about = "Segmented ARIMA-driven CIR calibration")]
struct Cli {
    /// Flat TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate every group and write candidate, parameter and fit tables.
    Calibrate(Overrides),
    /// Rolling one-step forecasts.
    Forecast(Overrides),
    /// Rolling CIR# against classical CIR forecasts.
    Compare(Overrides),
    /// Segmentation only (dry run).
    Segment(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// Rate table: a date column followed by one column per maturity.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Maturity column; repeat for several. All columns when omitted.
    #[arg(long = "maturity")]
    maturities: Vec<String>,
    /// Output directory (else config, else $CIRSHARP_OUT_DIR).
    #[arg(long = "out")]
    output_dir: Option<PathBuf>,
    /// Observations per group in fixed mode.
    #[arg(long)]
    group_size: Option<usize>,
    /// fixed | change_point
    #[arg(long)]
    segmentation: Option<String>,
    /// Shortest segment in change-point mode.
    #[arg(long)]
    min_segment_len: Option<usize>,
    /// Most segments considered in change-point mode.
    #[arg(long)]
    k_max: Option<usize>,
    /// Group harmonic mean below which the series is translated.
    #[arg(long)]
    shift_threshold: Option<f64>,
    /// Significance level of the residual diagnostics.
    #[arg(long)]
    alpha: Option<f64>,
    /// Do not require partial autocorrelations inside the bands.
    #[arg(long)]
    relax_pac: bool,
    /// Lower bound of the mean-reversion search.
    #[arg(long)]
    k_lower: Option<f64>,
    /// Upper bound of the mean-reversion search.
    #[arg(long)]
    k_upper: Option<f64>,
    /// Coarse grid size before golden-section refinement.
    #[arg(long)]
    k_grid_points: Option<usize>,
    /// Golden-section tolerance on k.
    #[arg(long)]
    k_tolerance: Option<f64>,
    /// Observation step in years.
    #[arg(long)]
    delta: Option<f64>,
    /// CIR# rolling window.
    #[arg(long = "window")]
    forecast_window: Option<usize>,
    /// Classical CIR rolling window.
    #[arg(long)]
    classic_window: Option<usize>,
}

impl Overrides {
    fn apply(self, mut c: RunConfig) -> Result<RunConfig> {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(group_size, min_segment_len, k_max, shift_threshold, alpha, k_lower, k_upper,
             k_grid_points, k_tolerance, forecast_window, classic_window);
        if self.input.is_some() {
            c.input = self.input;
        }
        if self.output_dir.is_some() {
            c.output_dir = self.output_dir;
        }
        if self.delta.is_some() {
            c.delta = self.delta;
        }
        if !self.maturities.is_empty() {
            c.maturities = self.maturities;
        }
        if let Some(s) = self.segmentation {
            c.segmentation = s.parse()?;
        }
        c.relax_pac |= self.relax_pac;
        Ok(c)
    }
}

fn load_all(config: &RunConfig) -> Result<Vec<RateSeries>> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| Error::Config("no input file (use --input or `input` in the config)".into()))?;
    let labels = if config.maturities.is_empty() {
        let text = std::fs::read_to_string(input).map_err(|e| Error::Io {
            path: input.to_path_buf(),
            source: e,
        })?;
        maturity_labels(&text)
    } else {
        config.maturities.clone()
    };
    labels
        .iter()
        .map(|label| {
            let s = load_rate_series(input, label)?;
            match config.delta {
                Some(d) => s.with_delta(d),
                None => Ok(s),
            }
        })
        .collect()
}

fn segmentation_for(series: &RateSeries, config: &RunConfig) -> Result<(Segmentation, RateSeries, cirsharp::market_data::ShiftRecord)> {
    match config.segmentation {
        SegmentationMode::Fixed => {
            let seg = Segmentation::fixed(series.len(), config.group_size)?;
            let (shifted, shift) = shift_if_needed(series, &seg, config.shift_threshold)?;
            Ok((seg, shifted, shift))
        }
        SegmentationMode::ChangePoint => {
            change_point_segmentation(series, &config.change_points(), &config.pipeline())
        }
    }
}

fn maturity_dir(out: &Path, cmd: &str, series: &RateSeries) -> PathBuf {
    out.join(cmd).join(series.maturity_label())
}

fn cmd_calibrate(config: &RunConfig, out: &Path) -> Result<()> {
    let pipeline = config.pipeline();
    let mut failed = Vec::new();
    for series in load_all(config)? {
        let report = match config.segmentation {
            SegmentationMode::Fixed => {
                let seg = Segmentation::fixed(series.len(), config.group_size)?;
                calibrate_series(&series, &seg, &pipeline)?
            }
            SegmentationMode::ChangePoint => {
                let (seg, shifted, shift) = segmentation_for(&series, config)?;
                run_arima_cir(&shifted, &seg, shift, &pipeline)?
            }
        };
        let dir = maturity_dir(out, "calibrate", &series);
        report::write_calibration(&dir, &series, &report)?;
        println!(
            "{}: {} of {} groups fitted, total R2 {:.4}, total eps {:.4} -> {}",
            series.maturity_label(),
            report.groups.len(),
            report.groups.len() + report.unfitted.len(),
            report.total_r2,
            report.total_eps,
            dir.display()
        );
        if report.groups.is_empty() {
            failed.push(series.maturity_label().to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::NoEligibleCandidate(format!("no group fitted for {}", failed.join(", "))))
    }
}

fn cmd_forecast(config: &RunConfig, out: &Path) -> Result<()> {
    for series in load_all(config)? {
        let results = rolling_forecast(&series, config.forecast_window, &config.pipeline())?;
        let summary = ForecastSummary::from_results(&results)?;
        let dir = maturity_dir(out, "forecast", &series);
        report::write_forecast(&dir, &series, config.forecast_window, &results, &summary)?;
        println!(
            "{}: {} predictions ({} unpredicted), R2 {:.4}, RMSE {:.4} -> {}",
            series.maturity_label(),
            summary.predicted,
            summary.unpredicted,
            summary.r2,
            summary.rmse,
            dir.display()
        );
    }
    Ok(())
}

fn cmd_compare(config: &RunConfig, out: &Path) -> Result<()> {
    let tables = load_all(config)?
        .iter()
        .map(|s| compare_with_cir(s, config.forecast_window, config.classic_window, &config.pipeline()))
        .collect::<Result<Vec<_>>>()?;
    let dir = out.join("compare");
    report::write_comparison(&dir, config.forecast_window, config.classic_window, &tables)?;
    for t in &tables {
        println!(
            "{}: R2 A={:.4} B={:.4} | RMSE A={:.4} B={:.4} ({} targets)",
            t.maturity, t.r2.a, t.r2.b, t.rmse.a, t.rmse.b, t.common_targets
        );
    }
    println!("-> {}", dir.display());
    Ok(())
}

fn cmd_segment(config: &RunConfig, out: &Path) -> Result<()> {
    for series in load_all(config)? {
        let detected = match config.segmentation {
            SegmentationMode::ChangePoint => Some(detect_change_points(
                series.values(),
                config.change_points().effective_k_max(series.len()),
                config.min_segment_len,
            )?),
            SegmentationMode::Fixed => None,
        };
        let (seg, _, shift) = segmentation_for(&series, config)?;
        let dir = maturity_dir(out, "segment", &series);
        report::write_segmentation(&dir, &series, &seg, &shift, detected.as_ref())?;
        let groups: Vec<String> = seg.groups().iter().map(|(s, e)| format!("{s}-{e}")).collect();
        println!("{}: {} -> {}", series.maturity_label(), groups.join(" "), dir.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let (overrides, name) = match cli.command {
        Command::Calibrate(o) => (o, "calibrate"),
        Command::Forecast(o) => (o, "forecast"),
        Command::Compare(o) => (o, "compare"),
        Command::Segment(o) => (o, "segment"),
    };
    let config = overrides.apply(base)?;
    config.validate()?;
    let out = config.resolved_output_dir();
    log::debug!("output directory {} (env {OUT_DIR_ENV})", out.display());
    match name {
        "calibrate" => cmd_calibrate(&config, &out),
        "forecast" => cmd_forecast(&config, &out),
        "compare" => cmd_compare(&config, &out),
        _ => cmd_segment(&config, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
