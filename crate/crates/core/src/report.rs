//! Machine-readable run outputs: comma-separated tables plus one JSON
//! summary per run. Floats are written in shortest round-trip form and
//! nothing time-dependent is emitted, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cir::feller_check;
use crate::error::{Error, Result};
use crate::market_data::{RateSeries, ShiftRecord};
use crate::pipeline::{CalibrationReport, ComparisonTable, ForecastResult, ForecastSummary};
use crate::segmentation::{ChangePointSet, Segmentation};
use crate::stats::weighted_totals;

pub const CANDIDATES_FILE: &str = "candidates.csv";
pub const PARAMETERS_FILE: &str = "parameters.csv";
pub const S_CURVES_FILE: &str = "s_curves.csv";
pub const FITTED_FILE: &str = "fitted.csv";
pub const FORECAST_FILE: &str = "forecast.csv";
pub const COMPARE_FILE: &str = "compare.csv";
pub const SEGMENTS_FILE: &str = "segments.csv";
pub const SUMMARY_FILE: &str = "summary.json";

struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut t = Table {
            writer: csv::Writer::from_writer(file),
            path,
        };
        t.row(header.iter().map(|s| s.to_string()))?;
        Ok(t)
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) -> Result<()> {
        let path = &self.path;
        self.writer
            .write_record(cells.into_iter().collect::<Vec<_>>())
            .map_err(|e| Error::io(path, e.into()))
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(dir: &Path, value: &T) -> Result<()> {
    let path = dir.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("summary serialisation failed: {e}")))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

#[derive(Serialize)]
struct GroupSummary<'a> {
    start: usize,
    end: usize,
    spec: String,
    in_acb: bool,
    k: f64,
    theta: f64,
    sigma: f64,
    r2_cir: f64,
    eps: f64,
    zero_variance: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    unfitted_reason: Option<&'a str>,
}

#[derive(Serialize)]
struct CalibrationSummary<'a> {
    maturity: &'a str,
    observations: usize,
    delta: f64,
    segmentation: &'a Segmentation,
    shift: &'a ShiftRecord,
    total_r2: f64,
    total_eps: f64,
    fitted_groups: usize,
    groups: Vec<GroupSummary<'a>>,
    unfitted: Vec<GroupSummary<'a>>,
    log: &'a [String],
}

/// Writes the candidate, parameter, objective-curve and fitted tables and
/// the summary for one maturity into `dir`.
pub fn write_calibration(dir: &Path, series: &RateSeries, report: &CalibrationReport) -> Result<()> {
    ensure_dir(dir)?;
    let mut cands = Table::create(
        dir,
        CANDIDATES_FILE,
        &["start", "end", "spec", "p", "i", "q", "r2_cir", "eps", "bic", "bic_flag", "chosen"],
    )?;
    let mut params = Table::create(
        dir,
        PARAMETERS_FILE,
        &[
            "start", "end", "n", "spec", "k", "theta", "sigma", "theta_observed", "r2_cir", "eps",
            "in_acb", "feller",
        ],
    )?;
    let mut curves = Table::create(dir, S_CURVES_FILE, &["start", "end", "k", "s"])?;
    for g in &report.groups {
        let (s, e) = g.range;
        for r in &g.candidate_table {
            cands.row([
                s.to_string(),
                e.to_string(),
                r.spec.to_string(),
                r.spec.p.to_string(),
                r.spec.i.to_string(),
                r.spec.q.to_string(),
                r.r2_cir.to_string(),
                r.eps.to_string(),
                r.bic.to_string(),
                r.bic_flag.to_string(),
                (r.spec == g.chosen_spec).to_string(),
            ])?;
        }
        let p = &g.calibration.params;
        params.row([
            s.to_string(),
            e.to_string(),
            g.len().to_string(),
            g.chosen_spec.to_string(),
            p.k.to_string(),
            p.theta.to_string(),
            p.sigma.to_string(),
            report.shift.invert(p.theta).to_string(),
            g.calibration.r2_cir.to_string(),
            g.calibration.eps.to_string(),
            g.in_acb.to_string(),
            feller_check(p).to_string(),
        ])?;
        for &(k, sv) in &g.calibration.s_curve {
            curves.row([s.to_string(), e.to_string(), k.to_string(), sv.to_string()])?;
        }
    }
    cands.finish()?;
    params.finish()?;
    curves.finish()?;

    let mut fitted = Table::create(dir, FITTED_FILE, &["index", "date", "observed", "fitted", "group_start"])?;
    let mut by_index: Vec<(Option<f64>, Option<usize>)> = vec![(None, None); series.len()];
    for g in &report.groups {
        for (off, &v) in g.fitted_observed.iter().enumerate() {
            by_index[g.range.0 - 1 + off] = (Some(v), Some(g.range.0));
        }
    }
    for (i, ((&obs, date), (fit, grp))) in series
        .values()
        .iter()
        .zip(series.timestamps())
        .zip(&by_index)
        .enumerate()
    {
        fitted.row([
            (i + 1).to_string(),
            date.format("%Y-%m-%d").to_string(),
            obs.to_string(),
            opt(*fit),
            grp.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    fitted.finish()?;

    let groups = report
        .groups
        .iter()
        .map(|g| GroupSummary {
            start: g.range.0,
            end: g.range.1,
            spec: g.chosen_spec.to_string(),
            in_acb: g.in_acb,
            k: g.calibration.params.k,
            theta: g.calibration.params.theta,
            sigma: g.calibration.params.sigma,
            r2_cir: g.calibration.r2_cir,
            eps: g.calibration.eps,
            zero_variance: g.calibration.zero_variance,
            unfitted_reason: None,
        })
        .collect();
    let unfitted = report
        .unfitted
        .iter()
        .map(|u| GroupSummary {
            start: u.range.0,
            end: u.range.1,
            spec: String::new(),
            in_acb: false,
            k: f64::NAN,
            theta: f64::NAN,
            sigma: f64::NAN,
            r2_cir: f64::NAN,
            eps: f64::NAN,
            zero_variance: false,
            unfitted_reason: Some(&u.reason),
        })
        .collect();
    write_json(
        dir,
        &CalibrationSummary {
            maturity: &report.maturity,
            observations: series.len(),
            delta: series.delta(),
            segmentation: &report.segmentation,
            shift: &report.shift,
            total_r2: report.total_r2,
            total_eps: report.total_eps,
            fitted_groups: report.groups.len(),
            groups,
            unfitted,
            log: &report.log,
        },
    )
}

/// Recomputes `(total_r2, total_eps)` from a written parameter table.
pub fn totals_from_parameters(path: &Path) -> Result<(f64, f64)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let headers = reader.headers().map_err(|e| Error::io(path, e.into()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingMaturity(name.to_string()))
    };
    let (cn, cr, ce) = (col("n")?, col("r2_cir")?, col("eps")?);
    let mut sizes = Vec::new();
    let mut r2 = Vec::new();
    let mut eps = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::io(path, e.into()))?;
        let parse = |c: usize| -> Result<f64> {
            rec.get(c)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::MalformedRow {
                    row: i + 2,
                    reason: format!("column {c} is not numeric"),
                })
        };
        sizes.push(parse(cn)? as usize);
        r2.push(parse(cr)?);
        eps.push(parse(ce)?);
    }
    weighted_totals(&sizes, &r2, &eps)
}

#[derive(Serialize)]
struct ForecastFileSummary<'a> {
    maturity: &'a str,
    window: usize,
    summary: &'a ForecastSummary,
}

pub fn write_forecast(
    dir: &Path,
    series: &RateSeries,
    window: usize,
    results: &[ForecastResult],
    summary: &ForecastSummary,
) -> Result<()> {
    ensure_dir(dir)?;
    let mut t = Table::create(
        dir,
        FORECAST_FILE,
        &["horizon_index", "date", "window_start", "window_end", "predicted", "realized"],
    )?;
    for f in results {
        let date = series
            .timestamps()
            .get(f.horizon_index - 1)
            .map(|d| d.format("%Y-%m-%d").to_string())
            .unwrap_or_default();
        t.row([
            f.horizon_index.to_string(),
            date,
            f.window.0.to_string(),
            f.window.1.to_string(),
            opt(f.predicted),
            opt(f.realized),
        ])?;
    }
    t.finish()?;
    write_json(
        dir,
        &ForecastFileSummary {
            maturity: series.maturity_label(),
            window,
            summary,
        },
    )
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    sharp_window: usize,
    classic_window: usize,
    tables: Vec<CompareEntry<'a>>,
}

#[derive(Serialize)]
struct CompareEntry<'a> {
    maturity: &'a str,
    common_targets: usize,
    r2: &'a crate::pipeline::ComparisonRow,
    rmse: &'a crate::pipeline::ComparisonRow,
}

/// One row per maturity: A (CIR#), B (CIR), C = A − B and D = C / A for
/// both R² and RMSE.
pub fn write_comparison(dir: &Path, sharp_window: usize, classic_window: usize, tables: &[ComparisonTable]) -> Result<()> {
    ensure_dir(dir)?;
    let mut t = Table::create(
        dir,
        COMPARE_FILE,
        &[
            "maturity", "common_targets", "r2_a", "r2_b", "r2_c", "r2_d", "rmse_a", "rmse_b",
            "rmse_c", "rmse_d",
        ],
    )?;
    for c in tables {
        t.row([
            c.maturity.clone(),
            c.common_targets.to_string(),
            c.r2.a.to_string(),
            c.r2.b.to_string(),
            c.r2.c.to_string(),
            c.r2.d.to_string(),
            c.rmse.a.to_string(),
            c.rmse.b.to_string(),
            c.rmse.c.to_string(),
            c.rmse.d.to_string(),
        ])?;
    }
    t.finish()?;
    write_json(
        dir,
        &CompareSummary {
            sharp_window,
            classic_window,
            tables: tables
                .iter()
                .map(|c| CompareEntry {
                    maturity: &c.maturity,
                    common_targets: c.common_targets,
                    r2: &c.r2,
                    rmse: &c.rmse,
                })
                .collect(),
        },
    )
}

#[derive(Serialize)]
struct SegmentSummary<'a> {
    maturity: &'a str,
    segmentation: &'a Segmentation,
    shift: &'a ShiftRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    detected: Option<&'a ChangePointSet>,
}

pub fn write_segmentation(
    dir: &Path,
    series: &RateSeries,
    seg: &Segmentation,
    shift: &ShiftRecord,
    detected: Option<&ChangePointSet>,
) -> Result<()> {
    ensure_dir(dir)?;
    let mut t = Table::create(dir, SEGMENTS_FILE, &["group", "start", "end", "n", "start_date", "end_date"])?;
    let dates = series.timestamps();
    for (j, &(s, e)) in seg.groups().iter().enumerate() {
        t.row([
            (j + 1).to_string(),
            s.to_string(),
            e.to_string(),
            (e + 1 - s).to_string(),
            dates[s - 1].format("%Y-%m-%d").to_string(),
            dates[e - 1].format("%Y-%m-%d").to_string(),
        ])?;
    }
    t.finish()?;
    write_json(
        dir,
        &SegmentSummary {
            maturity: series.maturity_label(),
            segmentation: seg,
            shift,
            detected,
        },
    )
}
