//! Rolling one-step forecasts and the comparison with classical CIR.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_group, PipelineConfig};
use crate::cir::{conditional_mean, martingale_estimate, milstein_step, MIN_MARTINGALE_WINDOW};
use crate::error::{Error, Result};
use crate::market_data::{shift_if_needed, RateSeries, ShiftRecord};
use crate::segmentation::Segmentation;
use crate::stats::{r_squared, rmse};

/// Smallest CIR# forecast window.
pub const MIN_FORECAST_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    /// 1-based index of the predicted observation.
    pub horizon_index: usize,
    /// `None` when the window pipeline failed.
    pub predicted: Option<f64>,
    /// `None` past the end of the series.
    pub realized: Option<f64>,
    /// 1-based inclusive window.
    pub window: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastSummary {
    pub r2: f64,
    pub rmse: f64,
    pub predicted: usize,
    pub unpredicted: usize,
}

impl ForecastSummary {
    /// R² and RMSE over positions that have both a prediction and a realised value.
    pub fn from_results(results: &[ForecastResult]) -> Result<Self> {
        let (real, pred): (Vec<f64>, Vec<f64>) = results
            .iter()
            .filter_map(|f| Some((f.realized?, f.predicted?)))
            .unzip();
        let unpredicted = results
            .iter()
            .filter(|f| f.realized.is_some() && f.predicted.is_none())
            .count();
        Ok(ForecastSummary {
            r2: r_squared(&real, &pred)?,
            rmse: rmse(&real, &pred)?,
            predicted: real.len(),
            unpredicted,
        })
    }
}

fn single_group_shift(window: &RateSeries, threshold: f64) -> Result<(RateSeries, ShiftRecord)> {
    let seg = Segmentation::fixed(window.len(), window.len())?;
    shift_if_needed(window, &seg, threshold)
}

/// One-step CIR# prediction from a window treated as one group.
fn predict_sharp(window: &RateSeries, config: &PipelineConfig) -> Result<f64> {
    let values = window.values();
    let last = values[values.len() - 1];
    // Constant window: the drift fixed point is the value itself.
    if values.iter().all(|&v| v == last) {
        return Ok(last);
    }
    let (shifted, shift) = single_group_shift(window, config.shift_threshold)?;
    let g = fit_group(shifted.values(), (1, shifted.len()), 0, shifted.delta(), &shift, config)?;
    let r = shifted.values()[shifted.len() - 1];
    Ok(shift.invert(milstein_step(r, &g.calibration.params, shifted.delta(), 0.0)))
}

/// One-step classical prediction: martingale estimate on the window and
/// the conditional mean from its last value.
fn predict_classic(window: &RateSeries, config: &PipelineConfig) -> Result<f64> {
    let (shifted, shift) = single_group_shift(window, config.shift_threshold)?;
    let params = martingale_estimate(shifted.values(), shifted.delta())?;
    let r = shifted.values()[shifted.len() - 1];
    Ok(shift.invert(conditional_mean(&params, r, shifted.delta())))
}

fn rolling<F>(series: &RateSeries, m: usize, predict: F) -> Result<Vec<ForecastResult>>
where
    F: Fn(&RateSeries) -> Result<f64> + Sync,
{
    let n = series.len();
    if m >= n {
        return Err(Error::TooShort {
            needed: m + 1,
            got: n,
        });
    }
    let values = series.values();
    (m..=n)
        .into_par_iter()
        .map(|t| {
            // window covers 1-based t-m+1..=t and predicts t+1
            let window = series.slice(t - m + 1, t)?;
            let predicted = match predict(&window) {
                Ok(p) => Some(p),
                Err(e) => {
                    log::debug!("window {}-{t}: no prediction: {e}", t - m + 1);
                    None
                }
            };
            Ok(ForecastResult {
                horizon_index: t + 1,
                predicted,
                realized: values.get(t).copied(),
                window: (t - m + 1, t),
            })
        })
        .collect()
}

/// CIR# rolling forecast with trailing windows of `window_m` observations.
/// The last entry predicts one step past the end of the series.
pub fn rolling_forecast(
    series: &RateSeries,
    window_m: usize,
    config: &PipelineConfig,
) -> Result<Vec<ForecastResult>> {
    if window_m < MIN_FORECAST_WINDOW {
        return Err(Error::InvalidInput(format!(
            "forecast window {window_m} must be >= {MIN_FORECAST_WINDOW}"
        )));
    }
    rolling(series, window_m, |w| predict_sharp(w, config))
}

/// Classical CIR rolling forecast.
pub fn rolling_classic(
    series: &RateSeries,
    window_m: usize,
    config: &PipelineConfig,
) -> Result<Vec<ForecastResult>> {
    if window_m < MIN_MARTINGALE_WINDOW {
        return Err(Error::InvalidInput(format!(
            "classical window {window_m} must be >= {MIN_MARTINGALE_WINDOW}"
        )));
    }
    rolling(series, window_m, |w| predict_classic(w, config))
}

/// A metric compared across the two models: A (CIR#), B (CIR), C = A − B,
/// D = C / A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ComparisonRow {
    pub fn new(metric: &str, a: f64, b: f64) -> Self {
        let c = a - b;
        ComparisonRow {
            metric: metric.to_string(),
            a,
            b,
            c,
            d: c / a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub maturity: String,
    /// Number of target indices both models predicted.
    pub common_targets: usize,
    pub r2: ComparisonRow,
    pub rmse: ComparisonRow,
    pub sharp: Vec<ForecastResult>,
    pub classic: Vec<ForecastResult>,
}

/// Compares rolling CIR# and classical CIR forecasts on the target indices
/// both models predicted.
pub fn compare_with_cir(
    series: &RateSeries,
    m_sharp: usize,
    m_classic: usize,
    config: &PipelineConfig,
) -> Result<ComparisonTable> {
    if m_sharp < MIN_FORECAST_WINDOW || m_classic < MIN_MARTINGALE_WINDOW {
        return Err(Error::InvalidInput(format!(
            "windows ({m_sharp}, {m_classic}) must be at least ({MIN_FORECAST_WINDOW}, {MIN_MARTINGALE_WINDOW})"
        )));
    }
    let sharp = rolling_forecast(series, m_sharp, config)?;
    let classic = rolling_classic(series, m_classic, config)?;
    let mut real = Vec::new();
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    for s in &sharp {
        let Some(c) = classic.iter().find(|c| c.horizon_index == s.horizon_index) else {
            continue;
        };
        if let (Some(r), Some(a), Some(b)) = (s.realized, s.predicted, c.predicted) {
            real.push(r);
            pa.push(a);
            pb.push(b);
        }
    }
    if real.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: real.len(),
        });
    }
    Ok(ComparisonTable {
        maturity: series.maturity_label().to_string(),
        common_targets: real.len(),
        r2: ComparisonRow::new("r2", r_squared(&real, &pa)?, r_squared(&real, &pb)?),
        rmse: ComparisonRow::new("rmse", rmse(&real, &pa)?, rmse(&real, &pb)?),
        sharp,
        classic,
    })
}
