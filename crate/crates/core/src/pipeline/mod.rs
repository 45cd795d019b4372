//! The segmented ARIMA-CIR algorithm: per-group candidate screening,
//! CIR calibration gating, optimal-model selection, group shrinking and
//! weighted aggregation.

mod forecast;

pub use forecast::{
    compare_with_cir, rolling_forecast, ComparisonRow, ComparisonTable, ForecastResult,
    ForecastSummary,
};

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arima::{enumerate_candidates, ArimaSpec, CandidateSet, DiagnosticsConfig, MIN_DIAGNOSTIC_LEN};
use crate::cir::{calibrate_group, GroupCalibration, KSearch, ShockSeries};
use crate::error::{Error, Result};
use crate::market_data::{shift_if_needed, unshift, RateSeries, ShiftRecord, DEFAULT_SHIFT_THRESHOLD};
use crate::segmentation::{
    adjust_change_points, detect_change_points, Segmentation, DEFAULT_K_MAX, DEFAULT_MIN_SEGMENT_LEN,
};
use crate::stats::weighted_totals;

/// Minimum in-sample R² of a calibrated CIR path.
pub const CIR_R2_THRESHOLD: f64 = 0.5;
/// Observations removed from a failing group before retrying.
pub const SHRINK_STEP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub diagnostics: DiagnosticsConfig,
    pub k_search: KSearch,
    pub shift_threshold: f64,
    pub shrink_step: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            diagnostics: DiagnosticsConfig::default(),
            k_search: KSearch::default(),
            shift_threshold: DEFAULT_SHIFT_THRESHOLD,
            shrink_step: SHRINK_STEP,
        }
    }
}

/// One row of a group's candidate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub spec: ArimaSpec,
    pub r2_cir: f64,
    pub eps: f64,
    pub bic: f64,
    pub bic_flag: bool,
}

impl CandidateRow {
    pub fn eligible(&self) -> bool {
        passes_cir_check(self.r2_cir)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    /// 1-based inclusive range in the series.
    pub range: (usize, usize),
    pub chosen_spec: ArimaSpec,
    pub in_acb: bool,
    /// Calibration on the shifted scale.
    pub calibration: GroupCalibration,
    /// Fitted path mapped back to the observed scale.
    pub fitted_observed: Vec<f64>,
    pub candidate_table: Vec<CandidateRow>,
}

impl GroupResult {
    pub fn len(&self) -> usize {
        self.range.1 + 1 - self.range.0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A group that failed at its smallest admissible size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfittedGroup {
    pub range: (usize, usize),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub maturity: String,
    /// Groups as finally processed (after any shrinking).
    pub segmentation: Segmentation,
    pub shift: ShiftRecord,
    pub groups: Vec<GroupResult>,
    pub unfitted: Vec<UnfittedGroup>,
    pub total_r2: f64,
    pub total_eps: f64,
    pub log: Vec<String>,
}

impl CalibrationReport {
    /// Totals recomputed from the fitted groups.
    pub fn recompute_totals(groups: &[GroupResult]) -> Result<(f64, f64)> {
        let sizes: Vec<usize> = groups.iter().map(GroupResult::len).collect();
        let r2: Vec<f64> = groups.iter().map(|g| g.calibration.r2_cir).collect();
        let eps: Vec<f64> = groups.iter().map(|g| g.calibration.eps).collect();
        weighted_totals(&sizes, &r2, &eps)
    }
}

/// Strict `R² > 0.5`.
pub fn passes_cir_check(r2_cir: f64) -> bool {
    r2_cir > CIR_R2_THRESHOLD
}

/// Screens the ARIMA grid on `group`; true iff some candidate passes the
/// residual and fit screens. The BIC flag is recorded but does not gate.
pub fn check1(group: &[f64], group_index: usize, config: &DiagnosticsConfig) -> (bool, CandidateSet) {
    match enumerate_candidates(group, group_index, config) {
        Ok(set) => (!set.is_empty(), set),
        Err(e) => {
            log::debug!("group {group_index}: candidate screen failed: {e}");
            (
                false,
                CandidateSet {
                    group_index,
                    group_len: group.len(),
                    entries: Vec::new(),
                    skipped: vec![],
                },
            )
        }
    }
}

/// Calibrates CIR for every sub-optimal candidate, driving the path with
/// that candidate's normalised residuals. Marks `cir_ok` on the entries.
pub fn check2(
    group: &[f64],
    candidates: &mut CandidateSet,
    delta: f64,
    search: &KSearch,
) -> (bool, Vec<(ArimaSpec, GroupCalibration)>) {
    let mut out = Vec::new();
    for entry in candidates.entries.iter_mut().filter(|e| e.sub_optimal) {
        let cal = ShockSeries::new(entry.shocks.clone())
            .and_then(|z| calibrate_group(group, &z, delta, search));
        match cal {
            Ok(c) => {
                entry.cir_ok = Some(passes_cir_check(c.r2_cir));
                out.push((entry.fit.spec, c));
            }
            Err(e) => {
                log::debug!("ARIMA{} calibration failed: {e}", entry.fit.spec);
                entry.cir_ok = Some(false);
            }
        }
    }
    let ok = out.iter().any(|(_, c)| passes_cir_check(c.r2_cir));
    (ok, out)
}

/// Picks the optimal spec among rows with `R²_CIR > 0.5`.
///
/// BIC minimisers are preferred when any is eligible. Within the chosen
/// pool the smallest `eps` wins; ties go to lower BIC, then smaller
/// `p + i + q`, then `(p, i, q)` order.
pub fn select_optimal(rows: &[CandidateRow]) -> Result<ArimaSpec> {
    let eligible: Vec<&CandidateRow> = rows.iter().filter(|r| r.eligible()).collect();
    if eligible.is_empty() {
        return Err(Error::NoEligibleCandidate(format!(
            "none of {} candidates has R²_CIR > {CIR_R2_THRESHOLD}",
            rows.len()
        )));
    }
    let with_bic: Vec<&CandidateRow> = eligible.iter().copied().filter(|r| r.bic_flag).collect();
    let pool = if with_bic.is_empty() { eligible } else { with_bic };
    pool.into_iter()
        .min_by(|a, b| {
            a.eps
                .total_cmp(&b.eps)
                .then(a.bic.total_cmp(&b.bic))
                .then(a.spec.order_sum().cmp(&b.spec.order_sum()))
                .then(a.spec.cmp(&b.spec))
        })
        .map(|r| r.spec)
        .ok_or_else(|| Error::NoEligibleCandidate("empty pool".into()))
}

/// Full single-group pass on shifted values: screen, calibrate, select.
pub fn fit_group(
    values: &[f64],
    range: (usize, usize),
    group_index: usize,
    delta: f64,
    shift: &ShiftRecord,
    config: &PipelineConfig,
) -> Result<GroupResult> {
    let group = &values[range.0 - 1..range.1];
    let (ok1, mut set) = check1(group, group_index, &config.diagnostics);
    if !ok1 {
        return Err(Error::NoEligibleCandidate(format!(
            "group {}-{}: no ARIMA candidate passes the residual screens ({} fitted, {} skipped)",
            range.0,
            range.1,
            set.entries.len(),
            set.skipped.len()
        )));
    }
    let (ok2, calibrations) = check2(group, &mut set, delta, &config.k_search);
    if !ok2 {
        return Err(Error::NoEligibleCandidate(format!(
            "group {}-{}: no calibrated CIR path reaches R² > {CIR_R2_THRESHOLD}",
            range.0, range.1
        )));
    }
    let rows: Vec<CandidateRow> = calibrations
        .iter()
        .map(|(spec, c)| {
            let entry = set.find(*spec).expect("calibrated spec comes from the set");
            CandidateRow {
                spec: *spec,
                r2_cir: c.r2_cir,
                eps: c.eps,
                bic: entry.fit.bic,
                bic_flag: entry.satisfies_bic,
            }
        })
        .collect();
    let chosen = select_optimal(&rows)?;
    let in_acb = set.i_acb().iter().any(|e| e.fit.spec == chosen);
    let calibration = calibrations
        .into_iter()
        .find(|(s, _)| *s == chosen)
        .map(|(_, c)| c)
        .expect("chosen spec was calibrated");
    let fitted_observed = unshift(&calibration.fitted, shift);
    Ok(GroupResult {
        range,
        chosen_spec: chosen,
        in_acb,
        calibration,
        fitted_observed,
        candidate_table: rows,
    })
}

enum Outcome {
    Fitted(GroupResult),
    Unfitted(UnfittedGroup),
}

/// Processes one initial group, shrinking on failure. A failing group is
/// retried on its first `n - step` observations and its trailing `step`
/// observations become a pending group right after it.
fn process_group(
    values: &[f64],
    range: (usize, usize),
    delta: f64,
    shift: &ShiftRecord,
    config: &PipelineConfig,
    log: &mut Vec<String>,
) -> Vec<Outcome> {
    let step = config.shrink_step;
    let mut pending = VecDeque::from([range]);
    let mut out = Vec::new();
    while let Some((s, e)) = pending.pop_front() {
        let len = e + 1 - s;
        let attempt = if len < MIN_DIAGNOSTIC_LEN {
            Err(Error::TooShort {
                needed: MIN_DIAGNOSTIC_LEN,
                got: len,
            })
        } else {
            fit_group(values, (s, e), 0, delta, shift, config)
        };
        match attempt {
            Ok(g) => out.push(Outcome::Fitted(g)),
            Err(err) if len >= step + MIN_DIAGNOSTIC_LEN => {
                log.push(format!(
                    "group {s}-{e} failed ({err}); retrying on {s}-{} with {}-{e} pending",
                    e - step,
                    e - step + 1
                ));
                pending.push_front((e - step + 1, e));
                pending.push_front((s, e - step));
            }
            Err(err) => {
                log.push(format!("WARNING: group {s}-{e} left unfitted: {err}"));
                out.push(Outcome::Unfitted(UnfittedGroup {
                    range: (s, e),
                    reason: err.to_string(),
                }));
            }
        }
    }
    out
}

/// Runs the algorithm on an already shifted series.
pub fn run_arima_cir(
    series: &RateSeries,
    seg: &Segmentation,
    shift: ShiftRecord,
    config: &PipelineConfig,
) -> Result<CalibrationReport> {
    if !seg.covers(series.len()) {
        return Err(Error::InvalidInput(format!(
            "segmentation covers {} observations, series has {}",
            seg.series_len(),
            series.len()
        )));
    }
    if let Some(v) = series.values().iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "series must be translated to positive values first (found {v})"
        )));
    }
    let values = series.values();
    let delta = series.delta();
    let per_group: Vec<(Vec<Outcome>, Vec<String>)> = seg
        .groups()
        .par_iter()
        .map(|&range| {
            let mut log = Vec::new();
            let out = process_group(values, range, delta, &shift, config, &mut log);
            (out, log)
        })
        .collect();

    let mut groups = Vec::new();
    let mut unfitted = Vec::new();
    let mut ranges = Vec::new();
    let mut log = Vec::new();
    for (outcomes, msgs) in per_group {
        log.extend(msgs);
        for o in outcomes {
            match o {
                Outcome::Fitted(g) => {
                    ranges.push(g.range);
                    groups.push(g);
                }
                Outcome::Unfitted(u) => {
                    ranges.push(u.range);
                    unfitted.push(u);
                }
            }
        }
    }
    for msg in log.iter().filter(|m| m.starts_with("WARNING")) {
        log::warn!("{}", msg.trim_start_matches("WARNING: "));
    }
    let (total_r2, total_eps) = if groups.is_empty() {
        log.push("WARNING: no group could be fitted; totals undefined".into());
        (f64::NAN, f64::NAN)
    } else {
        if !unfitted.is_empty() {
            log.push(format!(
                "WARNING: totals exclude {} unfitted group(s)",
                unfitted.len()
            ));
        }
        CalibrationReport::recompute_totals(&groups)?
    };
    Ok(CalibrationReport {
        maturity: series.maturity_label().to_string(),
        segmentation: Segmentation::new(ranges, seg.source())?,
        shift,
        groups,
        unfitted,
        total_r2,
        total_eps,
        log,
    })
}

/// Translates when needed, then runs [`run_arima_cir`].
pub fn calibrate_series(
    series: &RateSeries,
    seg: &Segmentation,
    config: &PipelineConfig,
) -> Result<CalibrationReport> {
    let (shifted, shift) = shift_if_needed(series, seg, config.shift_threshold)?;
    run_arima_cir(&shifted, seg, shift, config)
}

/// Settings for change-point driven segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePointConfig {
    pub k_max: usize,
    pub min_segment_len: usize,
}

impl Default for ChangePointConfig {
    fn default() -> Self {
        ChangePointConfig {
            k_max: DEFAULT_K_MAX,
            min_segment_len: DEFAULT_MIN_SEGMENT_LEN,
        }
    }
}

impl ChangePointConfig {
    /// `k_max` capped at the number of segments of `min_segment_len` that
    /// fit into `n` observations.
    pub fn effective_k_max(&self, n: usize) -> usize {
        self.k_max.min(n / self.min_segment_len.max(1)).max(1)
    }
}

/// Detects variance change points and rescales them until every group
/// passes both checks. Returns the segmentation with the translated series.
pub fn change_point_segmentation(
    series: &RateSeries,
    cp: &ChangePointConfig,
    config: &PipelineConfig,
) -> Result<(Segmentation, RateSeries, ShiftRecord)> {
    let k_max = cp.effective_k_max(series.len());
    let points = detect_change_points(series.values(), k_max, cp.min_segment_len)?;
    let raw = Segmentation::from_change_points(series.len(), &points.points)?;
    let (shifted, shift) = shift_if_needed(series, &raw, config.shift_threshold)?;
    let values = shifted.values();
    let delta = shifted.delta();
    let seg = adjust_change_points(series.len(), &points, cp.min_segment_len, |s, e| {
        let group = &values[s - 1..e];
        if group.len() < MIN_DIAGNOSTIC_LEN {
            return false;
        }
        let (ok1, mut set) = check1(group, 0, &config.diagnostics);
        ok1 && check2(group, &mut set, delta, &config.k_search).0
    })?;
    Ok((seg, shifted, shift))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: usize, i: usize, q: usize, r2: f64, eps: f64, bic: f64, flag: bool) -> CandidateRow {
        CandidateRow {
            spec: ArimaSpec::new(p, i, q).unwrap(),
            r2_cir: r2,
            eps,
            bic,
            bic_flag: flag,
        }
    }

    #[test]
    fn strict_threshold() {
        assert!(!passes_cir_check(0.5));
        assert!(passes_cir_check(0.500_000_1));
        assert!(select_optimal(&[row(1, 0, 1, 0.5, 0.1, 0.0, true)]).is_err());
    }

    #[test]
    fn minimal_eps_wins() {
        let rows = [
            row(1, 1, 1, 0.62, 0.1701, 10.0, false),
            row(1, 1, 2, 0.66, 0.1554, 12.0, false),
            row(2, 1, 1, 0.71, 0.1602, 11.0, false),
            row(3, 0, 3, 0.40, 0.0100, 9.0, false),
        ];
        assert_eq!(select_optimal(&rows).unwrap(), ArimaSpec::new(1, 1, 2).unwrap());
    }

    #[test]
    fn bic_pool_preferred_when_nonempty() {
        let rows = [
            row(1, 0, 1, 0.9, 0.01, 5.0, false),
            row(2, 0, 2, 0.6, 0.20, 3.0, true),
        ];
        assert_eq!(select_optimal(&rows).unwrap(), ArimaSpec::new(2, 0, 2).unwrap());
    }

    #[test]
    fn ties_break_on_bic_then_order_sum_then_lexicographic() {
        let a = row(2, 0, 2, 0.8, 0.1, 4.0, false);
        let b = row(1, 0, 1, 0.8, 0.1, 4.0, false);
        assert_eq!(select_optimal(&[a.clone(), b.clone()]).unwrap(), b.spec);
        let c = row(3, 0, 3, 0.8, 0.1, 3.0, false);
        assert_eq!(select_optimal(&[a, b, c.clone()]).unwrap(), c.spec);
        let d = row(2, 0, 1, 0.8, 0.1, 4.0, false);
        let e = row(1, 0, 2, 0.8, 0.1, 4.0, false);
        assert_eq!(select_optimal(&[d, e.clone()]).unwrap(), e.spec);
    }

    #[test]
    fn constant_group_fails_check1() {
        let (ok, set) = check1(&[0.7; 16], 0, &DiagnosticsConfig::default());
        assert!(!ok);
        assert!(set.is_empty());
    }

    #[test]
    fn short_noise_group_does_not_throw() {
        let g = [1.02, 0.97, 1.05, 0.99, 1.01, 0.96, 1.04, 1.0];
        let _ = check1(&g, 0, &DiagnosticsConfig::default());
    }
}
