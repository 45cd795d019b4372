//! Residual screening of the ARIMA grid for one group.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_arima, ArimaFit, ArimaSpec};
use crate::error::{Error, Result};
use crate::johnson::{fit_johnson, JohnsonFamily, JohnsonFit};
use crate::stats::{
    default_max_lag, ljung_box, normality_test, pacf_within_bands, unit_root_test, TestResult,
    DEFAULT_ALPHA,
};

/// Shortest group the residual diagnostics accept.
pub const MIN_DIAGNOSTIC_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub alpha: f64,
    /// Accept candidates whose partial autocorrelations leave the bands.
    pub relax_pac: bool,
    /// In-sample R² an ARIMA fit must exceed.
    pub r2_threshold: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            alpha: DEFAULT_ALPHA,
            relax_pac: false,
            r2_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDiagnostics {
    pub ljung_box: Option<TestResult>,
    pub pac_in_bands: bool,
    pub unit_root: Option<TestResult>,
    pub normality: Option<TestResult>,
    pub johnson: Option<JohnsonFit>,
    /// Johnson quantile fit failed and plain standardisation was used.
    pub johnson_fallback: bool,
    /// Residuals clamped into the Johnson support.
    pub clamped: usize,
    pub no_autocorrelation: bool,
    pub stationary: bool,
    pub normal: bool,
    pub r2_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub fit: ArimaFit,
    pub diagnostics: CandidateDiagnostics,
    /// Normalised residuals aligned with the group; pre-sample entries are zero.
    pub shocks: Vec<f64>,
    /// Passes the autocorrelation, unit-root, normality and R² screens.
    pub sub_optimal: bool,
    /// Minimises BIC among fits with the same differencing order.
    pub satisfies_bic: bool,
    /// CIR fit quality once calibrated: `Some(true)` when R²_CIR exceeds the threshold.
    pub cir_ok: Option<bool>,
}

/// Screened ARIMA grid for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub group_index: usize,
    pub group_len: usize,
    pub entries: Vec<CandidateEntry>,
    /// Specs that could not be fitted, with the reason.
    pub skipped: Vec<(ArimaSpec, String)>,
}

impl CandidateSet {
    /// Entries satisfying the four residual/fit screens.
    pub fn sub_optimal(&self) -> impl Iterator<Item = &CandidateEntry> {
        self.entries.iter().filter(|e| e.sub_optimal)
    }

    pub fn is_empty(&self) -> bool {
        self.sub_optimal().next().is_none()
    }

    /// Sub-optimal entries not (yet) ruled out by the CIR fit check.
    pub fn i_ac(&self) -> Vec<&CandidateEntry> {
        self.sub_optimal().filter(|e| e.cir_ok != Some(false)).collect()
    }

    /// [`i_ac`](Self::i_ac) restricted to BIC minimisers.
    pub fn i_acb(&self) -> Vec<&CandidateEntry> {
        self.i_ac().into_iter().filter(|e| e.satisfies_bic).collect()
    }

    pub fn find(&self, spec: ArimaSpec) -> Option<&CandidateEntry> {
        self.entries.iter().find(|e| e.fit.spec == spec)
    }
}

/// Normalised shocks: Johnson-transformed residuals after the pre-sample
/// stretch, zeros before it.
fn normalise_residuals(fit: &ArimaFit) -> (Vec<f64>, Option<JohnsonFit>, bool, usize) {
    let skip = fit.spec.presample_len().min(fit.residuals.len());
    let effective = &fit.residuals[skip..];
    let (johnson, fallback) = match fit_johnson(effective) {
        Ok(j) => (Some(j), false),
        Err(_) => (JohnsonFit::standardizing(effective).ok(), true),
    };
    let mut shocks = vec![0.0; fit.residuals.len()];
    let mut clamped = 0;
    if let Some(j) = &johnson {
        for (dst, &x) in shocks[skip..].iter_mut().zip(effective) {
            let (z, c) = j.transform_clamped(x);
            *dst = z;
            clamped += usize::from(c);
        }
    }
    (shocks, johnson, fallback, clamped)
}

fn screen(fit: ArimaFit, n: usize, config: &DiagnosticsConfig) -> CandidateEntry {
    let max_lag = default_max_lag(n);
    let spec = fit.spec;
    let lb = ljung_box(&fit.residuals, max_lag, spec.p + spec.q, config.alpha).ok();
    let pac_in_bands = pacf_within_bands(&fit.residuals, max_lag).unwrap_or(false);
    let adf = unit_root_test(&fit.residuals, config.alpha).ok();
    let (shocks, johnson, johnson_fallback, clamped) = normalise_residuals(&fit);
    let normality = if johnson.is_some() {
        normality_test(&shocks, config.alpha).ok()
    } else {
        None
    };
    let no_autocorrelation = lb.is_some_and(|t| !t.rejected) && (pac_in_bands || config.relax_pac);
    let stationary = adf.is_some_and(|t| t.rejected);
    let normal = normality.is_some_and(|t| !t.rejected);
    let r2_ok = fit.r2_arima > config.r2_threshold;
    CandidateEntry {
        sub_optimal: no_autocorrelation && stationary && normal && r2_ok,
        diagnostics: CandidateDiagnostics {
            ljung_box: lb,
            pac_in_bands,
            unit_root: adf,
            normality,
            johnson,
            johnson_fallback,
            clamped,
            no_autocorrelation,
            stationary,
            normal,
            r2_ok,
        },
        shocks,
        fit,
        satisfies_bic: false,
        cir_ok: None,
    }
}

/// Fits every spec of the grid to `group` and screens the residuals.
///
/// Specs that fail to fit are listed in `skipped`. BIC flags mark, for each
/// differencing order, the `(p, q)` pair with the smallest BIC.
pub fn enumerate_candidates(
    group: &[f64],
    group_index: usize,
    config: &DiagnosticsConfig,
) -> Result<CandidateSet> {
    let n = group.len();
    if n < MIN_DIAGNOSTIC_LEN {
        return Err(Error::TooShort {
            needed: MIN_DIAGNOSTIC_LEN,
            got: n,
        });
    }
    let results: Vec<(ArimaSpec, Result<ArimaFit>)> = ArimaSpec::grid()
        .into_par_iter()
        .map(|spec| (spec, fit_arima(group, spec)))
        .collect();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (spec, res) in results {
        match res {
            Ok(fit) => entries.push(screen(fit, n, config)),
            Err(e) => {
                log::debug!("ARIMA{spec} skipped: {e}");
                skipped.push((spec, e.to_string()));
            }
        }
    }
    for d in 0..=2 {
        let min_bic = entries
            .iter()
            .filter(|e| e.fit.spec.i == d)
            .map(|e| e.fit.bic)
            .fold(f64::INFINITY, f64::min);
        for e in entries.iter_mut().filter(|e| e.fit.spec.i == d) {
            e.satisfies_bic = e.fit.bic <= min_bic + 1e-9 * min_bic.abs().max(1.0);
        }
    }
    Ok(CandidateSet {
        group_index,
        group_len: n,
        entries,
        skipped,
    })
}

impl CandidateDiagnostics {
    pub fn johnson_family(&self) -> Option<JohnsonFamily> {
        self.johnson.map(|j| j.family)
    }
}
