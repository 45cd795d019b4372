//! Deterministic statistics shared by every stage of the calibration.
//!
//! Goodness-of-fit scores, weighted aggregation across groups, one-way
//! ANOVA and the residual diagnostics used to screen ARIMA candidates.

mod anova;
mod diagnostics;
pub mod distributions;

pub use anova::{one_way_anova, AnovaTable};
pub use diagnostics::{
    adf_lag_order, default_max_lag, ljung_box, normality_test, pacf, pacf_within_bands,
    sample_acf, unit_root_test, TestResult,
};

use crate::error::{Error, Result};

/// Significance level used when none is configured.
pub const DEFAULT_ALPHA: f64 = 0.05;

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the `n - 1` denominator.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sample_std(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

/// Goodness-of-fit score on mean-adjusted residuals.
///
/// `1 - Σ(e - ē)² / Σ(r - r̄)²` where `e = observed - fitted`. Can be
/// negative; equals one exactly when the residuals are constant.
pub fn r_squared(observed: &[f64], fitted: &[f64]) -> Result<f64> {
    if observed.len() != fitted.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: fitted.len(),
        });
    }
    if observed.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: observed.len(),
        });
    }
    let r_bar = mean(observed);
    let denom: f64 = observed.iter().map(|r| (r - r_bar).powi(2)).sum();
    if denom <= 0.0 {
        return Err(Error::ZeroVariance(
            "observed series is constant; R² undefined".into(),
        ));
    }
    let resid: Vec<f64> = observed.iter().zip(fitted).map(|(r, f)| r - f).collect();
    let e_bar = mean(&resid);
    let num: f64 = resid.iter().map(|e| (e - e_bar).powi(2)).sum();
    Ok(1.0 - num / denom)
}

/// Root mean squared error between two equal-length sequences.
pub fn rmse(observed: &[f64], fitted: &[f64]) -> Result<f64> {
    if observed.len() != fitted.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: fitted.len(),
        });
    }
    if observed.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let sse: f64 = observed
        .iter()
        .zip(fitted)
        .map(|(r, f)| (r - f).powi(2))
        .sum();
    Ok((sse / observed.len() as f64).sqrt())
}

/// Whole-sample scores assembled from per-group scores.
///
/// The R² total is the size-weighted mean of the group scores. The error
/// total is `sqrt(Σ (n_j / n) · n_j · ε_j²)`, the group sum of squared
/// errors being recovered as `n_j · ε_j²`.
pub fn weighted_totals(sizes: &[usize], r2: &[f64], eps: &[f64]) -> Result<(f64, f64)> {
    if sizes.is_empty() {
        return Err(Error::InvalidInput("weighted totals of zero groups".into()));
    }
    if sizes.len() != r2.len() || sizes.len() != eps.len() {
        return Err(Error::LengthMismatch {
            left: sizes.len(),
            right: r2.len().min(eps.len()),
        });
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidInput("group of size zero".into()));
    }
    if sizes.len() == 1 {
        return Ok((r2[0], eps[0]));
    }
    let n: usize = sizes.iter().sum();
    let n = n as f64;
    let mut total_r2 = 0.0;
    let mut total_sq = 0.0;
    for ((&nj, &r), &e) in sizes.iter().zip(r2).zip(eps) {
        let w = nj as f64 / n;
        total_r2 += w * r;
        total_sq += w * nj as f64 * e * e;
    }
    Ok((total_r2, total_sq.sqrt()))
}

/// Harmonic mean; `None` when any entry is non-positive.
pub fn harmonic_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let inv: f64 = values.iter().map(|v| 1.0 / v).sum();
    Some(values.len() as f64 / inv)
}

/// Empirical quantile, linear interpolation between order statistics at
/// the 1-based position `h = (n - 1)p + 1`.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, p)
}

pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn r_squared_examples() {
        let obs = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(r_squared(&obs, &obs).unwrap(), 1.0);
        let m = mean(&obs);
        assert_abs_diff_eq!(r_squared(&obs, &[m, m, m]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            r_squared(&obs, &[1.0, 2.0, 2.0]).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            r_squared(&[2.0, 2.0], &[1.0, 3.0]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(rmse(&[1.0, 2.0, 5.0], &[1.5, 2.5, 5.5]).unwrap(), 0.5);
        assert_abs_diff_eq!(
            rmse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(),
            1.58113883,
            epsilon = 1e-8
        );
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn weighted_totals_examples() {
        assert_eq!(weighted_totals(&[7], &[0.3], &[0.2]).unwrap(), (0.3, 0.2));
        let (r2, _) = weighted_totals(&[5, 5], &[0.0, 1.0], &[0.1, 0.1]).unwrap();
        assert_abs_diff_eq!(r2, 0.5);
        assert!(weighted_totals(&[], &[], &[]).is_err());
    }

    #[test]
    fn harmonic_mean_examples() {
        assert_abs_diff_eq!(harmonic_mean(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(harmonic_mean(&[1.0, 2.0, 4.0]).unwrap(), 12.0 / 7.0);
        assert!(harmonic_mean(&[1.0, 0.0]).is_none());
        assert!(harmonic_mean(&[1.0, -0.1]).is_none());
    }

    #[test]
    fn percentile_linear_interpolation() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_abs_diff_eq!(percentile(&v, 0.99), 99.01, epsilon = 1e-12);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 100.0);
        assert_eq!(percentile(&[3.0], 0.5), 3.0);
    }
}
