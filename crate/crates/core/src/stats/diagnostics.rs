//! Residual diagnostics: autocorrelation, unit root and normality tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distributions::{adf_pvalue_constant, chi2_sf};
use super::mean;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject_at: f64,
    pub rejected: bool,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64, reject_at: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            p_value,
            reject_at,
            rejected: p_value < reject_at,
        }
    }
}

/// `min(10, floor(n / 4))`, never below one.
pub fn default_max_lag(n: usize) -> usize {
    (n / 4).clamp(1, 10)
}

/// Sample autocorrelations at lags `1..=max_lag`.
pub fn sample_acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n <= max_lag {
        return Err(Error::TooShort {
            needed: max_lag + 1,
            got: n,
        });
    }
    let m = mean(x);
    let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    if c0 <= f64::EPSILON * x.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate(
            "constant series has undefined autocorrelations".into(),
        ));
    }
    Ok((1..=max_lag)
        .map(|k| {
            (k..n).map(|t| (x[t] - m) * (x[t - k] - m)).sum::<f64>() / c0
        })
        .collect())
}

/// Sample partial autocorrelations via the Durbin-Levinson recursion.
pub fn pacf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = sample_acf(x, max_lag)?;
    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = rho[k - 1] - (1..k).map(|j| phi[j - 1] * rho[k - j - 1]).sum::<f64>();
        let a = if v > 0.0 { num / v } else { 0.0 };
        let mut next = vec![0.0; k];
        for j in 1..k {
            next[j - 1] = phi[j - 1] - a * phi[k - j - 1];
        }
        next[k - 1] = a;
        phi = next;
        v *= 1.0 - a * a;
        out.push(a);
    }
    Ok(out)
}

/// True when every partial autocorrelation up to `max_lag` lies inside ±1.96/√n.
pub fn pacf_within_bands(x: &[f64], max_lag: usize) -> Result<bool> {
    let band = 1.96 / (x.len() as f64).sqrt();
    Ok(pacf(x, max_lag)?.iter().all(|p| p.abs() <= band))
}

/// Ljung-Box portmanteau test; `rejected` means autocorrelation is present.
///
/// Degrees of freedom are `max_lag - fitted_params`, floored at one.
pub fn ljung_box(
    residuals: &[f64],
    max_lag: usize,
    fitted_params: usize,
    alpha: f64,
) -> Result<TestResult> {
    if max_lag == 0 {
        return Err(Error::InvalidInput("Ljung-Box needs max_lag >= 1".into()));
    }
    let rho = sample_acf(residuals, max_lag)?;
    let n = residuals.len() as f64;
    let q = n * (n + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (n - (i + 1) as f64))
            .sum::<f64>();
    let df = max_lag.saturating_sub(fitted_params).max(1) as f64;
    Ok(TestResult::new(q, chi2_sf(q, df), alpha))
}

/// `floor((n - 1)^(1/3))`.
pub fn adf_lag_order(n: usize) -> usize {
    let l = ((n - 1) as f64).cbrt();
    // guard against cbrt landing a hair under an exact cube
    (l + 1e-9).floor() as usize
}

/// Augmented Dickey-Fuller test with a constant; `rejected` means the
/// unit root is rejected, i.e. the series looks stationary.
pub fn unit_root_test(series: &[f64], alpha: f64) -> Result<TestResult> {
    let n = series.len();
    if n < 8 {
        return Err(Error::TooShort { needed: 8, got: n });
    }
    let lags = adf_lag_order(n);
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    // rows indexed by t over dy[lags..]
    let rows = dy.len() - lags;
    let cols = 2 + lags;
    let mut x = DMatrix::<f64>::zeros(rows, cols);
    let mut y = DVector::<f64>::zeros(rows);
    for (r, t) in (lags..dy.len()).enumerate() {
        y[r] = dy[t];
        x[(r, 0)] = 1.0;
        x[(r, 1)] = series[t];
        for j in 1..=lags {
            x[(r, 1 + j)] = dy[t - j];
        }
    }
    let (beta, se) = ols(&x, &y)?;
    let tau = beta[1] / se[1];
    Ok(TestResult::new(tau, adf_pvalue_constant(tau), alpha))
}

/// Least squares coefficients and standard errors.
fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let (rows, cols) = x.shape();
    if rows <= cols {
        return Err(Error::Degenerate("regression has no residual degrees of freedom".into()));
    }
    // column scaling keeps the rank test meaningful across units
    let scales: Vec<f64> = (0..cols)
        .map(|c| x.column(c).norm().max(f64::MIN_POSITIVE))
        .collect();
    let mut xs = x.clone();
    for (c, s) in scales.iter().enumerate() {
        xs.column_mut(c).unscale_mut(*s);
    }
    let svd = xs.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax {
        return Err(Error::Degenerate("collinear regressors".into()));
    }
    let beta_s = svd
        .solve(y, 0.0)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let resid = y - &xs * &beta_s;
    let s2 = resid.norm_squared() / (rows - cols) as f64;
    if s2 <= 1e-28 * y.norm_squared().max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("regression fits exactly".into()));
    }
    let xtx = xs.transpose() * &xs;
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular normal equations".into()))?;
    let beta = DVector::from_iterator(cols, (0..cols).map(|c| beta_s[c] / scales[c]));
    let se = DVector::from_iterator(
        cols,
        (0..cols).map(|c| (s2 * inv[(c, c)]).sqrt() / scales[c]),
    );
    Ok((beta, se))
}

/// Jarque-Bera normality test; `rejected` means normality is rejected.
pub fn normality_test(sample: &[f64], alpha: f64) -> Result<TestResult> {
    let n = sample.len();
    if n < 8 {
        return Err(Error::TooShort { needed: 8, got: n });
    }
    let m = mean(sample);
    let nf = n as f64;
    let m2 = sample.iter().map(|x| (x - m).powi(2)).sum::<f64>() / nf;
    if m2 <= f64::EPSILON * m * m || m2 == 0.0 {
        return Err(Error::ZeroVariance("normality test on a constant sample".into()));
    }
    let m3 = sample.iter().map(|x| (x - m).powi(3)).sum::<f64>() / nf;
    let m4 = sample.iter().map(|x| (x - m).powi(4)).sum::<f64>() / nf;
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let jb = nf / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    Ok(TestResult::new(jb, chi2_sf(jb, 2.0), alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acf_of_constant_is_degenerate() {
        assert!(matches!(sample_acf(&[1.0; 20], 3), Err(Error::Degenerate(_))));
        assert!(matches!(
            ljung_box(&[0.5; 20], 3, 0, 0.05),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn ramp_is_degenerate_for_adf() {
        let ramp: Vec<f64> = (0..40).map(|i| 0.5 * i as f64).collect();
        assert!(matches!(unit_root_test(&ramp, 0.05), Err(Error::Degenerate(_))));
        assert!(unit_root_test(&ramp[..7], 0.05).is_err());
    }

    #[test]
    fn jarque_bera_constant_sample() {
        assert!(matches!(
            normality_test(&[3.0; 12], 0.05),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn lag_rules() {
        assert_eq!(default_max_lag(8), 2);
        assert_eq!(default_max_lag(200), 10);
        assert_eq!(default_max_lag(3), 1);
        assert_eq!(adf_lag_order(9), 2);
        assert_eq!(adf_lag_order(200), 5);
        assert_eq!(adf_lag_order(8), 1);
    }

    #[test]
    fn pacf_of_ar1_pattern() {
        // first partial autocorrelation equals the first autocorrelation
        let x = [1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 5.5, 7.0, 6.0, 8.0];
        let acf = sample_acf(&x, 3).unwrap();
        let p = pacf(&x, 3).unwrap();
        assert!((acf[0] - p[0]).abs() < 1e-15);
        let want2 = (acf[1] - acf[0] * acf[0]) / (1.0 - acf[0] * acf[0]);
        assert!((p[1] - want2).abs() < 1e-14);
    }
}
