//! ARIMA(p, i, q) fitting by exact Gaussian likelihood and screening of the
//! candidate grid.

mod candidates;
mod state_space;

pub use candidates::{
    enumerate_candidates, CandidateDiagnostics, CandidateEntry, CandidateSet, DiagnosticsConfig,
    MIN_DIAGNOSTIC_LEN,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::stats::{mean, r_squared, sample_std};
use state_space::{ArmaFilter, FilterOutput};

/// Orders of an ARIMA model; `p`, `q` in 1..=3 and `i` in 0..=2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub i: usize,
    pub q: usize,
}

impl ArimaSpec {
    pub fn new(p: usize, i: usize, q: usize) -> Result<Self> {
        if !(1..=3).contains(&p) || !(1..=3).contains(&q) || i > 2 {
            return Err(Error::InvalidInput(format!(
                "ARIMA({p},{i},{q}) outside the p,q in 1..3, i in 0..2 grid"
            )));
        }
        Ok(ArimaSpec { p, i, q })
    }

    /// All 27 specs, ordered by `(p, i, q)`.
    pub fn grid() -> Vec<ArimaSpec> {
        let mut out = Vec::with_capacity(27);
        for p in 1..=3 {
            for i in 0..=2 {
                for q in 1..=3 {
                    out.push(ArimaSpec { p, i, q });
                }
            }
        }
        out
    }

    /// Coefficients plus intercept plus innovation variance.
    pub fn parameter_count(&self) -> usize {
        self.p + self.q + 2
    }

    pub fn order_sum(&self) -> usize {
        self.p + self.i + self.q
    }

    /// Leading residuals set to zero: `max(p, q) + i`.
    pub fn presample_len(&self) -> usize {
        self.p.max(self.q) + self.i
    }

    pub fn min_len(&self) -> usize {
        self.p + self.q + self.i + 3
    }
}

impl std::fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.i, self.q)
    }
}

/// A fitted ARIMA model together with its in-sample residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    /// Mean of the differenced series.
    pub intercept: f64,
    pub sigma2: f64,
    /// Standardised one-step residuals aligned with the input, the first
    /// `max(p, q) + i` entries set to zero.
    pub residuals: Vec<f64>,
    /// Raw one-step innovations of the differenced series.
    pub innovations: Vec<f64>,
    /// Innovation variances relative to `sigma2`.
    pub innovation_scale: Vec<f64>,
    /// One-step predictions of the levels from index `i` on.
    pub fitted_levels: Vec<f64>,
    pub loglik: f64,
    pub bic: f64,
    pub r2_arima: f64,
    pub iterations: usize,
}

impl ArimaFit {
    /// Rebuilds the differenced series from raw innovations by running the
    /// fitted recursion forward.
    pub fn reconstruct_differenced(&self, innovations: &[f64]) -> Vec<f64> {
        ArmaFilter::new(&self.ar_coeffs, &self.ma_coeffs)
            .expect("fitted coefficients are stationary")
            .reconstruct(self.intercept, innovations)
    }

    /// Residuals after the zeroed pre-sample stretch.
    pub fn effective_residuals(&self) -> &[f64] {
        &self.residuals[self.spec.presample_len().min(self.residuals.len())..]
    }
}

/// `k · ln(n) - 2 · loglik` with `k = p + q + 2`.
pub fn bic_of(fit: &ArimaFit, n: usize) -> f64 {
    bic_from(fit.spec, fit.loglik, n)
}

pub(crate) fn bic_from(spec: ArimaSpec, loglik: f64, n: usize) -> f64 {
    bic_value(spec.parameter_count(), loglik, n as f64)
}

/// `k · ln(n) - 2 · loglik` for an arbitrary (possibly non-integer) sample size.
pub fn bic_value(parameters: usize, loglik: f64, n: f64) -> f64 {
    parameters as f64 * n.ln() - 2.0 * loglik
}

/// `d`-th order differences.
pub fn difference(x: &[f64], d: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Maps unconstrained reals to the coefficients of a stationary AR
/// polynomial through partial autocorrelations.
pub(crate) fn constrain_stationary(raw: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = raw.iter().map(|v| v.tanh()).collect();
    let mut phi: Vec<f64> = Vec::with_capacity(raw.len());
    for (k, &a) in pacf.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - a * prev[k - 1 - j];
        }
        phi.push(a);
    }
    phi
}

/// Inverse of [`constrain_stationary`]; `None` when the polynomial is not
/// strictly stationary.
pub(crate) fn unconstrain_stationary(phi: &[f64]) -> Option<Vec<f64>> {
    let mut cur = phi.to_vec();
    let mut pacf = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let a = cur[k];
        if a.abs() >= 1.0 - 1e-12 {
            return None;
        }
        pacf[k] = a;
        let denom = 1.0 - a * a;
        let prev: Vec<f64> = (0..k).map(|j| (cur[j] + a * cur[k - 1 - j]) / denom).collect();
        cur = prev;
    }
    Some(pacf.iter().map(|a| a.atanh()).collect())
}

/// Whether all roots of `1 - Σ φ_j z^j` lie strictly outside the unit circle.
pub fn is_stationary(phi: &[f64]) -> bool {
    unconstrain_stationary(phi).is_some()
}

struct Scaled {
    data: Vec<f64>,
    center: f64,
    scale: f64,
}

fn unpack(spec: ArimaSpec, v: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let ar = constrain_stationary(&v[..spec.p]);
    let ma: Vec<f64> = constrain_stationary(&v[spec.p..spec.p + spec.q])
        .into_iter()
        .map(|c| -c)
        .collect();
    (ar, ma, v[spec.p + spec.q])
}

fn conditional_sum_of_squares(spec: ArimaSpec, w: &[f64], v: &[f64]) -> f64 {
    let (ar, ma, mu) = unpack(spec, v);
    let mut a = vec![0.0; w.len()];
    let mut css = 0.0;
    for t in spec.p..w.len() {
        let mut pred = mu;
        for (j, phi) in ar.iter().enumerate() {
            pred += phi * (w[t - 1 - j] - mu);
        }
        for (j, th) in ma.iter().enumerate() {
            if t > j {
                pred += th * a[t - 1 - j];
            }
        }
        a[t] = w[t] - pred;
        css += a[t] * a[t];
    }
    css
}

fn exact_negloglik(spec: ArimaSpec, w: &[f64], v: &[f64]) -> f64 {
    let (ar, ma, mu) = unpack(spec, v);
    match ArmaFilter::new(&ar, &ma) {
        Some(filter) => match filter.run(mu, w) {
            Some(out) => -out.profile_loglik(),
            None => f64::INFINITY,
        },
        None => f64::INFINITY,
    }
}

/// Exact Gaussian log-likelihood of the differenced data under given
/// coefficients, with the innovation variance profiled out.
pub fn profile_loglik(ar: &[f64], ma: &[f64], intercept: f64, differenced: &[f64]) -> Option<f64> {
    ArmaFilter::new(ar, ma)?.run(intercept, differenced).map(|o| o.profile_loglik())
}

/// Fits ARIMA(p, i, q) by conditional sum of squares followed by exact
/// likelihood refinement with Nelder-Mead.
pub fn fit_arima(series: &[f64], spec: ArimaSpec) -> Result<ArimaFit> {
    let n = series.len();
    if n < spec.min_len() {
        return Err(Error::TooShort {
            needed: spec.min_len(),
            got: n,
        });
    }
    let w = difference(series, spec.i);
    let sd = sample_std(&w);
    let level = mean(&w);
    if !(sd > 1e-12 * level.abs().max(1e-300)) || sd == 0.0 {
        return Err(Error::ZeroVariance(format!(
            "differenced series of ARIMA{spec} is constant"
        )));
    }
    let scaled = Scaled {
        data: w.iter().map(|x| (x - level) / sd).collect(),
        center: level,
        scale: sd,
    };
    let dim = spec.p + spec.q + 1;
    let opts = NelderMeadOptions {
        tolerance: 1e-8,
        max_iter: 500,
        initial_step: 0.2,
    };
    let start = vec![0.0; dim];
    let css = nelder_mead(
        |v| conditional_sum_of_squares(spec, &scaled.data, v),
        &start,
        opts,
    );
    let init = if css.value.is_finite() { css.x } else { start };
    let mut best = nelder_mead(|v| exact_negloglik(spec, &scaled.data, v), &init, opts);
    let mut iterations = best.iterations;
    for _ in 0..3 {
        if best.converged {
            break;
        }
        let next = nelder_mead(|v| exact_negloglik(spec, &scaled.data, v), &best.x, opts);
        iterations += next.iterations;
        let improved = next.value < best.value;
        if improved || next.converged {
            best = next;
        }
    }
    if !best.converged || !best.value.is_finite() {
        return Err(Error::NonConvergence(format!(
            "ARIMA{spec} after {iterations} simplex iterations"
        )));
    }
    let (ar, ma, mu_scaled) = unpack(spec, &best.x);
    if !is_stationary(&ar) {
        return Err(Error::NonConvergence(format!(
            "ARIMA{spec} AR polynomial has a root on or inside the unit circle"
        )));
    }
    let intercept = scaled.center + scaled.scale * mu_scaled;
    let filter = ArmaFilter::new(&ar, &ma)
        .ok_or_else(|| Error::NonConvergence(format!("ARIMA{spec} non-stationary")))?;
    let out: FilterOutput = filter
        .run(intercept, &w)
        .ok_or_else(|| Error::NonConvergence(format!("ARIMA{spec} degenerate filter")))?;
    let loglik = out.profile_loglik();
    let sigma2 = out.sigma2();

    let mut residuals = vec![0.0; n];
    for (t, (v, f)) in out.innovations.iter().zip(&out.scales).enumerate() {
        residuals[t + spec.i] = v / (f * sigma2).sqrt();
    }
    for r in residuals.iter_mut().take(spec.presample_len().min(n)) {
        *r = 0.0;
    }

    let fitted_levels = integrate_predictions(series, &out.predictions, spec.i);
    let r2_arima = r_squared(&series[spec.i..], &fitted_levels).unwrap_or(f64::NEG_INFINITY);

    Ok(ArimaFit {
        spec,
        ar_coeffs: ar,
        ma_coeffs: ma,
        intercept,
        sigma2,
        residuals,
        innovations: out.innovations,
        innovation_scale: out.scales,
        fitted_levels,
        loglik,
        bic: bic_from(spec, loglik, w.len()),
        r2_arima,
        iterations,
    })
}

/// Level predictions `ŷ_t` from predictions of the `d`-th difference,
/// conditioning on observed past levels.
fn integrate_predictions(levels: &[f64], diff_pred: &[f64], d: usize) -> Vec<f64> {
    // y_t = w_t - Σ_{j=1..d} (-1)^j C(d, j) y_{t-j}
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
    };
    diff_pred
        .iter()
        .enumerate()
        .map(|(k, wp)| {
            let t = k + d;
            let mut y = *wp;
            for j in 1..=d {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                y += sign * binom(d, j) * levels[t - j];
            }
            y
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_27_specs() {
        let g = ArimaSpec::grid();
        assert_eq!(g.len(), 27);
        assert_eq!(g[0], ArimaSpec::new(1, 0, 1).unwrap());
        assert!(ArimaSpec::new(0, 0, 1).is_err());
        assert!(ArimaSpec::new(1, 3, 1).is_err());
    }

    #[test]
    fn stationarity_map_round_trips() {
        let raw = [0.3, -1.2, 2.0];
        let phi = constrain_stationary(&raw);
        assert!(is_stationary(&phi));
        let back = unconstrain_stationary(&phi).unwrap();
        for (a, b) in raw.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(!is_stationary(&[1.0]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_stationary(&[0.5, 0.3]));
    }

    #[test]
    fn differencing() {
        let x = [1.0, 4.0, 9.0, 16.0];
        assert_eq!(difference(&x, 1), vec![3.0, 5.0, 7.0]);
        assert_eq!(difference(&x, 2), vec![2.0, 2.0]);
        assert_eq!(integrate_predictions(&x, &[2.0, 2.0], 2), vec![9.0, 16.0]);
        assert_eq!(integrate_predictions(&x, &[3.0, 5.0, 7.0], 1), vec![4.0, 9.0, 16.0]);
    }

    #[test]
    fn bic_arithmetic() {
        let spec = ArimaSpec::new(1, 0, 1).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        assert!((bic_value(4, 0.0, e2) - 8.0).abs() < 1e-12);
        assert_eq!(spec.parameter_count(), 4);
        let big = ArimaSpec::new(3, 0, 3).unwrap();
        assert!(bic_from(spec, -10.0, 50) < bic_from(big, -10.0, 50));
    }

    #[test]
    fn constant_series_is_rejected() {
        let spec = ArimaSpec::new(1, 0, 1).unwrap();
        assert!(matches!(fit_arima(&[2.0; 20], spec), Err(Error::ZeroVariance(_))));
        let ramp: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(fit_arima(&ramp, ArimaSpec::new(1, 1, 1).unwrap()).is_err());
        assert!(matches!(fit_arima(&[1.0, 2.0, 3.0], spec), Err(Error::TooShort { .. })));
    }
}
