//! Classical CIR estimator from explicit martingale estimating functions.
//!
//! With `β = e^{-kΔ}` the conditional mean is `θ + (r - θ)β` and the
//! conditional variance is `σ² ψ(r)` where
//! `ψ(r) = r(β - β²)/k + θ(1 - β)²/(2k)`. Weighting the mean equations by
//! `1/r` (the variance is proportional to the level) gives closed forms
//! for `β` and `θ`; `σ²` then solves the variance equation.

use super::CirParams;
use crate::error::{Error, Result};

/// Shortest window the estimator accepts.
pub const MIN_MARTINGALE_WINDOW: usize = 14;

/// `E[r_{t+Δ} | r_t]`.
pub fn conditional_mean(params: &CirParams, r: f64, delta: f64) -> f64 {
    let beta = (-params.k * delta).exp();
    params.theta + (r - params.theta) * beta
}

pub fn martingale_estimate(window: &[f64], delta: f64) -> Result<CirParams> {
    if window.len() < MIN_MARTINGALE_WINDOW {
        return Err(Error::TooShort {
            needed: MIN_MARTINGALE_WINDOW,
            got: window.len(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("observation step {delta} must be > 0")));
    }
    if let Some(v) = window.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "martingale estimator needs positive rates, found {v}"
        )));
    }
    let n = (window.len() - 1) as f64;
    let prev = &window[..window.len() - 1];
    let next = &window[1..];
    let s_next: f64 = next.iter().sum();
    let s_prev: f64 = prev.iter().sum();
    let s_inv: f64 = prev.iter().map(|x| 1.0 / x).sum();
    let s_ratio: f64 = next.iter().zip(prev).map(|(a, b)| a / b).sum();

    let denom = n * n - s_prev * s_inv;
    // Cauchy-Schwarz: s_prev · s_inv ≥ n², with equality iff constant
    if denom.abs() <= 1e-12 * n * n {
        return Err(Error::Degenerate(
            "constant window: autoregression undetermined".into(),
        ));
    }
    let beta = (n * s_ratio - s_next * s_inv) / denom;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::NoMeanReversion(beta));
    }
    let theta = (s_ratio - n * beta) / ((1.0 - beta) * s_inv);
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Degenerate(format!("long-run mean estimate {theta} not positive")));
    }
    let k = -beta.ln() / delta;
    let psi = |x: f64| x * (beta - beta * beta) / k + theta * (1.0 - beta).powi(2) / (2.0 * k);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x1, &x0) in next.iter().zip(prev) {
        let m = theta + (x0 - theta) * beta;
        num += (x1 - m).powi(2) / x0;
        den += psi(x0) / x0;
    }
    let sigma = (num / den).sqrt();
    CirParams::new(k, theta, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_floor() {
        let w: Vec<f64> = (0..13).map(|i| 1.0 + 0.1 * (i % 3) as f64).collect();
        assert!(matches!(martingale_estimate(&w, 1.0 / 30.0), Err(Error::TooShort { .. })));
    }

    #[test]
    fn constant_window_is_degenerate() {
        assert!(matches!(
            martingale_estimate(&[2.0; 20], 1.0 / 30.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn trending_window_has_no_mean_reversion() {
        let w: Vec<f64> = (0..20).map(|i| 1.0 + 0.1 * i as f64).collect();
        assert!(matches!(martingale_estimate(&w, 1.0 / 30.0), Err(Error::NoMeanReversion(_))));
    }

    #[test]
    fn deterministic_decay_recovers_drift() {
        let p = CirParams::new(1.5, 2.0, 0.0).unwrap();
        let mut w = vec![0.5];
        for _ in 0..30 {
            let last = *w.last().unwrap();
            w.push(conditional_mean(&p, last, 0.1));
        }
        let est = martingale_estimate(&w, 0.1).unwrap();
        assert!((est.k - 1.5).abs() < 1e-8);
        assert!((est.theta - 2.0).abs() < 1e-8);
        assert!(est.sigma < 1e-6);
    }
}
