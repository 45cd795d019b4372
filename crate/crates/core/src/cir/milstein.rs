use serde::{Deserialize, Serialize};

use super::CirParams;
use crate::error::{Error, Result};

/// Standard-normal-scale shocks, one per observation of a group. The shock
/// at index `h` drives the step into observation `h`; index 0 is unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockSeries(Vec<f64>);

impl ShockSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite shock {v}")));
        }
        Ok(ShockSeries(values))
    }

    pub fn zeros(n: usize) -> Self {
        ShockSeries(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One Milstein step with full truncation at zero.
#[inline]
pub fn milstein_step(r: f64, params: &CirParams, delta: f64, z: f64) -> f64 {
    step(r, params.k, params.theta, params.sigma, delta, z)
}

#[inline]
pub(crate) fn step(r: f64, k: f64, theta: f64, sigma: f64, delta: f64, z: f64) -> f64 {
    let r = r.max(0.0);
    // (ΔW)² − Δ written as Δ(z² − 1) so it vanishes exactly at z = ±1
    let next = r + k * (theta - r) * delta
        + sigma * (r * delta).sqrt() * z
        + 0.25 * sigma * sigma * delta * (z * z - 1.0);
    next.max(0.0)
}

/// Single shock-driven trajectory started at the first observation.
pub fn simulate_fitted(
    group: &[f64],
    params: &CirParams,
    shocks: &ShockSeries,
    delta: f64,
) -> Result<Vec<f64>> {
    if shocks.len() != group.len() {
        return Err(Error::LengthMismatch {
            left: group.len(),
            right: shocks.len(),
        });
    }
    if group.is_empty() {
        return Ok(Vec::new());
    }
    Ok(path(group[0], params.k, params.theta, params.sigma, delta, shocks.values()))
}

pub(crate) fn path(r0: f64, k: f64, theta: f64, sigma: f64, delta: f64, shocks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(shocks.len());
    let mut r = r0;
    out.push(r);
    for &z in shocks.iter().skip(1) {
        r = step(r, k, theta, sigma, delta, z);
        out.push(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_step() {
        let p = CirParams::new(2.0, 1.5, 0.2).unwrap();
        let r = milstein_step(1.0, &p, 1.0 / 30.0, 1.0);
        let want = 1.0 + 1.0 / 30.0 + 0.2 * (1.0f64 / 30.0).sqrt();
        assert!((r - want).abs() < 1e-15);
        assert!((r - 1.069849).abs() < 1e-6);
    }

    #[test]
    fn diffusion_off_is_euler_drift() {
        let p = CirParams::new(3.0, 2.0, 0.0).unwrap();
        let r = milstein_step(0.5, &p, 0.1, 7.3);
        assert_eq!(r, 0.5 + 3.0 * (2.0 - 0.5) * 0.1);
    }

    #[test]
    fn correction_vanishes_for_unit_shocks() {
        for z in [1.0, -1.0] {
            let dw = (0.25f64).sqrt() * z;
            assert_eq!(dw * dw - 0.25, 0.0);
        }
    }

    #[test]
    fn truncation_keeps_path_nonnegative() {
        let p = CirParams::new(0.1, 0.05, 3.0).unwrap();
        let r = milstein_step(0.01, &p, 1.0, -4.0);
        assert!(r >= 0.0);
        assert!(milstein_step(-0.5, &p, 1.0, 0.0) >= 0.0);
    }

    #[test]
    fn simulate_checks_lengths() {
        let p = CirParams::new(1.0, 1.0, 0.1).unwrap();
        assert!(simulate_fitted(&[1.0, 1.0], &p, &ShockSeries::zeros(3), 0.1).is_err());
        let out = simulate_fitted(&[0.5, 9.0, 9.0], &p, &ShockSeries::zeros(3), 0.1).unwrap();
        assert_eq!(out[0], 0.5);
        assert!(out[1] > 0.5 && out[2] > out[1] && out[2] < 1.0);
    }
}
