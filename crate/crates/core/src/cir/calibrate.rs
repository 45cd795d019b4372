//! Per-group calibration: σ and θ from the group moments, `k` by
//! minimising the dispersion of the shock-driven path around the data.

use serde::{Deserialize, Serialize};

use super::milstein::path;
use super::{CirParams, ShockSeries};
use crate::error::{Error, Result};
use crate::optim::golden_section;
use crate::stats::{mean, r_squared, rmse, sample_std};

/// Search settings for the mean-reversion speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSearch {
    pub lower: f64,
    pub upper: f64,
    pub grid_points: usize,
    pub tolerance: f64,
}

impl Default for KSearch {
    fn default() -> Self {
        KSearch {
            lower: 1e-4,
            upper: 50.0,
            grid_points: 200,
            tolerance: 1e-6,
        }
    }
}

impl KSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower > 0.0 && self.upper > self.lower && self.upper.is_finite()) {
            return Err(Error::Config(format!(
                "k search bounds ({}, {}] must satisfy 0 < lower < upper",
                self.lower, self.upper
            )));
        }
        if self.grid_points < 2 || !(self.tolerance > 0.0) {
            return Err(Error::Config("k search needs >= 2 grid points and a positive tolerance".into()));
        }
        Ok(())
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.upper - self.lower) / (self.grid_points - 1) as f64;
        (0..self.grid_points).map(move |i| {
            if i + 1 == self.grid_points {
                self.upper
            } else {
                self.lower + step * i as f64
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCalibration {
    pub params: CirParams,
    /// Fitted path on the shifted scale.
    pub fitted: Vec<f64>,
    /// Zero when the group is constant (R² undefined); see `zero_variance`.
    pub r2_cir: f64,
    pub eps: f64,
    /// Sampled `(k, S(k))` pairs of the dispersion objective.
    pub s_curve: Vec<(f64, f64)>,
    pub zero_variance: bool,
}

/// Sample standard deviation of `path(k) - group`.
pub fn dispersion(group: &[f64], shocks: &[f64], theta: f64, sigma: f64, delta: f64, k: f64) -> f64 {
    let sim = path(group[0], k, theta, sigma, delta, shocks);
    let gaps: Vec<f64> = sim.iter().zip(group).map(|(s, r)| s - r).collect();
    sample_std(&gaps)
}

/// Calibrates `(k, θ, σ)` on one group of (shifted, positive) rates driven
/// by the given shocks.
pub fn calibrate_group(
    group: &[f64],
    shocks: &ShockSeries,
    delta: f64,
    search: &KSearch,
) -> Result<GroupCalibration> {
    search.validate()?;
    if group.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: group.len(),
        });
    }
    if shocks.len() != group.len() {
        return Err(Error::LengthMismatch {
            left: group.len(),
            right: shocks.len(),
        });
    }
    if let Some(v) = group.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "calibration needs positive rates, found {v}"
        )));
    }
    let zero_variance = group.iter().all(|&v| v == group[0]);
    let (theta, sigma) = if zero_variance {
        (group[0], 0.0)
    } else {
        (mean(group), sample_std(group))
    };
    let z = shocks.values();
    let objective = |k: f64| dispersion(group, z, theta, sigma, delta, k);

    let s_curve: Vec<(f64, f64)> = search.grid().map(|k| (k, objective(k))).collect();
    let (best_idx, _) = s_curve
        .iter()
        .enumerate()
        .filter(|(_, (_, s))| s.is_finite())
        .fold((None, f64::INFINITY), |(bi, bv), (i, &(_, s))| {
            if s < bv {
                (Some(i), s)
            } else {
                (bi, bv)
            }
        });
    let best_idx = best_idx.ok_or_else(|| {
        Error::Degenerate("dispersion objective is not finite on the search grid".into())
    })?;
    let lo = s_curve[best_idx.saturating_sub(1)].0;
    let hi = s_curve[(best_idx + 1).min(s_curve.len() - 1)].0;
    let (mut k_hat, mut s_hat) = golden_section(objective, lo, hi, search.tolerance);
    let (k_grid, s_grid) = s_curve[best_idx];
    if s_grid < s_hat || (s_grid == s_hat && k_grid < k_hat) {
        k_hat = k_grid;
        s_hat = s_grid;
    }
    if !s_hat.is_finite() {
        return Err(Error::Degenerate("k search bracket failed".into()));
    }

    let params = CirParams {
        k: k_hat,
        theta,
        sigma,
        lambda_risk: 0.0,
    };
    let fitted = path(group[0], k_hat, theta, sigma, delta, z);
    let r2_cir = if zero_variance {
        0.0
    } else {
        r_squared(group, &fitted)?
    };
    let eps = rmse(group, &fitted)?;
    Ok(GroupCalibration {
        params,
        fitted,
        r2_cir,
        eps,
        s_curve,
        zero_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_group_picks_smallest_k() {
        let g = [1.7; 10];
        let c = calibrate_group(&g, &ShockSeries::zeros(10), 1.0 / 30.0, &KSearch::default()).unwrap();
        assert!(c.zero_variance);
        assert_eq!(c.params.k, KSearch::default().lower);
        assert!(c.s_curve.iter().all(|&(_, s)| s == 0.0));
        assert_eq!(c.eps, 0.0);
    }

    #[test]
    fn rejects_nonpositive_and_mismatched_input() {
        let s = KSearch::default();
        assert!(calibrate_group(&[1.0, -0.1], &ShockSeries::zeros(2), 0.1, &s).is_err());
        assert!(calibrate_group(&[1.0, 1.1], &ShockSeries::zeros(3), 0.1, &s).is_err());
        let bad = KSearch { lower: 0.0, ..s };
        assert!(calibrate_group(&[1.0, 1.1], &ShockSeries::zeros(2), 0.1, &bad).is_err());
    }

    #[test]
    fn fitted_starts_at_first_observation() {
        let g = [2.0, 2.1, 1.9, 2.3, 2.2, 2.0];
        let z = ShockSeries::new(vec![0.0, 0.5, -0.8, 1.2, -0.3, -0.6]).unwrap();
        let c = calibrate_group(&g, &z, 1.0 / 30.0, &KSearch::default()).unwrap();
        assert_eq!(c.fitted[0], 2.0);
        assert_eq!(c.fitted.len(), g.len());
        assert_eq!(c.s_curve.len(), 200);
        let s_at = dispersion(&g, z.values(), c.params.theta, c.params.sigma, 1.0 / 30.0, c.params.k);
        assert!(c.s_curve.iter().all(|&(_, s)| s >= s_at - 1e-12));
    }
}
