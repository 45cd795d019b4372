//! The CIR square-root diffusion `dr = k(θ - r)dt + σ√r dW`: Milstein
//! stepping, shock-driven calibration, closed-form bond analytics and the
//! martingale estimating-function baseline.

mod calibrate;
mod martingale;
mod milstein;
mod pricing;

pub use calibrate::{calibrate_group, dispersion, GroupCalibration, KSearch};
pub use martingale::{conditional_mean, martingale_estimate, MIN_MARTINGALE_WINDOW};
pub use milstein::{milstein_step, simulate_fitted, ShockSeries};
pub use pricing::{
    bond_b, bond_price, classify_yield, yield_asymptote, yield_curve, YieldClassification, YieldShape,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CIR parameters: speed `k` (1/year), long-run mean `theta`, volatility
/// `sigma` and market price of risk `lambda_risk` (pricing only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    pub k: f64,
    pub theta: f64,
    pub sigma: f64,
    #[serde(default)]
    pub lambda_risk: f64,
}

impl CirParams {
    pub fn new(k: f64, theta: f64, sigma: f64) -> Result<Self> {
        Self::with_risk_premium(k, theta, sigma, 0.0)
    }

    pub fn with_risk_premium(k: f64, theta: f64, sigma: f64, lambda_risk: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("mean-reversion speed {k} must be > 0")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidInput(format!("long-run mean {theta} must be > 0")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("volatility {sigma} must be >= 0")));
        }
        if !lambda_risk.is_finite() {
            return Err(Error::InvalidInput("market price of risk must be finite".into()));
        }
        Ok(CirParams {
            k,
            theta,
            sigma,
            lambda_risk,
        })
    }

    /// Risk-neutral speed `k + λ`.
    pub fn kappa(&self) -> f64 {
        self.k + self.lambda_risk
    }

    /// `√((k + λ)² + 2σ²)`.
    pub fn gamma(&self) -> f64 {
        (self.kappa().powi(2) + 2.0 * self.sigma * self.sigma).sqrt()
    }
}

/// `2kθ ≥ σ²`: the origin is unattainable.
pub fn feller_check(params: &CirParams) -> bool {
    2.0 * params.k * params.theta >= params.sigma * params.sigma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feller_examples() {
        assert!(feller_check(&CirParams::new(2.0, 1.5, 0.1).unwrap()));
        let boundary = CirParams { k: 0.5, theta: 4.0, sigma: 2.0, lambda_risk: 0.0 };
        assert_eq!(2.0 * boundary.k * boundary.theta, boundary.sigma * boundary.sigma);
        assert!(feller_check(&boundary));
        assert!(!feller_check(&CirParams::new(0.01, 0.01, 1.0).unwrap()));
    }

    #[test]
    fn invalid_params() {
        assert!(CirParams::new(0.0, 1.0, 0.1).is_err());
        assert!(CirParams::new(1.0, -1.0, 0.1).is_err());
        assert!(CirParams::new(1.0, 1.0, -0.1).is_err());
        assert!(CirParams::new(1.0, 1.0, 0.0).is_ok());
    }
}
