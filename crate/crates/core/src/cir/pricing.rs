//! Closed-form zero-coupon bond prices and yields.
//!
//! `P(τ, r) = A(τ) exp(-B(τ) r)` with
//! `B(τ) = 2(e^{γτ} - 1) / (2γ + (κ + γ)(e^{γτ} - 1))` and
//! `A(τ) = [2γ e^{(κ+γ)τ/2} / (2γ + (κ + γ)(e^{γτ} - 1))]^{2kθ/σ²}`,
//! where `κ = k + λ`. Both are evaluated in the `e^{-γτ}` form so long
//! maturities do not overflow. Rates and θ must share units.

use serde::{Deserialize, Serialize};

use super::CirParams;

/// Below this `σ²/κ²` the deterministic limit is used for `ln A`.
const SMALL_VOL: f64 = 1e-12;

fn b_and_ln_a(params: &CirParams, tau: f64) -> (f64, f64) {
    let kappa = params.kappa();
    let s2 = params.sigma * params.sigma;
    let g = params.gamma();
    let em = (-g * tau).exp();
    let one_minus = -(-g * tau).exp_m1();
    let denom = 2.0 * g * em + (kappa + g) * one_minus;
    let b = 2.0 * one_minus / denom;
    let ln_a = if s2 <= SMALL_VOL * kappa * kappa {
        // σ → 0: dr = (kθ - κr)dt, so ln A = -kθ(τ - B)/κ
        -params.k * params.theta * (tau - b) / kappa
    } else {
        2.0 * params.k * params.theta / s2 * ((2.0 * g).ln() + 0.5 * (kappa - g) * tau - denom.ln())
    };
    (b, ln_a)
}

/// `B(τ)`, the rate sensitivity of the log price.
pub fn bond_b(params: &CirParams, tau: f64) -> f64 {
    b_and_ln_a(params, tau).0
}

/// Price of a unit-nominal zero-coupon bond with `tau` years to maturity.
pub fn bond_price(params: &CirParams, tau: f64, r: f64) -> f64 {
    if tau == 0.0 {
        return 1.0;
    }
    let (b, ln_a) = b_and_ln_a(params, tau);
    (ln_a - b * r).exp()
}

/// Yield to maturity `[B(τ) r - ln A(τ)] / τ`.
pub fn yield_curve(params: &CirParams, tau: f64, r: f64) -> f64 {
    let (b, ln_a) = b_and_ln_a(params, tau);
    (b * r - ln_a) / tau
}

/// Long-maturity limit `2kθ / (γ + k + λ)`.
pub fn yield_asymptote(params: &CirParams) -> f64 {
    2.0 * params.k * params.theta / (params.gamma() + params.kappa())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YieldShape {
    Normal,
    Humped,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldClassification {
    pub shape: YieldShape,
    /// `kθ / (γ - 2κ)`, absent when `γ ≤ 2κ`.
    pub normal_threshold: Option<f64>,
    /// `kθ / κ`.
    pub inverse_threshold: f64,
}

/// Shape of the yield curve at short rate `r`.
///
/// Inverse when `r ≥ kθ/κ`; otherwise normal when `r ≤ kθ/(γ - 2κ)` (only
/// if `γ > 2κ`); humped in between.
pub fn classify_yield(params: &CirParams, r: f64) -> YieldClassification {
    let kappa = params.kappa();
    let kt = params.k * params.theta;
    let inverse_threshold = kt / kappa;
    let denom = params.gamma() - 2.0 * kappa;
    let normal_threshold = (denom > 0.0).then(|| kt / denom);
    let shape = if r >= inverse_threshold {
        YieldShape::Inverse
    } else if normal_threshold.is_some_and(|t| r <= t) {
        YieldShape::Normal
    } else {
        YieldShape::Humped
    };
    YieldClassification {
        shape,
        normal_threshold,
        inverse_threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_price_at_maturity() {
        let p = CirParams::new(2.0, 1.5, 0.1).unwrap();
        assert_eq!(bond_price(&p, 0.0, 0.7), 1.0);
        assert!(bond_b(&p, 0.0).abs() < 1e-15);
    }

    #[test]
    fn asymptote_hand_value() {
        let p = CirParams::new(2.0, 1.5, 0.1).unwrap();
        let want = 6.0 / ((4.02f64).sqrt() + 2.0);
        assert!((yield_asymptote(&p) - want).abs() < 1e-14);
        assert!((yield_asymptote(&p) - 1.49813).abs() < 1e-5);
    }

    #[test]
    fn price_decreases_in_rate() {
        let p = CirParams::new(0.8, 0.04, 0.1).unwrap();
        let a = bond_price(&p, 5.0, 0.01);
        let b = bond_price(&p, 5.0, 0.02);
        assert!(a > b && b > 0.0 && a <= 1.0);
    }

    #[test]
    fn classification_boundaries() {
        let p = CirParams::new(1.0, 2.0, 3.0).unwrap();
        let c = classify_yield(&p, 0.0);
        let nt = c.normal_threshold.unwrap();
        assert_eq!(c.shape, YieldShape::Normal);
        assert_eq!(classify_yield(&p, nt).shape, YieldShape::Normal);
        assert_eq!(classify_yield(&p, c.inverse_threshold).shape, YieldShape::Inverse);
        assert_eq!(classify_yield(&p, 0.5 * (nt + c.inverse_threshold)).shape, YieldShape::Humped);
    }
}
