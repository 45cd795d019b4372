//! Johnson-system normalising transformations `z = γ + δ f((x - ξ) / λ)`.
//!
//! Families are selected and fitted with the four-quantile ratio method:
//! sample quantiles at the normal scores ±0.5 and ±1.5 determine whether the
//! tails look unbounded (SU), bounded (SB) or sit on the lognormal
//! boundary (SL), and the parameters follow in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::stats::distributions::normal_cdf;
use crate::stats::{mean, percentile_sorted, sample_std};

/// Normal score of the inner anchor quantiles; the outer pair sits at three times this.
const ANCHOR_Z: f64 = 0.5;
/// Width of the band around a quantile ratio of one treated as the boundary case.
const RATIO_TOL: f64 = 1e-3;
/// Relative offset from the support edge used when clamping.
const CLAMP_EPS: f64 = 1e-9;
/// Samples at least this long get a moment refinement of the quantile fit.
pub const REFINE_MIN_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JohnsonFamily {
    SN,
    SL,
    SU,
    SB,
}

impl JohnsonFamily {
    pub fn name(self) -> &'static str {
        match self {
            JohnsonFamily::SN => "SN",
            JohnsonFamily::SL => "SL",
            JohnsonFamily::SU => "SU",
            JohnsonFamily::SB => "SB",
        }
    }
}

impl std::fmt::Display for JohnsonFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JohnsonFit {
    pub family: JohnsonFamily,
    pub gamma: f64,
    pub delta: f64,
    pub xi: f64,
    pub lambda: f64,
    /// Fitted on fewer than 20 observations.
    pub small_sample: bool,
}

impl JohnsonFit {
    pub fn new(family: JohnsonFamily, gamma: f64, delta: f64, xi: f64, lambda: f64) -> Result<Self> {
        if !(delta > 0.0 && lambda > 0.0) || ![gamma, delta, xi, lambda].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Johnson parameters need finite values with δ > 0 and λ > 0 (δ={delta}, λ={lambda})"
            )));
        }
        Ok(JohnsonFit {
            family,
            gamma,
            delta,
            xi,
            lambda,
            small_sample: false,
        })
    }

    /// SN fit that simply standardises by the sample mean and deviation.
    pub fn standardizing(sample: &[f64]) -> Result<Self> {
        let sd = sample_std(sample);
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance("cannot standardise a constant sample".into()));
        }
        JohnsonFit::new(JohnsonFamily::SN, -mean(sample) / sd, 1.0 / sd, 0.0, 1.0)
    }

    /// Open support interval of the transform.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            JohnsonFamily::SN | JohnsonFamily::SU => (f64::NEG_INFINITY, f64::INFINITY),
            JohnsonFamily::SL => (self.xi, f64::INFINITY),
            JohnsonFamily::SB => (self.xi, self.xi + self.lambda),
        }
    }

    pub fn in_support(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x > lo && x < hi
    }

    pub fn transform(&self, x: f64) -> Result<f64> {
        if !self.in_support(x) {
            return Err(Error::OutOfSupport {
                family: self.family.name(),
                value: x,
            });
        }
        let y = (x - self.xi) / self.lambda;
        let f = match self.family {
            JohnsonFamily::SN => y,
            JohnsonFamily::SL => y.ln(),
            JohnsonFamily::SU => y.asinh(),
            JohnsonFamily::SB => (y / (1.0 - y)).ln(),
        };
        Ok(self.gamma + self.delta * f)
    }

    /// Transform after pulling `x` just inside the support; the flag
    /// reports whether clamping happened.
    pub fn transform_clamped(&self, x: f64) -> (f64, bool) {
        let (lo, hi) = self.support();
        let pad = CLAMP_EPS * self.lambda;
        let (x, clamped) = if x <= lo {
            (lo + pad, true)
        } else if x >= hi {
            (hi - pad, true)
        } else {
            (x, false)
        };
        let z = self
            .transform(x)
            .expect("clamped value lies inside the support");
        (z, clamped)
    }

    pub fn inverse_transform(&self, z: f64) -> f64 {
        let u = (z - self.gamma) / self.delta;
        let y = match self.family {
            JohnsonFamily::SN => u,
            JohnsonFamily::SL => u.exp(),
            JohnsonFamily::SU => u.sinh(),
            JohnsonFamily::SB => 1.0 / (1.0 + (-u).exp()),
        };
        self.xi + self.lambda * y
    }
}

/// Quantile-ratio Johnson fit.
///
/// The closed-form fit must cover every sample point; otherwise SL is
/// tried and then an SU fit by moment matching. Samples of at least
/// [`REFINE_MIN_LEN`] points are refined by moment matching within the
/// chosen family (SN excepted).
pub fn fit_johnson(sample: &[f64]) -> Result<JohnsonFit> {
    if sample.len() < 8 {
        return Err(Error::TooShort {
            needed: 8,
            got: sample.len(),
        });
    }
    let sd = sample_std(sample);
    if !(sd > 0.0) || sd <= 1e-14 * mean(sample).abs() {
        return Err(Error::ZeroVariance("Johnson fit of a constant sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |z: f64| percentile_sorted(&sorted, normal_cdf(z));
    let (x_m3, x_m1, x_p1, x_p3) = (q(-3.0 * ANCHOR_Z), q(-ANCHOR_Z), q(ANCHOR_Z), q(3.0 * ANCHOR_Z));
    let m = x_p3 - x_p1;
    let n = x_m1 - x_m3;
    let p = x_p1 - x_m1;
    let scale = sd.max(f64::MIN_POSITIVE);
    if m <= 1e-12 * scale || n <= 1e-12 * scale || p <= 1e-12 * scale {
        return Err(Error::Degenerate(
            "ties at the Johnson anchor quantiles".into(),
        ));
    }
    let mid = 0.5 * (x_p1 + x_m1);
    let z = ANCHOR_Z;
    let ratio = m * n / (p * p);
    let (mp, np) = (m / p, n / p);

    let closed_form = if (ratio - 1.0).abs() < RATIO_TOL {
        if (mp - 1.0).abs() < RATIO_TOL && (np - 1.0).abs() < RATIO_TOL {
            let delta = 2.0 * z / p;
            JohnsonFit::new(JohnsonFamily::SN, -delta * mid, delta, 0.0, 1.0).ok()
        } else if mp > 1.0 {
            let delta = 2.0 * z / mp.ln();
            let gamma = delta * ((mp - 1.0) / (p * mp.sqrt())).ln();
            let xi = mid - 0.5 * p * (mp + 1.0) / (mp - 1.0);
            JohnsonFit::new(JohnsonFamily::SL, gamma, delta, xi, 1.0).ok()
        } else {
            None
        }
    } else if ratio > 1.0 {
        let root = (ratio - 1.0).sqrt();
        let delta = 2.0 * z / (0.5 * (mp + np)).acosh();
        let gamma = delta * ((np - mp) / (2.0 * root)).asinh();
        let lambda = 2.0 * p * root / ((mp + np - 2.0) * (mp + np + 2.0).sqrt());
        let xi = mid + p * (np - mp) / (2.0 * (mp + np - 2.0));
        JohnsonFit::new(JohnsonFamily::SU, gamma, delta, xi, lambda).ok()
    } else {
        let (pm, pn) = (p / m, p / n);
        let prod = (1.0 + pm) * (1.0 + pn);
        let denom = pm * pn - 1.0;
        let delta = z / (0.5 * prod.sqrt()).acosh();
        let gamma = delta * ((pn - pm) * (prod - 4.0).max(0.0).sqrt() / (2.0 * denom)).asinh();
        let lambda = p * ((prod - 2.0).powi(2) - 4.0).max(0.0).sqrt() / denom;
        let xi = mid - 0.5 * lambda + p * (pn - pm) / (2.0 * denom);
        JohnsonFit::new(JohnsonFamily::SB, gamma, delta, xi, lambda).ok()
    };
    // A bounded fit that leaves observations outside its support would
    // send them to the clamp; try the lognormal boundary, then moments.
    let covers = |f: &JohnsonFit| sorted.first().is_some_and(|&lo| f.in_support(lo))
        && sorted.last().is_some_and(|&hi| f.in_support(hi));
    let lognormal = || {
        (mp > 1.0).then(|| {
            let delta = 2.0 * z / mp.ln();
            let gamma = delta * ((mp - 1.0) / (p * mp.sqrt())).ln();
            let xi = mid - 0.5 * p * (mp + 1.0) / (mp - 1.0);
            JohnsonFit::new(JohnsonFamily::SL, gamma, delta, xi, 1.0).ok()
        })?
    };
    let mut fit = match closed_form.filter(|f| covers(f)).or_else(|| lognormal().filter(|f| covers(f))) {
        Some(f) if sample.len() >= REFINE_MIN_LEN => refine(f, sample),
        Some(f) => f,
        None => fit_su_moments(sample)?,
    };
    fit.small_sample = sample.len() < 20;
    Ok(fit)
}

/// SU parameters chosen so the transformed sample has the first four
/// moments of a standard normal.
pub fn fit_su_moments(sample: &[f64]) -> Result<JohnsonFit> {
    let sd = sample_std(sample);
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance("Johnson fit of a constant sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let start = JohnsonFit {
        family: JohnsonFamily::SU,
        gamma: 0.0,
        delta: 1.0,
        xi: percentile_sorted(&sorted, 0.5),
        lambda: sd,
        small_sample: false,
    };
    let (fit, _) = match_moments(start, sample);
    JohnsonFit::new(fit.family, fit.gamma, fit.delta, fit.xi, fit.lambda)
}

/// Squared distance of the transformed sample's first four moments from
/// those of a standard normal; infinite if a point leaves the support.
fn moment_discrepancy(fit: &JohnsonFit, sample: &[f64]) -> f64 {
    let mut z = Vec::with_capacity(sample.len());
    for &x in sample {
        match fit.transform(x) {
            Ok(v) if v.is_finite() => z.push(v),
            _ => return f64::INFINITY,
        }
    }
    let (m1, m2, m3, m4) = moments(&z);
    m1 * m1 + (m2 - 1.0).powi(2) + (m3 / m2.powf(1.5)).powi(2) + (m4 / (m2 * m2) - 3.0).powi(2)
}

/// Nelder-Mead over `(γ, ln δ, ξ, ln λ)` within the family of `start`.
fn match_moments(start: JohnsonFit, sample: &[f64]) -> (JohnsonFit, f64) {
    let scale = sample_std(sample).max(f64::MIN_POSITIVE);
    let build = |v: &[f64]| JohnsonFit {
        gamma: start.gamma + v[0],
        delta: start.delta * v[1].exp(),
        xi: start.xi + scale * v[2],
        lambda: start.lambda * v[3].exp(),
        ..start
    };
    let objective = |v: &[f64]| moment_discrepancy(&build(v), sample);
    let opts = NelderMeadOptions {
        tolerance: 1e-10,
        max_iter: 2000,
        initial_step: 0.1,
    };
    let mut best = nelder_mead(objective, &[0.0; 4], opts);
    for _ in 0..2 {
        let next = nelder_mead(objective, &best.x, opts);
        if next.value >= best.value {
            break;
        }
        best = next;
    }
    (build(&best.x), best.value)
}

/// Moment refinement of a quantile fit, kept only when it improves the
/// match and stays a valid fit.
fn refine(fit: JohnsonFit, sample: &[f64]) -> JohnsonFit {
    if fit.family == JohnsonFamily::SN {
        return fit;
    }
    let before = moment_discrepancy(&fit, sample);
    let (cand, after) = match_moments(fit, sample);
    match JohnsonFit::new(cand.family, cand.gamma, cand.delta, cand.xi, cand.lambda) {
        Ok(c) if after < before => c,
        _ => fit,
    }
}

fn moments(z: &[f64]) -> (f64, f64, f64, f64) {
    let n = z.len() as f64;
    let m = z.iter().sum::<f64>() / n;
    let c = |k: i32| z.iter().map(|v| (v - m).powi(k)).sum::<f64>() / n;
    (m, c(2), c(3), c(4))
}
