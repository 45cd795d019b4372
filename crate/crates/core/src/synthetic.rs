//! Seeded synthetic data: exact CIR transitions, shock-driven Milstein
//! paths, ARMA processes and the bundled multi-regime benchmark.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::cir::{CirParams, ShockSeries};
use crate::error::{Error, Result};
use crate::market_data::{RateSeries, MONTHLY_DELTA};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normals<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Draws `r_{t+Δ} | r_t` from the exact transition: a scaled noncentral
/// chi-square, sampled as a Poisson mixture of gammas.
pub fn cir_exact_step<R: Rng>(r: f64, params: &CirParams, delta: f64, rng: &mut R) -> f64 {
    let (k, theta, sigma) = (params.k, params.theta, params.sigma);
    let decay = (-k * delta).exp();
    if sigma == 0.0 {
        return theta + (r - theta) * decay;
    }
    let c = sigma * sigma * (1.0 - decay) / (4.0 * k);
    let dof = 4.0 * k * theta / (sigma * sigma);
    let half_nc = 0.5 * r.max(0.0) * decay / c;
    let n = if half_nc > 0.0 {
        Poisson::new(half_nc).expect("positive mean").sample(rng)
    } else {
        0.0
    };
    let chi2 = Gamma::new(0.5 * dof + n, 2.0).expect("positive shape").sample(rng);
    c * chi2
}

/// `n` observations from the exact CIR transition, starting at `r0`.
pub fn cir_exact_path<R: Rng>(params: &CirParams, r0: f64, delta: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut r = r0;
    for _ in 0..n {
        out.push(r);
        r = cir_exact_step(r, params, delta, rng);
    }
    out
}

/// Milstein path of `n` points from `r0` with the returned standard normal
/// shocks (index 0 unused).
pub fn milstein_path<R: Rng>(
    params: &CirParams,
    r0: f64,
    delta: f64,
    n: usize,
    rng: &mut R,
) -> (Vec<f64>, ShockSeries) {
    let mut z = standard_normals(n, rng);
    if let Some(first) = z.first_mut() {
        *first = 0.0;
    }
    let mut out = Vec::with_capacity(n);
    let mut r = r0;
    out.push(r);
    for &zi in z.iter().skip(1) {
        r = crate::cir::milstein_step(r, params, delta, zi);
        out.push(r);
    }
    (out, ShockSeries::new(z).expect("finite normals"))
}

/// Zero-mean ARMA(p, q) with unit innovations and a burn-in of 200.
pub fn arma<R: Rng>(ar: &[f64], ma: &[f64], n: usize, rng: &mut R) -> Vec<f64> {
    const BURN: usize = 200;
    let total = n + BURN;
    let e = standard_normals(total, rng);
    let mut x = vec![0.0; total];
    for t in 0..total {
        let mut v = e[t];
        for (j, a) in ar.iter().enumerate() {
            if t > j {
                v += a * x[t - j - 1];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if t > j {
                v += b * e[t - j - 1];
            }
        }
        x[t] = v;
    }
    x.split_off(BURN)
}

/// One block of the regime benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub params: CirParams,
    pub len: usize,
}

/// Concatenated exact-transition CIR blocks, each continuing from the last
/// value of the previous one.
pub fn regime_series<R: Rng>(regimes: &[Regime], r0: f64, delta: f64, rng: &mut R) -> Result<Vec<f64>> {
    if regimes.is_empty() {
        return Err(Error::InvalidInput("no regimes".into()));
    }
    let mut out: Vec<f64> = Vec::new();
    let mut r = r0;
    for reg in regimes {
        for _ in 0..reg.len {
            r = cir_exact_step(r, &reg.params, delta, rng);
            out.push(r);
        }
    }
    Ok(out)
}

/// Regimes of the bundled 68-point benchmark.
pub fn benchmark_regimes() -> [Regime; 4] {
    let p = |k, theta, sigma| CirParams::new(k, theta, sigma).expect("valid benchmark params");
    [
        Regime { params: p(4.0, 3.0, 0.1), len: 16 },
        Regime { params: p(4.0, 1.0, 0.1), len: 16 },
        Regime { params: p(4.0, 4.0, 0.1), len: 16 },
        Regime { params: p(4.0, 2.0, 0.1), len: 20 },
    ]
}

pub const BENCHMARK_SEED: u64 = 4;
pub const BENCHMARK_ALT_SEED: u64 = 18;
pub const BENCHMARK_LEN: usize = 68;

fn benchmark_draw(seed: u64, label: &str) -> Result<RateSeries> {
    let values = regime_series(&benchmark_regimes(), 2.0, MONTHLY_DELTA, &mut rng(seed))?;
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
    RateSeries::monthly(values, start, label)
}

/// The 68-point four-regime monthly benchmark (column `synthetic` of the
/// bundled table).
pub fn benchmark_series() -> Result<RateSeries> {
    benchmark_draw(BENCHMARK_SEED, "synthetic")
}

/// Both columns of the bundled table: `synthetic` and `synthetic_alt`,
/// two draws from the same regimes.
pub fn benchmark_table() -> Result<Vec<RateSeries>> {
    Ok(vec![
        benchmark_series()?,
        benchmark_draw(BENCHMARK_ALT_SEED, "synthetic_alt")?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_are_reproducible() {
        let p = CirParams::new(2.0, 0.05, 0.1).unwrap();
        let a = cir_exact_path(&p, 0.04, 0.1, 50, &mut rng(7));
        let b = cir_exact_path(&p, 0.04, 0.1, 50, &mut rng(7));
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn exact_transition_mean() {
        let p = CirParams::new(1.0, 0.05, 0.1).unwrap();
        let mut g = rng(3);
        let draws: Vec<f64> = (0..20_000).map(|_| cir_exact_step(0.02, &p, 0.5, &mut g)).collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let want = 0.05 + (0.02 - 0.05) * (-0.5f64).exp();
        assert!((m - want).abs() < 5e-4, "{m} vs {want}");
    }

    #[test]
    fn benchmark_shape() {
        let s = benchmark_series().unwrap();
        assert_eq!(s.len(), BENCHMARK_LEN);
        assert!(s.values().iter().all(|&v| v > 0.0));
    }
}
