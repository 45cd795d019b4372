//! Kalman filter for a zero-mean ARMA process in companion form, giving the
//! exact one-step innovations and their variances.

use nalgebra::{DMatrix, DVector};

const MAX_DIM: usize = 4;

pub(crate) struct ArmaFilter {
    dim: usize,
    phi: [f64; MAX_DIM],
    r: [f64; MAX_DIM],
    p0: [[f64; MAX_DIM]; MAX_DIM],
}

pub(crate) struct FilterOutput {
    pub innovations: Vec<f64>,
    /// Innovation variances in units of σ².
    pub scales: Vec<f64>,
    pub predictions: Vec<f64>,
}

impl FilterOutput {
    pub fn sigma2(&self) -> f64 {
        self.innovations
            .iter()
            .zip(&self.scales)
            .map(|(v, f)| v * v / f)
            .sum::<f64>()
            / self.innovations.len() as f64
    }

    pub fn profile_loglik(&self) -> f64 {
        let n = self.innovations.len() as f64;
        let s2 = self.sigma2();
        if !(s2 > 0.0) {
            return f64::NEG_INFINITY;
        }
        let log_det: f64 = self.scales.iter().map(|f| f.ln()).sum();
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + s2.ln() + 1.0) - 0.5 * log_det
    }
}

impl ArmaFilter {
    /// `None` when the AR part is not stationary (no stationary initial state).
    pub fn new(ar: &[f64], ma: &[f64]) -> Option<Self> {
        let dim = ar.len().max(ma.len() + 1);
        assert!(dim <= MAX_DIM, "ARMA order too large for the filter");
        let mut phi = [0.0; MAX_DIM];
        phi[..ar.len()].copy_from_slice(ar);
        let mut r = [0.0; MAX_DIM];
        r[0] = 1.0;
        r[1..=ma.len()].copy_from_slice(ma);
        let p0 = stationary_covariance(dim, &phi, &r)?;
        Some(ArmaFilter { dim, phi, r, p0 })
    }

    fn transition(&self, a: &[f64; MAX_DIM]) -> [f64; MAX_DIM] {
        let d = self.dim;
        let mut out = [0.0; MAX_DIM];
        for i in 0..d {
            out[i] = self.phi[i] * a[0] + if i + 1 < d { a[i + 1] } else { 0.0 };
        }
        out
    }

    fn propagate(&self, p: &[[f64; MAX_DIM]; MAX_DIM]) -> [[f64; MAX_DIM]; MAX_DIM] {
        let d = self.dim;
        // T P
        let mut tp = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..d {
            for j in 0..d {
                tp[i][j] = self.phi[i] * p[0][j] + if i + 1 < d { p[i + 1][j] } else { 0.0 };
            }
        }
        // (T P) T' + R R'
        let mut out = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..d {
            for j in 0..d {
                out[i][j] = tp[i][0] * self.phi[j]
                    + if j + 1 < d { tp[i][j + 1] } else { 0.0 }
                    + self.r[i] * self.r[j];
            }
        }
        out
    }

    /// Filters `y - mu`; `None` if an innovation variance collapses.
    pub fn run(&self, mu: f64, y: &[f64]) -> Option<FilterOutput> {
        let d = self.dim;
        let mut a = [0.0; MAX_DIM];
        let mut p = self.p0;
        let mut innovations = Vec::with_capacity(y.len());
        let mut scales = Vec::with_capacity(y.len());
        let mut predictions = Vec::with_capacity(y.len());
        for &obs in y {
            let pred = mu + a[0];
            let v = obs - pred;
            let f = p[0][0];
            if !(f > 1e-12) || !f.is_finite() {
                return None;
            }
            predictions.push(pred);
            innovations.push(v);
            scales.push(f);
            let mut k = [0.0; MAX_DIM];
            for i in 0..d {
                k[i] = p[i][0] / f;
            }
            for i in 0..d {
                a[i] += k[i] * v;
            }
            let row0 = p[0];
            for i in 0..d {
                for j in 0..d {
                    p[i][j] -= k[i] * row0[j];
                }
            }
            a = self.transition(&a);
            p = self.propagate(&p);
        }
        Some(FilterOutput {
            innovations,
            scales,
            predictions,
        })
    }

    /// Inverse of [`run`](Self::run): rebuilds the observations from the
    /// innovations.
    pub fn reconstruct(&self, mu: f64, innovations: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut a = [0.0; MAX_DIM];
        let mut p = self.p0;
        let mut out = Vec::with_capacity(innovations.len());
        for &v in innovations {
            out.push(mu + a[0] + v);
            let f = p[0][0];
            for i in 0..d {
                a[i] += p[i][0] / f * v;
            }
            let row0 = p[0];
            let col0: Vec<f64> = (0..d).map(|i| p[i][0] / f).collect();
            for i in 0..d {
                for j in 0..d {
                    p[i][j] -= col0[i] * row0[j];
                }
            }
            a = self.transition(&a);
            p = self.propagate(&p);
        }
        out
    }
}

/// Solves `P = T P T' + R R'` by vectorisation.
fn stationary_covariance(
    dim: usize,
    phi: &[f64; MAX_DIM],
    r: &[f64; MAX_DIM],
) -> Option<[[f64; MAX_DIM]; MAX_DIM]> {
    let mut t = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        t[(i, 0)] = phi[i];
        if i + 1 < dim {
            t[(i, i + 1)] = 1.0;
        }
    }
    let kron = t.kronecker(&t);
    let lhs = DMatrix::<f64>::identity(dim * dim, dim * dim) - kron;
    let rhs = DVector::<f64>::from_iterator(
        dim * dim,
        (0..dim).flat_map(|j| (0..dim).map(move |i| r[i] * r[j])),
    );
    let sol = lhs.lu().solve(&rhs)?;
    let mut p = [[0.0; MAX_DIM]; MAX_DIM];
    for j in 0..dim {
        for i in 0..dim {
            p[i][j] = sol[j * dim + i];
        }
    }
    if !(p[0][0] > 0.0) || !p[0][0].is_finite() {
        return None;
    }
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_stationary_variance() {
        let f = ArmaFilter::new(&[0.5], &[]).unwrap();
        assert!((f.p0[0][0] - 1.0 / (1.0 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn arma11_variance() {
        // γ0 = (1 + 2φθ + θ²) / (1 - φ²)
        let (phi, th) = (0.6, 0.3);
        let f = ArmaFilter::new(&[phi], &[th]).unwrap();
        let want = (1.0 + 2.0 * phi * th + th * th) / (1.0 - phi * phi);
        assert!((f.p0[0][0] - want).abs() < 1e-12);
    }

    #[test]
    fn run_then_reconstruct() {
        let f = ArmaFilter::new(&[0.4, -0.2], &[0.5, 0.1]).unwrap();
        let y = [1.0, 0.3, -0.5, 2.0, 0.7, 0.1, -1.1, 0.4];
        let out = f.run(0.2, &y).unwrap();
        let back = f.reconstruct(0.2, &out.innovations);
        for (a, b) in y.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn white_noise_has_unit_scales() {
        let f = ArmaFilter::new(&[0.0], &[]).unwrap();
        let out = f.run(0.0, &[1.0, -1.0, 2.0]).unwrap();
        assert!(out.scales.iter().all(|s| (s - 1.0).abs() < 1e-15));
        assert_eq!(out.innovations, vec![1.0, -1.0, 2.0]);
    }
}
