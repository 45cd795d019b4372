//! Diagnostics and likelihoods against values computed with statsmodels
//! (`acorr_ljungbox`, `adfuller` with a constant and fixed lag,
//! `jarque_bera`, and a dense-covariance ARMA likelihood).

use cirsharp::arima::profile_loglik;
use cirsharp::stats::{adf_lag_order, ljung_box, normality_test, unit_root_test};

fn times() -> impl Iterator<Item = f64> {
    (0..60).map(f64::from)
}

fn wave() -> Vec<f64> {
    times().map(|t| (1.7 * t + 0.3).sin() + 0.6 * (0.37 * t * t).cos()).collect()
}

fn walk() -> Vec<f64> {
    let mut acc = 0.0;
    wave()
        .iter()
        .zip(times())
        .map(|(w, t)| {
            acc += w;
            acc * 0.1 + 0.02 * t
        })
        .collect()
}

fn mix() -> Vec<f64> {
    times().map(|t| (0.91 * t * t).sin() + 0.5 * (2.3 * t).sin()).collect()
}

struct Reference {
    lb: (f64, f64),
    adf: (f64, f64),
    jb: (f64, f64),
}

fn check(x: &[f64], r: Reference) {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let lb = ljung_box(x, 10, 2, 0.05).unwrap();
    assert!(rel(lb.statistic, r.lb.0) < 1e-9, "LB {} vs {}", lb.statistic, r.lb.0);
    assert!((lb.p_value - r.lb.1).abs() < 1e-6, "LB p {} vs {}", lb.p_value, r.lb.1);
    let adf = unit_root_test(x, 0.05).unwrap();
    assert!(rel(adf.statistic, r.adf.0) < 1e-9, "ADF {} vs {}", adf.statistic, r.adf.0);
    assert!((adf.p_value - r.adf.1).abs() < 1e-6, "ADF p {} vs {}", adf.p_value, r.adf.1);
    let jb = normality_test(x, 0.05).unwrap();
    assert!(rel(jb.statistic, r.jb.0) < 1e-9, "JB {} vs {}", jb.statistic, r.jb.0);
    assert!((jb.p_value - r.jb.1).abs() < 1e-6, "JB p {} vs {}", jb.p_value, r.jb.1);
}

#[test]
fn adf_uses_cube_root_lags() {
    assert_eq!(adf_lag_order(60), 3);
    assert_eq!(adf_lag_order(65), 4);
}

#[test]
fn oscillating_series() {
    check(
        &wave(),
        Reference {
            lb: (133.8405005111598, 4.518936871216874e-25),
            adf: (-3.614791395050058, 0.005484463593261912),
            jb: (1.9110334714086532, 0.3846133497450404),
        },
    );
}

#[test]
fn trending_series() {
    check(
        &walk(),
        Reference {
            lb: (376.47987868378647, 2.0015052251572087e-76),
            adf: (-1.2344910021864284, 0.6585854199818276),
            jb: (4.265312366801975, 0.1185220590511238),
        },
    );
}

#[test]
fn irregular_series() {
    check(
        &mix(),
        Reference {
            lb: (16.194350255682334, 0.03968134717263632),
            adf: (-3.898825052415821, 0.002043511109391119),
            jb: (3.0493617966965347, 0.2176905111848351),
        },
    );
}

#[test]
fn kalman_likelihood_matches_dense_covariance() {
    let y = wave();
    let cases: [(&[f64], &[f64], f64, f64); 4] = [
        (&[0.5], &[0.3], 0.1, -85.10905028519316),
        (&[0.6, -0.2], &[0.4], 0.0, -86.81024007369227),
        (&[0.3, 0.2, -0.1], &[0.5, -0.3, 0.2], -0.2, -81.56044054536808),
        (&[-0.4], &[0.7, 0.1], 0.05, -72.80815171628733),
    ];
    for (ar, ma, mu, want) in cases {
        let got = profile_loglik(ar, ma, mu, &y).unwrap();
        assert!((got - want).abs() < 1e-8, "{ar:?} {ma:?}: {got} vs {want}");
    }
}

#[test]
fn nonstationary_ar_has_no_likelihood() {
    assert!(profile_loglik(&[1.1], &[0.2], 0.0, &wave()).is_none());
}
