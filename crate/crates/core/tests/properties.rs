use chrono::NaiveDate;
use proptest::prelude::*;

use cirsharp::arima::{enumerate_candidates, DiagnosticsConfig};
use cirsharp::cir::{bond_price, conditional_mean, milstein_step, CirParams};
use cirsharp::johnson::{fit_johnson, JohnsonFamily, JohnsonFit};
use cirsharp::market_data::{apply_shift, unshift, RateSeries};
use cirsharp::segmentation::{detect_change_points, Segmentation};
use cirsharp::stats::weighted_totals;
use cirsharp::synthetic::{arma, rng, standard_normals};

fn series(values: Vec<f64>) -> RateSeries {
    RateSeries::monthly(values, NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(), "p").unwrap()
}

fn family() -> impl Strategy<Value = JohnsonFamily> {
    prop_oneof![
        Just(JohnsonFamily::SN),
        Just(JohnsonFamily::SL),
        Just(JohnsonFamily::SU),
        Just(JohnsonFamily::SB),
    ]
}

proptest! {
    #[test]
    fn shift_round_trips(values in prop::collection::vec(-3.0f64..5.0, 8..60)) {
        let s = series(values.clone());
        if let Ok((shifted, record)) = apply_shift(&s) {
            prop_assert!(shifted.values().iter().all(|&v| v > 0.0));
            let back = unshift(shifted.values(), &record);
            for (a, b) in back.iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + record.alpha.abs() + b.abs()));
            }
            // increments survive the translation
            for (w, v) in shifted.values().windows(2).zip(values.windows(2)) {
                prop_assert!(((w[1] - w[0]) - (v[1] - v[0])).abs() <= 1e-12 * (1.0 + record.alpha.abs()));
            }
        }
    }

    #[test]
    fn weighted_totals_bounds(groups in prop::collection::vec((1usize..40, 0.0f64..1.0, 0.0f64..2.0), 1..12)) {
        let sizes: Vec<usize> = groups.iter().map(|g| g.0).collect();
        let r2: Vec<f64> = groups.iter().map(|g| g.1).collect();
        let eps: Vec<f64> = groups.iter().map(|g| g.2).collect();
        let (tr, te) = weighted_totals(&sizes, &r2, &eps).unwrap();
        let lo = r2.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(tr >= lo - 1e-12 && tr <= hi + 1e-12);
        prop_assert!(te >= 0.0);
        // identical groups collapse to the common scores scaled by size
        let same = weighted_totals(&vec![sizes[0]; sizes.len()], &vec![r2[0]; sizes.len()], &vec![eps[0]; sizes.len()]).unwrap();
        prop_assert!((same.0 - r2[0]).abs() < 1e-12);
    }

    #[test]
    fn johnson_transform_is_monotone(
        fam in family(),
        gamma in -2.0f64..2.0,
        delta in 0.2f64..3.0,
        xi in -5.0f64..5.0,
        lambda in 0.1f64..10.0,
        mut us in prop::collection::vec(0.01f64..0.99, 2..30),
    ) {
        let f = JohnsonFit::new(fam, gamma, delta, xi, lambda).unwrap();
        us.sort_by(f64::total_cmp);
        us.dedup();
        let xs: Vec<f64> = us.iter().map(|u| match fam {
            JohnsonFamily::SB => xi + lambda * u,
            JohnsonFamily::SL => xi + lambda * 20.0 * u,
            _ => xi + lambda * (40.0 * u - 20.0),
        }).collect();
        let zs: Vec<f64> = xs.iter().map(|&x| f.transform(x).unwrap()).collect();
        prop_assert!(zs.windows(2).all(|w| w[1] > w[0]));
        for (&x, &z) in xs.iter().zip(&zs) {
            prop_assert!((f.inverse_transform(z) - x).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn johnson_fit_preserves_ranks_and_ignores_affine_maps(
        seed in 0u64..500,
        scale in 0.01f64..100.0,
        offset in -50.0f64..50.0,
    ) {
        let base: Vec<f64> = standard_normals(60, &mut rng(seed)).iter().map(|z| (0.5 * z).exp()).collect();
        let moved: Vec<f64> = base.iter().map(|x| scale * x + offset).collect();
        let f = fit_johnson(&base).unwrap();
        let g = fit_johnson(&moved).unwrap();
        prop_assert_eq!(f.family, g.family);
        let z: Vec<f64> = moved.iter().map(|&x| g.transform_clamped(x).0).collect();
        for i in 0..moved.len() {
            for j in 0..moved.len() {
                if moved[i] < moved[j] {
                    prop_assert!(z[i] <= z[j]);
                }
            }
        }
    }

    #[test]
    fn milstein_stays_nonnegative(
        r in 0.0f64..5.0,
        k in 0.01f64..30.0,
        theta in 0.01f64..5.0,
        sigma in 0.0f64..4.0,
        z in -6.0f64..6.0,
    ) {
        let p = CirParams::new(k, theta, sigma).unwrap();
        prop_assert!(milstein_step(r, &p, 1.0 / 30.0, z) >= 0.0);
    }

    #[test]
    fn bond_prices_are_discount_factors(
        k in 0.05f64..5.0,
        theta in 0.01f64..3.0,
        sigma in 0.0f64..1.0,
        tau in 0.01f64..30.0,
        r in 0.0f64..3.0,
    ) {
        let p = CirParams::new(k, theta, sigma).unwrap();
        let price = bond_price(&p, tau, r);
        prop_assert!(price > 0.0 && price <= 1.0);
        prop_assert!(bond_price(&p, tau, r + 0.1) <= price);
    }

    #[test]
    fn conditional_mean_lies_between_rate_and_mean(
        k in 0.01f64..20.0,
        theta in 0.01f64..5.0,
        r in 0.0f64..5.0,
        delta in 0.001f64..2.0,
    ) {
        let p = CirParams::new(k, theta, 0.1).unwrap();
        let m = conditional_mean(&p, r, delta);
        prop_assert!(m >= r.min(theta) - 1e-12 && m <= r.max(theta) + 1e-12);
    }

    #[test]
    fn fixed_segmentation_is_contiguous(n in 2usize..300, m in 2usize..40) {
        prop_assume!(m <= n);
        let seg = Segmentation::fixed(n, m).unwrap();
        prop_assert!(seg.covers(n));
        prop_assert_eq!(seg.groups()[0].0, 1);
        prop_assert!(seg.groups().windows(2).all(|w| w[1].0 == w[0].1 + 1));
        prop_assert!(seg.sizes().iter().all(|&s| s >= m && s < 2 * m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn change_point_segments_are_contiguous(seed in 0u64..10_000, n in 30usize..120) {
        let x = standard_normals(n, &mut rng(seed));
        let cp = detect_change_points(&x, 4, 7).unwrap();
        let seg = Segmentation::from_change_points(n, &cp.points).unwrap();
        prop_assert!(seg.covers(n));
        prop_assert!(seg.min_group_len() >= 7);
        prop_assert_eq!(cp.contrasts.len(), 4);
    }

    #[test]
    fn restricted_set_is_inside_sub_optimal_set(seed in 0u64..10_000, phi in -0.8f64..0.8, n in 24usize..80) {
        let x = arma(&[phi], &[0.3], n, &mut rng(seed));
        let set = enumerate_candidates(&x, 0, &DiagnosticsConfig::default()).unwrap();
        let ac: Vec<_> = set.i_ac().iter().map(|e| e.fit.spec).collect();
        prop_assert!(set.i_acb().iter().all(|e| ac.contains(&e.fit.spec)));
        prop_assert!(set.i_ac().iter().all(|e| e.sub_optimal));
    }
}
