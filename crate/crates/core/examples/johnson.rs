//! Johnson-system normalisation of a skewed sample.

use cirsharp::johnson::fit_johnson;
use cirsharp::stats::normality_test;
use cirsharp::synthetic::{rng, standard_normals};

fn main() -> cirsharp::Result<()> {
    let skewed: Vec<f64> = standard_normals(500, &mut rng(2)).iter().map(|z| (0.6 * z).exp()).collect();
    let before = normality_test(&skewed, 0.05)?;
    let fit = fit_johnson(&skewed)?;
    println!(
        "{} fit: gamma={:.4} delta={:.4} xi={:.4} lambda={:.4}",
        fit.family, fit.gamma, fit.delta, fit.xi, fit.lambda
    );
    let z: Vec<f64> = skewed.iter().map(|&x| fit.transform_clamped(x).0).collect();
    let after = normality_test(&z, 0.05)?;
    println!("Jarque-Bera before: {:.2} (p={:.2e})", before.statistic, before.p_value);
    println!("Jarque-Bera after:  {:.2} (p={:.3})", after.statistic, after.p_value);
    let x = skewed[0];
    println!("round trip {x} -> {}", fit.inverse_transform(fit.transform(x)?));
    Ok(())
}
