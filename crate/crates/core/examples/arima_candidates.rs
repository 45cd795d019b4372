//! Screens the ARIMA(p, i, q) grid on one group and prints the candidate table.

use cirsharp::arima::{enumerate_candidates, DiagnosticsConfig};
use cirsharp::synthetic::{arma, rng};

fn main() -> cirsharp::Result<()> {
    let x: Vec<f64> = arma(&[0.7], &[0.4], 120, &mut rng(5))
        .iter()
        .map(|v| 3.0 + 0.1 * v)
        .collect();
    let set = enumerate_candidates(&x, 0, &DiagnosticsConfig::default())?;
    println!("{:<8} {:>8} {:>8} {:>6} {:>6} {:>6} {:>6} {:>5}", "spec", "R2", "BIC", "LB", "PAC", "ADF", "JB", "BIC*");
    for e in &set.entries {
        let d = &e.diagnostics;
        let yes = |b: bool| if b { "ok" } else { "-" };
        println!(
            "{:<8} {:>8.4} {:>8.2} {:>6} {:>6} {:>6} {:>6} {:>5}{}",
            e.fit.spec.to_string(),
            e.fit.r2_arima,
            e.fit.bic,
            yes(d.no_autocorrelation),
            yes(d.pac_in_bands),
            yes(d.stationary),
            yes(d.normal),
            yes(e.satisfies_bic),
            if e.sub_optimal { "  <- sub-optimal" } else { "" }
        );
    }
    for (spec, why) in &set.skipped {
        println!("{spec}: skipped ({why})");
    }
    println!("{} sub-optimal candidates", set.sub_optimal().count());
    Ok(())
}
