//! End-to-end calibration of the bundled benchmark with groups of eight.

use cirsharp::cir::feller_check;
use cirsharp::pipeline::{calibrate_series, PipelineConfig};
use cirsharp::segmentation::Segmentation;
use cirsharp::synthetic::benchmark_series;

fn main() -> cirsharp::Result<()> {
    let series = benchmark_series()?;
    let seg = Segmentation::fixed(series.len(), 8)?;
    let report = calibrate_series(&series, &seg, &PipelineConfig::default())?;
    println!("shift: {:?} {:.4}", report.shift.direction, report.shift.alpha);
    println!("{:<9} {:<8} {:>8} {:>8} {:>8} {:>7} {:>7} {:>4} {:>6}", "group", "spec", "k", "theta", "sigma", "R2", "eps", "ACB", "Feller");
    for g in &report.groups {
        let p = g.calibration.params;
        println!(
            "{:<9} {:<8} {:>8.4} {:>8.4} {:>8.4} {:>7.4} {:>7.4} {:>4} {:>6}",
            format!("{}-{}", g.range.0, g.range.1),
            g.chosen_spec.to_string(),
            p.k,
            p.theta,
            p.sigma,
            g.calibration.r2_cir,
            g.calibration.eps,
            g.in_acb,
            feller_check(&p)
        );
    }
    for u in &report.unfitted {
        println!("{}-{} unfitted: {}", u.range.0, u.range.1, u.reason);
    }
    println!("total R2 {:.4}, total eps {:.4}", report.total_r2, report.total_eps);
    Ok(())
}
