//! Rolling one-step CIR# forecasts with a trailing window of eight.

use cirsharp::pipeline::{rolling_forecast, ForecastSummary, PipelineConfig};
use cirsharp::synthetic::benchmark_series;

fn main() -> cirsharp::Result<()> {
    let series = benchmark_series()?;
    let results = rolling_forecast(&series, 8, &PipelineConfig::default())?;
    for f in results.iter().rev().take(10).rev() {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "t={:>2} window {:>2}-{:<2} predicted {:>8} realised {:>8}",
            f.horizon_index,
            f.window.0,
            f.window.1,
            show(f.predicted),
            show(f.realized)
        );
    }
    let s = ForecastSummary::from_results(&results)?;
    println!("{} predicted, {} unpredicted, R2 {:.4}, RMSE {:.4}", s.predicted, s.unpredicted, s.r2, s.rmse);
    Ok(())
}
