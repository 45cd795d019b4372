//! CIR# against the classical CIR baseline on both benchmark columns.

use cirsharp::pipeline::{compare_with_cir, PipelineConfig};
use cirsharp::synthetic::benchmark_table;

fn main() -> cirsharp::Result<()> {
    let cfg = PipelineConfig::default();
    println!("{:<14} {:>7} | {:>8} {:>8} {:>8} {:>8}", "maturity", "targets", "A", "B", "C", "D");
    for series in benchmark_table()? {
        let t = compare_with_cir(&series, 8, 14, &cfg)?;
        for row in [&t.r2, &t.rmse] {
            println!(
                "{:<14} {:>7} | {:>8.4} {:>8.4} {:>8.4} {:>8.4}  {}",
                t.maturity, t.common_targets, row.a, row.b, row.c, row.d, row.metric
            );
        }
    }
    Ok(())
}
