//! Regenerates the bundled four-regime benchmark table.
//!
//! ```text
//! cargo run --example generate_benchmark -- crates/core/data/synthetic_68.csv
//! ```

use std::fs::File;

use cirsharp::market_data::write_rate_table;
use cirsharp::synthetic::{benchmark_regimes, benchmark_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = benchmark_table()?;
    for (j, r) in benchmark_regimes().iter().enumerate() {
        println!(
            "regime {}: {} months, k={} theta={} sigma={}",
            j + 1,
            r.len,
            r.params.k,
            r.params.theta,
            r.params.sigma
        );
    }
    match std::env::args().nth(1) {
        Some(path) => {
            write_rate_table(&table, File::create(&path)?)?;
            println!("wrote {path}");
        }
        None => write_rate_table(&table, std::io::stdout())?,
    }
    Ok(())
}
