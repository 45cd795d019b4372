//! Translating a series with negative rates before calibration.

use chrono::NaiveDate;
use cirsharp::market_data::{needs_shift, shift_if_needed, unshift, RateSeries, DEFAULT_SHIFT_THRESHOLD};
use cirsharp::segmentation::Segmentation;

fn main() -> cirsharp::Result<()> {
    let rates = vec![
        0.61, 0.55, 0.42, 0.30, 0.18, 0.05, -0.04, -0.11, -0.18, -0.22, -0.25, -0.21,
        -0.16, -0.09, -0.02, 0.03,
    ];
    let start = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
    let series = RateSeries::monthly(rates, start, "1M")?;
    let seg = Segmentation::fixed(series.len(), 8)?;
    println!("needs shift: {}", needs_shift(&series, &seg, DEFAULT_SHIFT_THRESHOLD));

    let (shifted, record) = shift_if_needed(&series, &seg, DEFAULT_SHIFT_THRESHOLD)?;
    println!("shift {:?} by {:.4}", record.direction, record.alpha);
    println!("shifted: {:.3?}", shifted.values());
    let back = unshift(shifted.values(), &record);
    let err = back
        .iter()
        .zip(series.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max round-trip error {err:.1e}");

    // deeply negative rates defeat both percentile rules
    let deep = series.with_values(series.values().iter().map(|v| v - 0.8).collect())?;
    match shift_if_needed(&deep, &seg, DEFAULT_SHIFT_THRESHOLD) {
        Ok((_, r)) => println!("deep series shifted by {:.4}", r.alpha),
        Err(e) => println!("deep series: {e}"),
    }
    Ok(())
}
