//! Fixed grouping with ANOVA merging, and variance change-point detection.

use cirsharp::segmentation::{detect_change_points, Segmentation, DEFAULT_MIN_SEGMENT_LEN};
use cirsharp::stats::one_way_anova;
use cirsharp::synthetic::{benchmark_series, rng, standard_normals};

fn main() -> cirsharp::Result<()> {
    let series = benchmark_series()?;
    let values = series.values();

    let fixed = Segmentation::fixed(values.len(), 8)?;
    println!("fixed groups: {:?}", fixed.groups());
    let groups: Vec<&[f64]> = fixed.groups().iter().map(|&(s, e)| &values[s - 1..e]).collect();
    let anova = one_way_anova(&groups)?;
    println!(
        "ANOVA: F = {:.2} on ({}, {}) df, p = {:.3e}",
        anova.f_stat, anova.df_groups, anova.df_error, anova.p_value
    );
    let merged = fixed.auto_merge(values, 0.05)?;
    println!("after merging similar neighbours: {:?}", merged.groups());

    // noise whose standard deviation quadruples halfway through
    let noise = standard_normals(100, &mut rng(1));
    let x: Vec<f64> = noise
        .iter()
        .enumerate()
        .map(|(i, v)| if i < 50 { *v } else { 4.0 * v })
        .collect();
    let cp = detect_change_points(&x, 6, DEFAULT_MIN_SEGMENT_LEN)?;
    println!("variance break detected after index {:?}", cp.points);
    println!("contrast by segment count: {:.1?}", cp.contrasts);
    Ok(())
}
