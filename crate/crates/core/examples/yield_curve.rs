//! Zero-coupon prices, the yield curve and its shape classification.

use cirsharp::cir::{bond_price, classify_yield, yield_asymptote, yield_curve, CirParams};

fn main() -> cirsharp::Result<()> {
    let p = CirParams::new(2.0, 1.5, 0.1)?;
    println!("long-run yield {:.5}", yield_asymptote(&p));
    for &r in &[0.5, 1.5, 2.5] {
        let c = classify_yield(&p, r);
        println!("r = {r}: {:?} (normal up to {:?}, inverse from {:.4})", c.shape, c.normal_threshold, c.inverse_threshold);
        for &tau in &[0.25, 1.0, 5.0, 30.0] {
            println!("  tau {tau:>5}: P = {:.6}, Y = {:.5}", bond_price(&p, tau, r), yield_curve(&p, tau, r));
        }
    }
    let humped = CirParams::new(1.0, 2.0, 3.0)?;
    let c = classify_yield(&humped, 0.0);
    let mid = 0.5 * (c.normal_threshold.unwrap_or(0.0) + c.inverse_threshold);
    println!("k=1 theta=2 sigma=3 at r={mid:.4}: {:?}", classify_yield(&humped, mid).shape);
    Ok(())
}
