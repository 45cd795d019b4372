//! Classical CIR estimation by martingale estimating functions.

use cirsharp::cir::{conditional_mean, martingale_estimate, CirParams};
use cirsharp::synthetic::{cir_exact_path, rng};

fn main() -> cirsharp::Result<()> {
    let truth = CirParams::new(1.0, 0.06, 0.05)?;
    let path = cir_exact_path(&truth, 0.06, 1.0, 500, &mut rng(3));
    let est = martingale_estimate(&path, 1.0)?;
    println!("true      k={:.4} theta={:.4} sigma={:.4}", truth.k, truth.theta, truth.sigma);
    println!("estimated k={:.4} theta={:.4} sigma={:.4}", est.k, est.theta, est.sigma);
    let last = path[path.len() - 1];
    println!("next-step conditional mean from {last:.4}: {:.4}", conditional_mean(&est, last, 1.0));
    match martingale_estimate(&path[..13], 1.0) {
        Ok(_) => println!("unexpected: 13-point window accepted"),
        Err(e) => println!("13-point window: {e}"),
    }
    Ok(())
}
