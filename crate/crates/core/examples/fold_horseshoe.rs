//! Where the image of the cycle starts to fold, and when it wraps the
//! cylinder often enough to suggest a horseshoe.
//!
//! Run with `cargo run --release --example fold_horseshoe`.

use kickshear::geometry::{self, RefineOptions};
use kickshear::shear::{self, ShearParams};

fn main() -> kickshear::Result<()> {
    let (lambda, a) = (0.1, 0.1);
    for tau in [5.0, 10.0, 15.0] {
        let exact = shear::fold_threshold_sigma(lambda, a, tau)?;
        let found = geometry::numerical_fold_threshold(lambda, a, tau, (0.5 * exact, 2.0 * exact), 1e-4, 256)?;
        println!("tau={tau:>4}: analytic sigma* {exact:.5}, bisection {found:.5}");
    }

    let opts = RefineOptions::default();
    for sigma in [0.05, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let params = ShearParams::new(sigma, lambda, a, 10.0)?;
        let curve = geometry::image_of_cycle(&params, 1, 256, &opts)?;
        let folds = geometry::fold_report(&curve);
        let shoe = geometry::horseshoe_crossing_diagnostic(&params, &opts)?;
        println!(
            "sigma={sigma:<4} samples={:<5} turning points={:<3} full crossings={:<3} candidate={}",
            curve.len(),
            folds.turning_points,
            shoe.full_crossings,
            shoe.horseshoe_candidate
        );
    }
    Ok(())
}
