//! Graph transform: a smooth attracting curve at weak shear, breakdown at strong shear.
//!
//! Run with `cargo run --release --example invariant_curve`.

use kickshear::geometry::{self, InvariantCurveOutcome};
use kickshear::ShearParams;

fn main() -> kickshear::Result<()> {
    for (sigma, tau) in [(0.05, 10.5), (0.15, 10.5), (0.19, 10.5), (2.0, 10.0)] {
        let params = ShearParams::new(sigma, 0.1, 0.1, tau)?;
        match geometry::invariant_curve(&params, 1e-8, 1000, 1024)? {
            InvariantCurveOutcome::Converged(curve) => {
                let amp = curve.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let cloud = geometry::attractor_cloud(&params, 200, 1000, 1, 1)?;
                let worst = cloud.points.iter().map(|&p| curve.distance(p)).fold(0.0, f64::max);
                println!(
                    "sigma={sigma} tau={tau}: converged in {} iterations, max |g| {amp:.5}, orbits within {worst:.1e}",
                    curve.iterations
                );
            }
            InvariantCurveOutcome::Breakdown { iteration, image } => {
                println!(
                    "sigma={sigma} tau={tau}: breakdown at iteration {iteration} ({} turning points)",
                    geometry::fold_report(&image).turning_points
                );
            }
        }
    }
    Ok(())
}
