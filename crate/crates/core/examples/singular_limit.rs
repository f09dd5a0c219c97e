//! The singular-limit circle map: critical orbits, exponents, and how well
//! it predicts the planar map as the kick period grows.
//!
//! Run with `cargo run --release --example singular_limit`.

use kickshear::circle::{self, CircleMapParams, MisiurewiczVerdict};
use kickshear::{LyapunovConfig, ShearParams};

fn main() -> kickshear::Result<()> {
    let cmp = CircleMapParams::new(0.3, 2.0)?;
    let crit = circle::critical_points(&cmp);
    println!("B=2: critical points {:?}", crit.points);
    let l = circle::lyap1d_after(0.123, 1000, 200_000, &cmp)?;
    println!("B=2, a=0.3: exponent {:.4}", l.value);

    // The verdict is a heuristic; candidates are re-checked at twice the length.
    let flagged: Vec<usize> = (0..1024)
        .filter(|&i| {
            let cmp = CircleMapParams::new(i as f64 / 1024.0, 2.0).expect("valid");
            let at = |n| circle::critical_orbit_diagnostic(&cmp, n, 1e-3, 0.5).expect("2πB > 1").verdict;
            at(200) == MisiurewiczVerdict::Candidate && at(400) == MisiurewiczVerdict::Candidate
        })
        .collect();
    println!("{} of 1024 offsets keep both critical orbits 1e-3 away for 400 steps", flagged.len());

    let config = LyapunovConfig::default();
    for k in [30.0, 60.0] {
        for a in [0.1, 0.3, 0.7] {
            let params = ShearParams::new(2.0, 0.1, 0.1, k + a)?;
            let c = circle::compare_to_2d(&params, 50_000, 4, 11, &config)?;
            println!(
                "lambda*k={:<4} a={a}: 1D {:.4}  2D {:.4}  gap {:.4}",
                0.1 * k,
                c.lambda_1d,
                c.lambda_2d,
                c.gap
            );
        }
    }
    Ok(())
}
