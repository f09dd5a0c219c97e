//! Rotation number of the circle map `θ + a + B sin 2πθ` against `a`.
//!
//! Run with `cargo run --release --example devils_staircase`.

use kickshear::circle::{self, CircleMapParams};

fn main() -> kickshear::Result<()> {
    let b = 0.1;
    let grid = circle::uniform_offsets(512);
    let rows = circle::staircase(b, &grid, 10_000, 1e-4)?;
    let monotone = rows.windows(2).all(|w| w[1].translation >= w[0].translation);
    println!("B={b}: {} points, monotone={monotone}", rows.len());
    let (lo, hi) = circle::zero_tongue(b);
    println!("rho=0 tongue is a in [{lo}, {hi}] (mod 1)");
    let mut wide: Vec<_> = circle::plateaus(&rows, 1e-4);
    wide.sort_by(|x, y| y.width().total_cmp(&x.width()));
    for p in wide.iter().take(8) {
        println!("  plateau rho={:.5} width {:.4} on [{:.4}, {:.4}]", p.translation, p.width(), p.a_start, p.a_end);
    }

    // Without forcing the rotation number is the offset itself.
    let r = circle::rotation_number(&CircleMapParams::new(0.3819660112501051, 0.0)?, 10_000, 1e-9)?;
    println!("B=0, a=0.381966...: rho={:.12}", r.rho);
    Ok(())
}
