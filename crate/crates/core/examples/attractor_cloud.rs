//! Attractor point clouds: a folded strange attractor and a single sink.
//!
//! Run with `cargo run --release --example attractor_cloud -- [out.svg]`.

use kickshear::geometry;
use kickshear::harness::{emit_figure, write_atomic, FigureData, FigureStyle};
use kickshear::shear::{self, ShearParams};

fn main() -> kickshear::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("attractor.svg"), Into::into);

    let chaotic = ShearParams::new(2.0, 0.1, 0.1, 10.0)?;
    let cloud = geometry::attractor_cloud(&chaotic, 1000, 1000, 10, 5)?;
    let h = shear::trapping_bound(&chaotic);
    println!("sigma=2: {} points, max |y| {:.5}, band {:.5}", cloud.points.len(), cloud.y_extent(), h);

    let locked = ShearParams::new(0.5, 0.1, 0.1, 10.0)?;
    let sink = geometry::attractor_cloud(&locked, 100, 10_000, 1, 5)?;
    for c in geometry::cluster_centers(&sink.points, 1e-6) {
        println!("sigma=0.5: orbits collapse to ({:.6}, {:+.2e})", c.theta, c.y);
    }

    let data = FigureData::Attractor {
        points: cloud.points.iter().map(|p| (p.theta, p.y)).collect(),
        band: Some(h),
    };
    let style = FigureStyle {
        title: "σ=2 λ=0.1 A=0.1 τ=10".into(),
        ..FigureStyle::default()
    };
    write_atomic(&out, emit_figure(&data, &style)?.as_bytes())?;
    println!("wrote {}", out.display());
    Ok(())
}
