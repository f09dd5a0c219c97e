//! The kick-then-flow map: one orbit, its derivative, the trapping band and
//! the fixed points on the cycle.
//!
//! Run with `cargo run --example exact_map`.

use kickshear::shear::{self, CylinderPoint, ShearParams};

fn main() -> kickshear::Result<()> {
    let params = ShearParams::new(2.0, 0.1, 0.1, 10.0)?;
    println!(
        "sigma={} lambda={} A={} tau={}  shear ratio {:.3}",
        params.sigma(),
        params.lambda(),
        params.amplitude(),
        params.tau(),
        params.shear_ratio()
    );

    let mut p = CylinderPoint::new(0.25, 0.0);
    for n in 1..=5 {
        let j = shear::jacobian(p, &params);
        p = shear::psi(p, &params);
        println!(
            "kick {n}: theta={:.12} y={:+.12}  det DPsi={:.6e}",
            p.theta,
            p.y,
            j.det()
        );
    }
    println!("e^(-lambda tau)           = {:.6e}", params.contraction());

    let h = shear::trapping_bound(&params);
    println!("trapping band |y| <= {h:.6}");

    let weak = ShearParams::new(0.05, 0.1, 0.1, 10.0)?;
    for fp in shear::fixed_points_integer_tau(&weak)? {
        println!(
            "sigma=0.05 fixed point theta={}: {:?}, |eigenvalue| {:.6} (e^(-lambda tau/2) = {:.6})",
            fp.point.theta,
            fp.kind,
            fp.eigenvalues.spectral_radius(),
            (-0.5f64).exp()
        );
    }
    println!(
        "fold threshold sigma* = {:.6}",
        shear::fold_threshold_sigma(0.1, 0.1, 10.0)?
    );
    Ok(())
}
