//! Exact iteration and analysis of periodically kicked linear shear oscillators.
//!
//! * [`shear`]: the planar kick-then-flow map, its derivative and closed-form
//!   structure (trapping band, fixed points, fold threshold).
//! * [`lyapunov`]: per-kick maximal Lyapunov exponents and the ten-orbit
//!   ensemble protocol.
//! * [`circle`]: the singular-limit circle maps, rotation numbers, critical
//!   orbits and the comparison with the planar map.
//! * [`geometry`]: images of the limit cycle, folds, horseshoe crossings,
//!   invariant curves and attractor clouds.
//! * [`ndim`]: the `n`-dimensional model with matrix-exponential flows.
//! * [`harness`]: JSON configs, reproducible sweeps, CSV and SVG output.

pub mod circle;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lyapunov;
pub mod ndim;
pub mod prng;
pub mod shear;

pub use error::{Error, Result};
pub use lyapunov::{Classification, EnsembleReport, LyapunovConfig, LyapunovEstimate};
pub use shear::{CylinderPoint, LiftedPoint, ShearParams};
