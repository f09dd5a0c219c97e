//! JSON configs, reproducible sweeps, CSV tables and SVG figures.
//!
//! The config schema is documented in `docs/config.md` at the workspace root.

mod config;
mod figure;
mod sweep;

pub use config::*;
pub use figure::*;
pub use sweep::*;

pub use crate::prng::prng_stream;
