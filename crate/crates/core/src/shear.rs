//! Exact kick-then-flow dynamics of the planar linear shear oscillator.
//!
//! The unforced system is `θ' = 1 + σy`, `y' = -λy` on the cylinder
//! `S¹ × R`; its limit cycle is `γ = {y = 0}`. Kicks
//! `κ(θ, y) = (θ, y + A sin 2πθ)` are applied every `τ` time units and the
//! return map is `Ψ_τ = Φ_τ ∘ κ`. Everything here uses closed forms.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduces an angle into `[0, 1)`.
///
/// `x - floor(x)` can round up to exactly `1.0` for tiny negative inputs, so
/// that case is folded back to zero.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the unit circle.
#[inline]
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = wrap_unit(x - y);
    d.min(1.0 - d)
}

/// Parameters `(σ, λ, A, τ)` with the contraction factor `e^{-λτ}` cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShearParams {
    sigma: f64,
    lambda: f64,
    amplitude: f64,
    tau: f64,
    contraction: f64,
    phase_gain: f64,
    tau_frac: f64,
}

impl ShearParams {
    pub fn new(sigma: f64, lambda: f64, amplitude: f64, tau: f64) -> Result<Self> {
        let check = |name: &'static str, value: f64, ok: bool| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and positive",
                })
            }
        };
        check("sigma", sigma, sigma > 0.0)?;
        check("lambda", lambda, lambda > 0.0)?;
        check("tau", tau, tau > 0.0)?;
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "A",
                value: amplitude,
                reason: "must be finite and non-negative",
            });
        }
        let contraction = (-lambda * tau).exp();
        if !(contraction > 0.0 && contraction < 1.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "contraction factor exp(-lambda*tau) must lie strictly in (0, 1)",
            });
        }
        Ok(Self {
            sigma,
            lambda,
            amplitude,
            tau,
            contraction,
            phase_gain: sigma / lambda * (-(-lambda * tau).exp_m1()),
            tau_frac: tau - tau.floor(),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `b = e^{-λτ}`.
    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    /// `(σ/λ)(1 - e^{-λτ})`, the factor converting transverse offset into phase.
    pub fn phase_gain(&self) -> f64 {
        self.phase_gain
    }

    /// The shear ratio `(σ/λ)A`.
    pub fn shear_ratio(&self) -> f64 {
        self.sigma / self.lambda * self.amplitude
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.sigma, self.lambda, self.amplitude, tau)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(sigma, self.lambda, self.amplitude, self.tau)
    }
}

/// A state on the cylinder, `θ ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub theta: f64,
    pub y: f64,
}

impl CylinderPoint {
    pub fn new(theta: f64, y: f64) -> Self {
        Self {
            theta: wrap_unit(theta),
            y,
        }
    }

    pub fn lift(self) -> LiftedPoint {
        LiftedPoint {
            theta: self.theta,
            y: self.y,
        }
    }
}

/// A state in the universal cover `R × R`; the angle is never reduced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub theta: f64,
    pub y: f64,
}

impl LiftedPoint {
    pub fn new(theta: f64, y: f64) -> Self {
        Self { theta, y }
    }

    pub fn reduce(self) -> CylinderPoint {
        CylinderPoint::new(self.theta, self.y)
    }
}

/// Real 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

/// Discriminant below which a 2×2 spectrum is treated as complex.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    /// Ordered so that `.0 >= .1`.
    Real(f64, f64),
    /// The pair `re ± i·im`, `im > 0`.
    Complex { re: f64, im: f64 },
}

impl Eigenvalues {
    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        match *self {
            Eigenvalues::Real(a, b) => a.abs().max(b.abs()),
            Eigenvalues::Complex { re, im } => re.hypot(im),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Eigenvalues::Complex { .. })
    }
}

impl Jacobian2 {
    pub fn identity() -> Self {
        Self {
            a11: 1.0,
            a12: 0.0,
            a21: 0.0,
            a22: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &Jacobian2) -> Jacobian2 {
        Jacobian2 {
            a11: self.a11 * rhs.a11 + self.a12 * rhs.a21,
            a12: self.a11 * rhs.a12 + self.a12 * rhs.a22,
            a21: self.a21 * rhs.a11 + self.a22 * rhs.a21,
            a22: self.a21 * rhs.a12 + self.a22 * rhs.a22,
        }
    }

    /// Eigenvalues from trace and determinant.
    pub fn eigenvalues(&self) -> Eigenvalues {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc < -DISCRIMINANT_TOL {
            Eigenvalues::Complex {
                re: 0.5 * tr,
                im: 0.5 * (-disc).sqrt(),
            }
        } else {
            let root = disc.max(0.0).sqrt();
            // Avoid cancellation in the smaller root.
            let big = 0.5 * (tr + tr.signum() * root);
            let small = if big != 0.0 { det / big } else { 0.5 * (tr - root) };
            let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
            Eigenvalues::Real(hi, lo)
        }
    }
}

/// The kick `κ(θ, y) = (θ, y + A sin 2πθ)`.
pub fn kick(p: CylinderPoint, params: &ShearParams) -> CylinderPoint {
    CylinderPoint {
        theta: p.theta,
        y: p.y + params.amplitude * (TAU * p.theta).sin(),
    }
}

/// Unforced flow for time `t ≥ 0`.
pub fn flow(p: CylinderPoint, t: f64, params: &ShearParams) -> CylinderPoint {
    let lifted = flow_lifted(p.lift(), t, params);
    lifted.reduce()
}

pub fn flow_lifted(p: LiftedPoint, t: f64, params: &ShearParams) -> LiftedPoint {
    debug_assert!(t >= 0.0, "flow time must be non-negative");
    let decay = (-params.lambda * t).exp();
    let gain = params.sigma / params.lambda * (-(-params.lambda * t).exp_m1());
    LiftedPoint {
        theta: p.theta + t + gain * p.y,
        y: decay * p.y,
    }
}

/// One period of the forced system, `Ψ_τ = Φ_τ ∘ κ`.
#[inline]
pub fn psi(p: CylinderPoint, params: &ShearParams) -> CylinderPoint {
    let kicked = p.y + params.amplitude * (TAU * p.theta).sin();
    CylinderPoint {
        // Only the fractional part of τ matters modulo 1; dropping the integer
        // part keeps the sum small and the reduction accurate.
        theta: wrap_unit(p.theta + params.tau_frac + params.phase_gain * kicked),
        y: params.contraction * kicked,
    }
}

#[inline]
pub fn psi_lifted(p: LiftedPoint, params: &ShearParams) -> LiftedPoint {
    let kicked = p.y + params.amplitude * (TAU * p.theta).sin();
    LiftedPoint {
        theta: p.theta + params.tau + params.phase_gain * kicked,
        y: params.contraction * kicked,
    }
}

/// `DΨ_τ` at `p`; independent of `y`.
#[inline]
pub fn jacobian(p: CylinderPoint, params: &ShearParams) -> Jacobian2 {
    jacobian_at_theta(p.theta, params)
}

#[inline]
pub fn jacobian_at_theta(theta: f64, params: &ShearParams) -> Jacobian2 {
    let kick_slope = TAU * params.amplitude * (TAU * theta).cos();
    Jacobian2 {
        a11: 1.0 + params.phase_gain * kick_slope,
        a12: params.phase_gain,
        a21: params.contraction * kick_slope,
        a22: params.contraction,
    }
}

/// Half-width `h = A / (e^{λτ} - 1)` of the trapping band `U = {|y| ≤ h}`.
pub fn trapping_bound(params: &ShearParams) -> f64 {
    params.amplitude / (params.lambda * params.tau).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointKind {
    Saddle,
    RealSink,
    SpiralSink,
    /// An eigenvalue of modulus one (only reachable with `A = 0`).
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub point: CylinderPoint,
    pub eigenvalues: Eigenvalues,
    pub kind: FixedPointKind,
}

const NEUTRAL_TOL: f64 = 1e-12;

pub fn classify_fixed_point(eigenvalues: Eigenvalues) -> FixedPointKind {
    let radius = eigenvalues.spectral_radius();
    if (radius - 1.0).abs() <= NEUTRAL_TOL {
        FixedPointKind::Neutral
    } else if eigenvalues.is_complex() {
        FixedPointKind::SpiralSink
    } else if radius > 1.0 {
        FixedPointKind::Saddle
    } else {
        FixedPointKind::RealSink
    }
}

/// The two fixed points `(0, 0)` and `(½, 0)` on the cycle for integer `τ`.
pub fn fixed_points_integer_tau(params: &ShearParams) -> Result<[FixedPoint; 2]> {
    let tau = params.tau;
    if tau.fract() != 0.0 || tau < 1.0 {
        return Err(Error::NonIntegerTau(tau));
    }
    Ok([0.0, 0.5].map(|theta| {
        let point = CylinderPoint { theta, y: 0.0 };
        let eigenvalues = jacobian(point, params).eigenvalues();
        FixedPoint {
            point,
            eigenvalues,
            kind: classify_fixed_point(eigenvalues),
        }
    }))
}

/// Shear `σ*` above which `Ψ_τ(γ)` stops being a graph over `θ`.
///
/// Solves `1 + 2π(σ/λ)A(1 - e^{-λτ}) cos 2πθ = 0` at `θ = ½`.
pub fn fold_threshold_sigma(lambda: f64, amplitude: f64, tau: f64) -> Result<f64> {
    if amplitude == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    Ok(lambda / (TAU * amplitude * (-(-lambda * tau).exp_m1())))
}
