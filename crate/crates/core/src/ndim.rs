//! The `n`-dimensional linear shear model
//!
//! ```text
//! θ' = 1 + σ·y,   y' = -Λy + A H(θ) v Σ δ(t - kτ),   θ ∈ S¹, y ∈ R^{n-1}
//! ```
//!
//! with a fixed kick direction `v`. The unforced flow is solved exactly with
//! matrix exponentials. Its strong stable leaves are the hyperplanes
//! orthogonal to `(1, σᵀΛ⁻¹)`, which makes `σᵀΛ⁻¹v` the factor that converts a
//! kick into phase displacement for long kick periods.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{self, EnsembleReport, LyapunovConfig, LyapunovEstimate, TangentDynamics};
use crate::prng;
use crate::shear::{self, wrap_unit, CylinderPoint, ShearParams};

/// Largest matrix handled by [`mat_exp`].
pub const MAX_DIMENSION: usize = 16;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound under which the degree-13 Padé approximant is accurate to unit roundoff.
const THETA13: f64 = 5.371920351148152;

/// `e^{Mt}` by scaling and squaring with the `[13/13]` Padé approximant.
pub fn mat_exp(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidSetup(format!("matrix is {}x{}, not square", n, m.ncols())));
    }
    if n > MAX_DIMENSION {
        return Err(Error::DimensionTooLarge(n));
    }
    if !t.is_finite() || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidSetup("matrix exponential of non-finite input".into()));
    }
    let a = m * t;
    let norm = one_norm(&a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings);

    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or(Error::SingularLambda)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// A kick profile `H(θ) = c + Σ_k a_k cos 2πkθ + b_k sin 2πkθ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickProfile {
    #[serde(default)]
    pub constant: f64,
    /// `cos[k - 1]` multiplies `cos 2πkθ`.
    #[serde(default)]
    pub cos: Vec<f64>,
    /// `sin[k - 1]` multiplies `sin 2πkθ`.
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl Default for KickProfile {
    fn default() -> Self {
        Self::sine()
    }
}

impl KickProfile {
    /// `H(θ) = sin 2πθ`, the planar model's kick.
    pub fn sine() -> Self {
        Self {
            constant: 0.0,
            cos: Vec::new(),
            sin: vec![1.0],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        let mut h = self.constant;
        for (k, c) in self.cos.iter().enumerate() {
            h += c * (TAU * (k + 1) as f64 * theta).cos();
        }
        for (k, s) in self.sin.iter().enumerate() {
            h += s * (TAU * (k + 1) as f64 * theta).sin();
        }
        h
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let mut d = 0.0;
        for (k, c) in self.cos.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            d -= c * w * (w * theta).sin();
        }
        for (k, s) in self.sin.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            d += s * w * (w * theta).cos();
        }
        d
    }

    /// Upper bound on `|H|`.
    pub fn sup_bound(&self) -> f64 {
        self.constant.abs() + self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum::<f64>()
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.cos.iter().chain(&self.sin).all(|c| c.is_finite())
    }
}

/// Validated parameters with the flow data for one kick period precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct NdParams {
    sigma: DVector<f64>,
    lambda: DMatrix<f64>,
    amplitude: f64,
    profile: KickProfile,
    direction: DVector<f64>,
    tau: f64,
    tau_frac: f64,
    decay: DMatrix<f64>,
    lambda_inv: DMatrix<f64>,
    /// `(σᵀΛ⁻¹)ᵀ`.
    shear_covector: DVector<f64>,
    /// `((σᵀΛ⁻¹)(I - e^{-Λτ}))ᵀ`.
    phase_row: DVector<f64>,
    /// Set when the model is the planar one with `v = 1`, `H = sin 2πθ`; maps then run the planar arithmetic.
    planar: Option<ShearParams>,
}

const UNIT_TOL: f64 = 1e-12;

impl NdParams {
    pub fn new(
        sigma: DVector<f64>,
        lambda: DMatrix<f64>,
        amplitude: f64,
        profile: KickProfile,
        direction: DVector<f64>,
        tau: f64,
    ) -> Result<Self> {
        let m = sigma.len();
        if m == 0 {
            return Err(Error::InvalidSetup("phase dimension n must be at least 2".into()));
        }
        if m > MAX_DIMENSION {
            return Err(Error::DimensionTooLarge(m));
        }
        if lambda.shape() != (m, m) || direction.len() != m {
            return Err(Error::InvalidSetup(format!(
                "sigma has length {m} but Lambda is {}x{} and v has length {}",
                lambda.nrows(),
                lambda.ncols(),
                direction.len()
            )));
        }
        if sigma.iter().any(|x| !x.is_finite()) || sigma.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidSetup("sigma must be finite and nonzero".into()));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "A",
                value: amplitude,
                reason: "must be finite and non-negative",
            });
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "must be finite and positive",
            });
        }
        if !profile.is_finite() {
            return Err(Error::InvalidSetup("kick profile coefficients must be finite".into()));
        }
        if ((direction.norm() - 1.0).abs()) > UNIT_TOL {
            return Err(Error::InvalidSetup(format!(
                "kick direction must have unit length, got norm {}",
                direction.norm()
            )));
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularLambda);
        }
        let spectrum = lambda.complex_eigenvalues();
        if let Some(bad) = spectrum.iter().find(|z| z.re <= 0.0) {
            return Err(Error::InvalidSetup(format!(
                "Lambda must have eigenvalues with positive real part, found {bad}"
            )));
        }
        let lambda_inv = lambda.clone().try_inverse().ok_or(Error::SingularLambda)?;
        let decay = mat_exp(&lambda, -tau)?;
        let shear_covector = lambda_inv.transpose() * &sigma;
        let phase_row = (DMatrix::identity(m, m) - &decay).transpose() * &shear_covector;
        let planar = (m == 1 && direction[0] == 1.0 && profile == KickProfile::sine())
            .then(|| ShearParams::new(sigma[0], lambda[(0, 0)], amplitude, tau).ok())
            .flatten();
        let (decay, phase_row) = match &planar {
            Some(q) => (
                DMatrix::from_element(1, 1, q.contraction()),
                DVector::from_element(1, q.phase_gain()),
            ),
            None => (decay, phase_row),
        };
        Ok(Self {
            sigma,
            lambda,
            amplitude,
            profile,
            direction,
            tau,
            tau_frac: tau - tau.floor(),
            decay,
            lambda_inv,
            shear_covector,
            phase_row,
            planar,
        })
    }

    /// Parameters kicking along [`optimal_kick_direction`].
    pub fn with_optimal_direction(
        sigma: DVector<f64>,
        lambda: DMatrix<f64>,
        amplitude: f64,
        profile: KickProfile,
        tau: f64,
    ) -> Result<Self> {
        let v = optimal_kick_direction(&sigma, &lambda)?;
        Self::new(sigma, lambda, amplitude, profile, v, tau)
    }

    /// The planar model as the `n = 2` case.
    pub fn from_shear(params: &ShearParams) -> Result<Self> {
        Self::new(
            DVector::from_element(1, params.sigma()),
            DMatrix::from_element(1, 1, params.lambda()),
            params.amplitude(),
            KickProfile::sine(),
            DVector::from_element(1, 1.0),
            params.tau(),
        )
    }

    /// Phase-space dimension `n`.
    pub fn n(&self) -> usize {
        self.sigma.len() + 1
    }

    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn lambda_inv(&self) -> &DMatrix<f64> {
        &self.lambda_inv
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn profile(&self) -> &KickProfile {
        &self.profile
    }

    pub fn direction(&self) -> &DVector<f64> {
        &self.direction
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `e^{-Λτ}`.
    pub fn decay(&self) -> &DMatrix<f64> {
        &self.decay
    }

    /// `σᵀΛ⁻¹v`, the phase gain per unit kick in the long-period limit.
    pub fn effective_gain(&self) -> f64 {
        self.shear_covector.dot(&self.direction)
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(
            self.sigma.clone(),
            self.lambda.clone(),
            self.amplitude,
            self.profile.clone(),
            self.direction.clone(),
            tau,
        )
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(
            self.sigma.clone(),
            self.lambda.clone(),
            amplitude,
            self.profile.clone(),
            self.direction.clone(),
            self.tau,
        )
    }

    pub fn with_profile(&self, profile: KickProfile) -> Result<Self> {
        Self::new(
            self.sigma.clone(),
            self.lambda.clone(),
            self.amplitude,
            profile,
            self.direction.clone(),
            self.tau,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NdState {
    pub theta: f64,
    pub y: DVector<f64>,
}

impl NdState {
    pub fn new(theta: f64, y: DVector<f64>) -> Self {
        Self {
            theta: wrap_unit(theta),
            y,
        }
    }

    pub fn on_cycle(theta: f64, dim: usize) -> Self {
        Self::new(theta, DVector::zeros(dim))
    }
}

fn check_state(s: &NdState, p: &NdParams) -> Result<()> {
    if s.y.len() != p.sigma.len() {
        return Err(Error::InvalidSetup(format!(
            "state has {} transverse coordinates, model has {}",
            s.y.len(),
            p.sigma.len()
        )));
    }
    Ok(())
}

/// Unforced flow without reducing `θ`.
pub fn flow_nd_lifted(s: &NdState, t: f64, p: &NdParams) -> Result<NdState> {
    check_state(s, p)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidSetup(format!("flow time must be non-negative, got {t}")));
    }
    let decay = mat_exp(&p.lambda, -t)?;
    let y = &decay * &s.y;
    let theta = s.theta + t + p.shear_covector.dot(&(&s.y - &y));
    Ok(NdState { theta, y })
}

/// `y(t) = e^{-Λt}y₀`, `θ(t) = θ₀ + t + σᵀΛ⁻¹(I - e^{-Λt})y₀ (mod 1)`.
pub fn flow_nd(s: &NdState, t: f64, p: &NdParams) -> Result<NdState> {
    let lifted = flow_nd_lifted(s, t, p)?;
    Ok(NdState::new(lifted.theta, lifted.y))
}

pub fn kick_nd(s: &NdState, p: &NdParams) -> NdState {
    NdState {
        theta: s.theta,
        y: &s.y + &p.direction * (p.amplitude * p.profile.value(s.theta)),
    }
}

fn psi_nd_with_shift(s: &NdState, p: &NdParams, shift: f64) -> NdState {
    let kicked = &s.y + &p.direction * (p.amplitude * p.profile.value(s.theta));
    NdState {
        theta: s.theta + shift + p.phase_row.dot(&kicked),
        y: &p.decay * kicked,
    }
}

/// `Ψ_τ = Φ_τ ∘ κ` with `θ` reduced into `[0, 1)`.
pub fn psi_nd(s: &NdState, p: &NdParams) -> NdState {
    if let Some(q) = &p.planar {
        let next = shear::psi(CylinderPoint::new(s.theta, s.y[0]), q);
        return NdState::new(next.theta, DVector::from_element(1, next.y));
    }
    let mut next = psi_nd_with_shift(s, p, p.tau_frac);
    next.theta = wrap_unit(next.theta);
    next
}

pub fn psi_nd_lifted(s: &NdState, p: &NdParams) -> NdState {
    psi_nd_with_shift(s, p, p.tau)
}

/// `DΨ_τ` in the ordering `(θ, y₁, …, y_{n-1})`.
pub fn jacobian_nd(s: &NdState, p: &NdParams) -> DMatrix<f64> {
    let m = p.sigma.len();
    let kick_col = &p.direction * (p.amplitude * p.profile.derivative(s.theta));
    let mut j = DMatrix::zeros(m + 1, m + 1);
    j[(0, 0)] = 1.0 + p.phase_row.dot(&kick_col);
    for c in 0..m {
        j[(0, c + 1)] = p.phase_row[c];
    }
    let decayed = &p.decay * &kick_col;
    for r in 0..m {
        j[(r + 1, 0)] = decayed[r];
        for c in 0..m {
            j[(r + 1, c + 1)] = p.decay[(r, c)];
        }
    }
    j
}

impl TangentDynamics for NdParams {
    type State = NdState;

    fn tangent_dim(&self) -> usize {
        self.sigma.len() + 1
    }

    fn advance(&self, state: &NdState, tangent: &mut [f64]) -> NdState {
        if let Some(q) = &self.planar {
            let x = q.advance(&CylinderPoint::new(state.theta, state.y[0]), tangent);
            return NdState::new(x.theta, DVector::from_element(1, x.y));
        }
        let m = self.sigma.len();
        let slope = self.amplitude * self.profile.derivative(state.theta);
        let d_theta = tangent[0];
        let kicked = DVector::from_iterator(m, (0..m).map(|i| tangent[i + 1] + slope * self.direction[i] * d_theta));
        tangent[0] = d_theta + self.phase_row.dot(&kicked);
        let dy = &self.decay * kicked;
        tangent[1..].copy_from_slice(dy.as_slice());
        psi_nd(state, self)
    }

    fn within_guard(&self, state: &NdState, guard: f64) -> bool {
        state.theta.is_finite() && state.y.iter().all(|x| x.is_finite()) && state.y.amax() <= guard
    }

    fn describe(&self, state: &NdState) -> (f64, f64) {
        (state.theta, state.y.norm())
    }
}

/// Normal covector `(1, σᵀΛ⁻¹)` of the strong stable hyperplanes.
pub fn wss_covector(p: &NdParams) -> DVector<f64> {
    let m = p.sigma.len();
    DVector::from_iterator(m + 1, std::iter::once(1.0).chain(p.shear_covector.iter().copied()))
}

/// Phase where the strong stable leaf through `s` meets the cycle: `θ + σᵀΛ⁻¹y`.
pub fn leaf_phase(s: &NdState, p: &NdParams) -> f64 {
    s.theta + p.shear_covector.dot(&s.y)
}

/// The unit `v` maximizing `σᵀΛ⁻¹v`: `(Λᵀ)⁻¹σ / |(Λᵀ)⁻¹σ|`.
pub fn optimal_kick_direction(sigma: &DVector<f64>, lambda: &DMatrix<f64>) -> Result<DVector<f64>> {
    if lambda.nrows() != sigma.len() || lambda.ncols() != sigma.len() {
        return Err(Error::InvalidSetup("sigma and Lambda dimensions differ".into()));
    }
    if sigma.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidSetup("sigma must be nonzero".into()));
    }
    let w = lambda.transpose().lu().solve(sigma).ok_or(Error::SingularLambda)?;
    let norm = w.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::SingularLambda);
    }
    // w·v = |w| > 0, so this sign already makes σᵀΛ⁻¹v positive.
    Ok(w / norm)
}

/// `A H(θ) σᵀΛ⁻¹v`: phase displacement of a kick at `θ` once it has relaxed.
pub fn magnification_factor(p: &NdParams, theta: f64) -> f64 {
    p.amplitude * p.profile.value(theta) * p.effective_gain()
}

/// `f_a(θ) = θ + a + σᵀΛ⁻¹v A H(θ) (mod 1)`.
pub fn singular_limit_map_nd(theta: f64, a: f64, p: &NdParams) -> f64 {
    wrap_unit(theta + a + magnification_factor(p, theta))
}

pub fn top_lyapunov_nd(
    s0: NdState,
    v0: &[f64],
    n_steps: u64,
    p: &NdParams,
    config: &LyapunovConfig,
) -> Result<LyapunovEstimate<NdState>> {
    check_state(&s0, p)?;
    lyapunov::max_lyapunov(p, s0, v0, n_steps, config)
}

/// Ensemble protocol for the `n`-dimensional model: `θ` uniform, `y` uniform
/// in the box `|y_i| ≤ A·sup|H|`, tangent uniform on the sphere.
pub fn ensemble_nd(
    p: &NdParams,
    n_orbits: usize,
    n_steps: u64,
    seed: u64,
    config: &LyapunovConfig,
) -> Result<EnsembleReport<NdState>> {
    let m = p.sigma.len();
    let r = p.amplitude * p.profile.sup_bound();
    lyapunov::ensemble(p, n_orbits, n_steps, seed, config, |rng| {
        let theta = prng::uniform(rng);
        let y = DVector::from_iterator(m, (0..m).map(|_| prng::uniform_in(rng, -r, r)));
        (NdState::new(theta, y), prng::unit_vector(rng, m + 1))
    })
}

/// Either an explicit unit vector or the optimal direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    Explicit(Vec<f64>),
    Named(NamedDirection),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedDirection {
    Optimal,
}

/// JSON form of [`NdParams`]; `lambda` is a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NdParamsConfig {
    pub sigma: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub tau: f64,
    #[serde(default)]
    pub profile: KickProfile,
    #[serde(default = "default_direction")]
    pub direction: DirectionSpec,
}

fn default_direction() -> DirectionSpec {
    DirectionSpec::Named(NamedDirection::Optimal)
}

impl NdParamsConfig {
    pub fn build(&self) -> Result<NdParams> {
        let m = self.sigma.len();
        if self.lambda.len() != m || self.lambda.iter().any(|row| row.len() != m) {
            return Err(Error::Config(format!("ndim.lambda must be a {m}x{m} list of rows")));
        }
        let sigma = DVector::from_vec(self.sigma.clone());
        let lambda = DMatrix::from_row_iterator(m, m, self.lambda.iter().flatten().copied());
        match &self.direction {
            DirectionSpec::Named(NamedDirection::Optimal) => {
                NdParams::with_optimal_direction(sigma, lambda, self.amplitude, self.profile.clone(), self.tau)
            }
            DirectionSpec::Explicit(v) => NdParams::new(
                sigma,
                lambda,
                self.amplitude,
                self.profile.clone(),
                DVector::from_vec(v.clone()),
                self.tau,
            ),
        }
    }
}
