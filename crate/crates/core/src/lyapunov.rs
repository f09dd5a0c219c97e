//! Maximal Lyapunov exponents per kick.
//!
//! The estimator pushes a tangent vector through the derivative of the return
//! map, renormalizing every step and averaging the log growth factors. The
//! ensemble protocol runs several orbits from random starts in the trapping
//! band, drops one largest and one smallest value and reports the extremes of
//! what is left.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng::{self, StreamRng};
use crate::shear::{self, CylinderPoint, ShearParams};

/// A map together with its derivative, iterated on states of type `State`.
pub trait TangentDynamics: Sync {
    type State: Clone + Send + Sync;

    fn tangent_dim(&self) -> usize;

    /// Replaces `tangent` with its image under the derivative at `state` and
    /// returns the image of `state`.
    fn advance(&self, state: &Self::State, tangent: &mut [f64]) -> Self::State;

    /// `false` once the state is non-finite or its transverse size exceeds `guard`.
    fn within_guard(&self, state: &Self::State, guard: f64) -> bool;

    /// Angle and transverse norm, for error reports.
    fn describe(&self, state: &Self::State) -> (f64, f64);
}

impl TangentDynamics for ShearParams {
    type State = CylinderPoint;

    fn tangent_dim(&self) -> usize {
        2
    }

    #[inline]
    fn advance(&self, state: &CylinderPoint, tangent: &mut [f64]) -> CylinderPoint {
        let j = shear::jacobian(*state, self);
        let [u, v] = j.apply([tangent[0], tangent[1]]);
        tangent[0] = u;
        tangent[1] = v;
        shear::psi(*state, self)
    }

    #[inline]
    fn within_guard(&self, state: &CylinderPoint, guard: f64) -> bool {
        state.theta.is_finite() && state.y.abs() <= guard
    }

    fn describe(&self, state: &CylinderPoint) -> (f64, f64) {
        (state.theta, state.y.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Negative,
    NearZero,
    Positive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Negative => "negative",
            Classification::NearZero => "near-zero",
            Classification::Positive => "positive",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negative" => Ok(Classification::Negative),
            "near-zero" => Ok(Classification::NearZero),
            "positive" => Ok(Classification::Positive),
            other => Err(Error::Config(format!("unknown classification `{other}`"))),
        }
    }
}

/// Sign of an exponent relative to a symmetric noise band around zero.
pub fn classify(value: f64, zero_band: f64) -> Classification {
    debug_assert!(zero_band > 0.0);
    if value < -zero_band {
        Classification::Negative
    } else if value > zero_band {
        Classification::Positive
    } else {
        Classification::NearZero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovConfig {
    /// Steps iterated before logs are accumulated.
    pub burn_in: u64,
    /// Half-width of the band classified as near-zero (nats per kick).
    pub zero_band: f64,
    /// Retained spread above which an ensemble is flagged as multi-behavior.
    pub multi_gap: f64,
    /// Largest transverse size an orbit may reach before it is rejected.
    pub guard: f64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            burn_in: 1_000,
            zero_band: 0.005,
            multi_gap: 0.01,
            guard: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate<S> {
    /// Nats per kick.
    pub value: f64,
    pub n_steps: u64,
    pub burn_in: u64,
    pub initial_state: S,
    pub tangent_seed: Vec<f64>,
    pub classification: Classification,
}

impl LyapunovEstimate<CylinderPoint> {
    /// The second exponent of the planar map, fixed by `det DΨ_τ = e^{-λτ}`.
    pub fn complementary_exponent(&self, params: &ShearParams) -> f64 {
        -params.lambda() * params.tau() - self.value
    }
}

/// Renormalized tangent iteration from `initial` along `tangent_seed`.
pub fn max_lyapunov<D: TangentDynamics>(
    system: &D,
    initial: D::State,
    tangent_seed: &[f64],
    n_steps: u64,
    config: &LyapunovConfig,
) -> Result<LyapunovEstimate<D::State>> {
    if n_steps == 0 {
        return Err(Error::InvalidSetup("n_steps must be at least 1".into()));
    }
    if tangent_seed.len() != system.tangent_dim() {
        return Err(Error::InvalidSetup(format!(
            "tangent seed has dimension {}, expected {}",
            tangent_seed.len(),
            system.tangent_dim()
        )));
    }
    let mut tangent = tangent_seed.to_vec();
    let seed_norm = norm(&tangent);
    if !(seed_norm.is_finite() && seed_norm > 0.0) {
        return Err(Error::InvalidSetup("tangent seed must be a non-zero finite vector".into()));
    }
    tangent.iter_mut().for_each(|x| *x /= seed_norm);

    let mut state = initial.clone();
    let mut log_sum = 0.0;
    for step in 0..config.burn_in + n_steps {
        state = system.advance(&state, &mut tangent);
        if !system.within_guard(&state, config.guard) {
            let (theta, y_norm) = system.describe(&state);
            return Err(Error::NonFiniteState {
                step: step + 1,
                theta,
                y_norm,
            });
        }
        let growth = norm(&tangent);
        tangent.iter_mut().for_each(|x| *x /= growth);
        if step >= config.burn_in {
            log_sum += growth.ln();
        }
    }
    let value = log_sum / n_steps as f64;
    Ok(LyapunovEstimate {
        value,
        n_steps,
        burn_in: config.burn_in,
        initial_state: initial,
        tangent_seed: tangent_seed.to_vec(),
        classification: classify(value, config.zero_band),
    })
}

#[inline]
fn norm(v: &[f64]) -> f64 {
    match v {
        [a, b] => a.hypot(*b),
        _ => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Outcome of the multi-orbit protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport<S> {
    pub all_estimates: Vec<LyapunovEstimate<S>>,
    /// Indices of the two discarded estimates (smallest, largest).
    pub dropped: (usize, usize),
    pub min_retained: f64,
    pub max_retained: f64,
    /// Mean of the retained estimates.
    pub trimmed_mean: f64,
    pub multi_behavior: bool,
    /// Classification of `trimmed_mean`.
    pub classification: Classification,
}

impl<S> EnsembleReport<S> {
    pub fn values(&self) -> Vec<f64> {
        self.all_estimates.iter().map(|e| e.value).collect()
    }
}

/// Index of the first smallest and the first largest value, never the same index.
pub fn outlier_indices(values: &[f64]) -> (usize, usize) {
    assert!(values.len() >= 2);
    let mut lo = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = i;
        }
    }
    let mut hi = if lo == 0 { 1 } else { 0 };
    for (i, &v) in values.iter().enumerate() {
        if i != lo && v > values[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

/// Runs `n_orbits` estimates in parallel; orbit `i` draws its start from
/// stream `(seed, i)` through `sample`.
pub fn ensemble<D, F>(
    system: &D,
    n_orbits: usize,
    n_steps: u64,
    seed: u64,
    config: &LyapunovConfig,
    sample: F,
) -> Result<EnsembleReport<D::State>>
where
    D: TangentDynamics,
    F: Fn(&mut StreamRng) -> (D::State, Vec<f64>) + Sync,
{
    if n_orbits < 3 {
        return Err(Error::InvalidSetup(format!(
            "ensemble needs at least 3 orbits, got {n_orbits}"
        )));
    }
    let all_estimates = (0..n_orbits)
        .into_par_iter()
        .map(|orbit| {
            let mut rng = prng::prng_stream(seed, orbit as u64);
            let (state, tangent) = sample(&mut rng);
            max_lyapunov(system, state, &tangent, n_steps, config)
        })
        .collect::<Result<Vec<_>>>()?;

    let values: Vec<f64> = all_estimates.iter().map(|e| e.value).collect();
    let dropped = outlier_indices(&values);
    let retained: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != dropped.0 && *i != dropped.1)
        .map(|(_, &v)| v)
        .collect();
    let min_retained = retained.iter().copied().fold(f64::INFINITY, f64::min);
    let max_retained = retained.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trimmed_mean = retained.iter().sum::<f64>() / retained.len() as f64;
    Ok(EnsembleReport {
        all_estimates,
        dropped,
        min_retained,
        max_retained,
        trimmed_mean,
        multi_behavior: max_retained - min_retained > config.multi_gap,
        classification: classify(trimmed_mean, config.zero_band),
    })
}

/// Uniform start in the trapping band with a uniformly random tangent direction.
pub fn sample_trapping_band(params: &ShearParams, rng: &mut StreamRng) -> (CylinderPoint, Vec<f64>) {
    let h = shear::trapping_bound(params);
    let theta = prng::uniform(rng);
    let y = prng::uniform_in(rng, -h, h);
    (CylinderPoint::new(theta, y), prng::unit_vector(rng, 2))
}

/// The multi-orbit protocol for the planar map, starts drawn from the trapping band.
pub fn ensemble_protocol(
    params: &ShearParams,
    n_orbits: usize,
    n_steps: u64,
    seed: u64,
    config: &LyapunovConfig,
) -> Result<EnsembleReport<CylinderPoint>> {
    ensemble(params, n_orbits, n_steps, seed, config, |rng| {
        sample_trapping_band(params, rng)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(sigma: f64, tau: f64) -> ShearParams {
        ShearParams::new(sigma, 0.1, 0.1, tau).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(-0.5, 0.01), Classification::Negative);
        assert_eq!(classify(0.0004, 0.01), Classification::NearZero);
        assert_eq!(classify(0.08, 0.01), Classification::Positive);
    }

    #[test]
    fn unforced_exponent_vanishes() {
        let p = ShearParams::new(1.3, 0.1, 0.0, 10.5).unwrap();
        let est = max_lyapunov(&p, CylinderPoint::new(0.3, 0.0), &[0.6, 0.8], 100_000, &LyapunovConfig::default())
            .unwrap();
        assert!(est.value.abs() <= 1e-3, "value = {}", est.value);
        assert_eq!(est.classification, Classification::NearZero);
    }

    #[test]
    fn spiral_sink_rate() {
        let p = params(0.05, 10.0);
        let est = max_lyapunov(&p, CylinderPoint::new(0.45, 0.01), &[1.0, 0.0], 100_000, &LyapunovConfig::default())
            .unwrap();
        assert!((est.value + 0.5).abs() <= 0.01, "value = {}", est.value);
        let second = est.complementary_exponent(&p);
        assert!((second + 0.5).abs() <= 0.01);
    }

    #[test]
    fn strong_shear_is_mostly_positive() {
        let p = params(4.0, 10.0);
        let report = ensemble_protocol(&p, 10, 20_000, 11, &LyapunovConfig::default()).unwrap();
        let positive = report.values().iter().filter(|v| **v > 0.0).count();
        assert!(positive > 5, "values = {:?}", report.values());
    }

    #[test]
    fn unforced_ensemble() {
        let p = ShearParams::new(0.5, 0.1, 0.0, 10.5).unwrap();
        let report = ensemble_protocol(&p, 10, 100_000, 3, &LyapunovConfig::default()).unwrap();
        for v in report.values() {
            assert!(v.abs() <= 1e-3);
        }
        assert!(report.min_retained.abs() <= 1e-3 && report.max_retained.abs() <= 1e-3);
    }

    #[test]
    fn outlier_drop_is_deterministic() {
        assert_eq!(outlier_indices(&[1.0, 1.0, 1.0]), (0, 1));
        assert_eq!(outlier_indices(&[3.0, 1.0, 3.0, 1.0, 2.0]), (1, 0));
        assert_eq!(outlier_indices(&[2.0, 5.0, 0.0]), (2, 1));
    }

    #[test]
    fn too_few_orbits() {
        let p = params(1.0, 10.0);
        assert!(ensemble_protocol(&p, 2, 10, 0, &LyapunovConfig::default()).is_err());
    }

    #[test]
    fn guard_trips_on_escape() {
        let p = params(1.0, 10.0);
        let config = LyapunovConfig { guard: 1e-9, ..Default::default() };
        let err = max_lyapunov(&p, CylinderPoint::new(0.25, 0.0), &[1.0, 0.0], 10, &config).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { step: 1, .. }));
    }

    #[test]
    fn power_of_two_scaling_is_exact() {
        let p = params(2.0, 10.3);
        let cfg = LyapunovConfig { burn_in: 10, ..Default::default() };
        let a = max_lyapunov(&p, CylinderPoint::new(0.1, 0.01), &[0.6, 0.8], 5_000, &cfg).unwrap();
        let b = max_lyapunov(&p, CylinderPoint::new(0.1, 0.01), &[4.8, 6.4], 5_000, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn scaling_the_seed_is_neutral(scale in 1e-3f64..1e3, angle in 0.0f64..6.28) {
            let p = params(2.0, 10.3);
            let cfg = LyapunovConfig { burn_in: 10, ..Default::default() };
            let seed = [angle.cos(), angle.sin()];
            let a = max_lyapunov(&p, CylinderPoint::new(0.1, 0.01), &seed, 2_000, &cfg).unwrap();
            let b = max_lyapunov(&p, CylinderPoint::new(0.1, 0.01), &[seed[0] * scale, seed[1] * scale], 2_000, &cfg).unwrap();
            prop_assert!((a.value - b.value).abs() <= 1e-12);
        }

        #[test]
        fn retained_extremes_within_range(seed in 0u64..1000, sigma in 0.05f64..4.0, tau in 5.0f64..15.0) {
            let p = params(sigma, tau);
            let report = ensemble_protocol(&p, 10, 200, seed, &LyapunovConfig { burn_in: 10, ..Default::default() }).unwrap();
            let values = report.values();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(report.min_retained <= report.max_retained);
            prop_assert!(lo <= report.min_retained && report.max_retained <= hi);
        }
    }
}
