//! The singular-limit circle maps `f_a(θ) = θ + a + B sin 2πθ`, `B = (σ/λ)A`.
//!
//! These are the limits of the planar return map as the contraction between
//! kicks becomes total (`τ = k + a`, `k → ∞`). For `2πB < 1` they are circle
//! diffeomorphisms with a rotation number; for `2πB > 1` they have two
//! critical points and can be chaotic.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lyapunov::{self, LyapunovConfig};
use crate::prng;
use crate::shear::{circle_distance, wrap_unit, CylinderPoint, ShearParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleMapParams {
    /// Phase offset in `[0, 1)`.
    pub a: f64,
    /// Effective kick strength `(σ/λ)A`.
    pub b: f64,
}

impl CircleMapParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && (0.0..1.0).contains(&a)) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "must lie in [0, 1)",
            });
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "B",
                value: b,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { a, b })
    }

    /// The singular limit of a planar system, `τ = k + a`.
    pub fn from_shear(params: &ShearParams) -> Self {
        let tau = params.tau();
        Self {
            a: tau - tau.floor(),
            b: params.shear_ratio(),
        }
    }

    /// `2πB`; the map is invertible iff this is below one.
    pub fn slope_amplitude(&self) -> f64 {
        TAU * self.b
    }

    pub fn is_diffeomorphism(&self) -> bool {
        self.slope_amplitude() < 1.0
    }
}

#[inline]
pub fn f_lift(theta: f64, cmp: &CircleMapParams) -> f64 {
    theta + cmp.a + cmp.b * (TAU * theta).sin()
}

#[inline]
pub fn f(theta: f64, cmp: &CircleMapParams) -> f64 {
    wrap_unit(f_lift(theta, cmp))
}

#[inline]
pub fn derivative(theta: f64, cmp: &CircleMapParams) -> f64 {
    1.0 + TAU * cmp.b * (TAU * theta).cos()
}

/// Points where `f′` vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet {
    /// Empty, or the pair `θ_c ≤ 1 - θ_c`.
    pub points: Vec<f64>,
    /// Set when `2πB = 1` and the pair collapses onto `θ = ½`.
    pub degenerate: bool,
}

impl CriticalSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Circle distance from `theta` to the nearest critical point.
    pub fn distance(&self, theta: f64) -> f64 {
        self.points
            .iter()
            .map(|&c| circle_distance(theta, c))
            .fold(f64::INFINITY, f64::min)
    }
}

const DEGENERACY_TOL: f64 = 1e-12;

/// Closed-form solutions of `cos 2πθ = -1/(2πB)`.
pub fn critical_points(cmp: &CircleMapParams) -> CriticalSet {
    let s = cmp.slope_amplitude();
    if (s - 1.0).abs() <= DEGENERACY_TOL {
        return CriticalSet {
            points: vec![0.5, 0.5],
            degenerate: true,
        };
    }
    if s < 1.0 {
        return CriticalSet {
            points: Vec::new(),
            degenerate: false,
        };
    }
    let c = (-1.0 / s).acos() / TAU;
    CriticalSet {
        points: vec![c, 1.0 - c],
        degenerate: false,
    }
}

/// Within this circle distance of a critical point, `log|f′|` is treated as `-∞`.
pub const CRITICAL_HIT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lyapunov1d {
    /// Nats per iterate; `-∞` when `critical_hit` is set.
    pub value: f64,
    pub critical_hit: bool,
}

/// `(1/n) Σ log|f′(θ_i)|` over `n` iterates from `theta0`.
pub fn lyap1d(theta0: f64, n: u64, cmp: &CircleMapParams) -> Result<Lyapunov1d> {
    lyap1d_after(theta0, 0, n, cmp)
}

/// As [`lyap1d`], after discarding `burn_in` iterates.
pub fn lyap1d_after(theta0: f64, burn_in: u64, n: u64, cmp: &CircleMapParams) -> Result<Lyapunov1d> {
    if n == 0 {
        return Err(Error::InvalidSetup("n must be at least 1".into()));
    }
    let crit = critical_points(cmp);
    let mut theta = wrap_unit(theta0);
    for _ in 0..burn_in {
        theta = f(theta, cmp);
    }
    let mut sum = 0.0;
    for _ in 0..n {
        if !crit.is_empty() && crit.distance(theta) < CRITICAL_HIT_TOL {
            return Ok(Lyapunov1d {
                value: f64::NEG_INFINITY,
                critical_hit: true,
            });
        }
        sum += derivative(theta, cmp).abs().ln();
        theta = f(theta, cmp);
    }
    Ok(Lyapunov1d {
        value: sum / n as f64,
        critical_hit: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationNumber {
    /// Rotation number reduced into `[0, 1)`.
    pub rho: f64,
    /// Unreduced translation number of the lift `θ ↦ θ + a + B sin 2πθ`.
    pub translation: f64,
    pub error_bound: f64,
}

/// Number of initial points averaged by [`rotation_number`].
pub const ROTATION_STARTS: usize = 32;

fn translation_from(theta0: f64, n: u64, cmp: &CircleMapParams) -> f64 {
    // Measured over all 2n iterates from the fixed start: the lift is then
    // monotone in `a`, and |F^N(θ) - θ - Nρ| < 1.
    let steps = 2 * n;
    let mut x = theta0;
    for _ in 0..steps {
        x = f_lift(x, cmp);
    }
    (x - theta0) / steps as f64
}

/// Rotation number of a single orbit from `theta0`.
pub fn rotation_number_from(theta0: f64, n: u64, cmp: &CircleMapParams) -> Result<RotationNumber> {
    check_rotation_inputs(n, cmp)?;
    let translation = translation_from(theta0, n, cmp);
    Ok(RotationNumber {
        rho: wrap_unit(translation),
        translation,
        error_bound: 1.0 / n as f64,
    })
}

/// Rotation number averaged over [`ROTATION_STARTS`] equally spaced starts.
///
/// Each start is iterated `2n` times, so the bound `max(1/n, tol)` holds for
/// every circle diffeomorphism, and the result is non-decreasing in `a`.
pub fn rotation_number(cmp: &CircleMapParams, n: u64, tol: f64) -> Result<RotationNumber> {
    check_rotation_inputs(n, cmp)?;
    let translation = (0..ROTATION_STARTS)
        .map(|i| translation_from(i as f64 / ROTATION_STARTS as f64, n, cmp))
        .sum::<f64>()
        / ROTATION_STARTS as f64;
    Ok(RotationNumber {
        rho: wrap_unit(translation),
        translation,
        error_bound: (1.0 / n as f64).max(tol),
    })
}

fn check_rotation_inputs(n: u64, cmp: &CircleMapParams) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSetup("n must be at least 1".into()));
    }
    if !cmp.is_diffeomorphism() {
        return Err(Error::NotInvertible(cmp.slope_amplitude()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaircaseRow {
    pub a: f64,
    pub rho: f64,
    /// Translation number; continuous and non-decreasing in `a` across the wrap at 1.
    pub translation: f64,
    pub error_bound: f64,
}

/// Rotation numbers over a grid of offsets at fixed `B`.
pub fn staircase(b: f64, a_grid: &[f64], n: u64, tol: f64) -> Result<Vec<StaircaseRow>> {
    let params = a_grid
        .iter()
        .map(|&a| CircleMapParams::new(a, b))
        .collect::<Result<Vec<_>>>()?;
    params
        .par_iter()
        .map(|cmp| {
            rotation_number(cmp, n, tol).map(|r| StaircaseRow {
                a: cmp.a,
                rho: r.rho,
                translation: r.translation,
                error_bound: r.error_bound,
            })
        })
        .collect()
}

/// `n_points` offsets `i / n_points` covering `[0, 1)`.
pub fn uniform_offsets(n_points: usize) -> Vec<f64> {
    (0..n_points).map(|i| i as f64 / n_points as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plateau {
    pub a_start: f64,
    pub a_end: f64,
    pub translation: f64,
    /// Number of grid points in the run.
    pub len: usize,
}

impl Plateau {
    pub fn width(&self) -> f64 {
        self.a_end - self.a_start
    }
}

/// Maximal runs of at least two consecutive rows whose translation numbers agree within `tol`.
pub fn plateaus(rows: &[StaircaseRow], tol: f64) -> Vec<Plateau> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        let breaks = i == rows.len() || (rows[i].translation - rows[start].translation).abs() > tol;
        if breaks {
            if i - start >= 2 {
                out.push(Plateau {
                    a_start: rows[start].a,
                    a_end: rows[i - 1].a,
                    translation: rows[start].translation,
                    len: i - start,
                });
            }
            start = i;
        }
    }
    out
}

/// Exact offsets bounding the `ρ = 0` tongue: `f_a` has a fixed point iff `|a| ≤ B`.
pub fn zero_tongue(b: f64) -> (f64, f64) {
    (-b, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MisiurewiczVerdict {
    /// Heuristic only: the critical orbits stayed away and expanded for the
    /// iterates examined.
    Candidate,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalOrbitStats {
    pub critical_point: f64,
    /// Smallest circle distance to the critical set over iterates `1..=n`.
    pub min_distance: f64,
    /// `Σ log|f′|` over iterates `1..=n`.
    pub log_derivative: f64,
    /// `log_derivative / n`.
    pub log_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalOrbitReport {
    pub orbits: Vec<CriticalOrbitStats>,
    pub verdict: MisiurewiczVerdict,
    pub heuristic: bool,
}

/// Reduces into `[-½, ½)`; odd under negation except at the tie.
#[inline]
fn wrap_centered(x: f64) -> f64 {
    x - x.round()
}

/// Follows both critical orbits for `n` steps and checks that they stay
/// `delta` away from the critical set while `|(f^n)′|` grows at log-rate
/// at least `margin`.
///
/// Orbits are iterated in centered coordinates so that for `a = 0`, where
/// `f_0` is odd, the two orbits are exact mirror images.
pub fn critical_orbit_diagnostic(
    cmp: &CircleMapParams,
    n: u64,
    delta: f64,
    margin: f64,
) -> Result<CriticalOrbitReport> {
    if n == 0 {
        return Err(Error::InvalidSetup("n must be at least 1".into()));
    }
    let crit = critical_points(cmp);
    if crit.is_empty() || crit.degenerate {
        return Err(Error::InvalidSetup(format!(
            "critical-orbit diagnostic needs 2πB > 1, got {}",
            cmp.slope_amplitude()
        )));
    }
    // In centered coordinates the pair is exactly {c, -c}.
    let c = crit.points[0];
    let centered = [c, -c];
    let dist = |x: f64| {
        centered
            .iter()
            .map(|&c| wrap_centered(x - c).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let orbits: Vec<CriticalOrbitStats> = centered
        .iter()
        .map(|&c| {
            let mut x = c;
            let mut min_distance = f64::INFINITY;
            let mut log_derivative = 0.0;
            for _ in 0..n {
                x = wrap_centered(x + cmp.a + cmp.b * (TAU * x).sin());
                min_distance = min_distance.min(dist(x));
                log_derivative += (1.0 + TAU * cmp.b * (TAU * x).cos()).abs().ln();
            }
            CriticalOrbitStats {
                critical_point: wrap_unit(c),
                min_distance,
                log_derivative,
                log_slope: log_derivative / n as f64,
            }
        })
        .collect();
    let candidate = delta <= 0.5
        && orbits
            .iter()
            .all(|o| o.min_distance >= delta && o.log_slope >= margin);
    Ok(CriticalOrbitReport {
        orbits,
        verdict: if candidate {
            MisiurewiczVerdict::Candidate
        } else {
            MisiurewiczVerdict::Inconclusive
        },
        heuristic: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularComparison {
    pub k: f64,
    pub a: f64,
    pub lambda_1d: f64,
    pub lambda_2d: f64,
    pub gap: f64,
}

/// Compares the exponent of `f_a` with the per-kick exponent of the planar
/// map at `τ = k + a`.
///
/// Orbit `i` of both systems starts at the same phase drawn from stream
/// `(seed, i)`; the planar orbit starts on the cycle. Each exponent is the
/// mean over `n_orbits`.
pub fn compare_to_2d(
    params: &ShearParams,
    n_steps: u64,
    n_orbits: usize,
    seed: u64,
    config: &LyapunovConfig,
) -> Result<SingularComparison> {
    if n_orbits == 0 {
        return Err(Error::InvalidSetup("n_orbits must be at least 1".into()));
    }
    let cmp = CircleMapParams::from_shear(params);
    let pairs = (0..n_orbits)
        .into_par_iter()
        .map(|i| {
            let mut rng = prng::prng_stream(seed, i as u64);
            let theta0 = prng::uniform(&mut rng);
            let tangent = prng::unit_vector(&mut rng, 2);
            let one = lyap1d_after(theta0, config.burn_in, n_steps, &cmp)?;
            let two = lyapunov::max_lyapunov(params, CylinderPoint::new(theta0, 0.0), &tangent, n_steps, config)?;
            Ok((one.value, two.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda_1d = pairs.iter().map(|p| p.0).sum::<f64>() / n_orbits as f64;
    let lambda_2d = pairs.iter().map(|p| p.1).sum::<f64>() / n_orbits as f64;
    Ok(SingularComparison {
        k: params.tau().floor(),
        a: cmp.a,
        lambda_1d,
        lambda_2d,
        gap: (lambda_1d - lambda_2d).abs(),
    })
}

/// `ln(1 - 2πB)`: the exponent at the sink `θ = ½` of `f_0` for `2πB < 1`.
pub fn half_sink_exponent(b: f64) -> f64 {
    (1.0 - 2.0 * PI * b).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cm(a: f64, b: f64) -> CircleMapParams {
        CircleMapParams::new(a, b).unwrap()
    }

    #[test]
    fn map_examples() {
        assert_relative_eq!(f(0.5, &cm(0.25, 0.0)), 0.75);
        assert_relative_eq!(f_lift(0.25, &cm(0.0, 2.0)), 2.25, epsilon = 1e-15);
        assert_relative_eq!(f(0.25, &cm(0.0, 2.0)), 0.25, epsilon = 1e-14);
    }

    /// Bisection on sign changes of `f′`, independent of the closed form.
    fn bisect_critical(cmp: &CircleMapParams, mut lo: f64, mut hi: f64) -> f64 {
        let sign_lo = derivative(lo, cmp) > 0.0;
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if (derivative(mid, cmp) > 0.0) == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn critical_points_match_bisection() {
        let cmp = cm(0.0, 2.0);
        let set = critical_points(&cmp);
        assert!(!set.degenerate);
        let c1 = bisect_critical(&cmp, 0.0, 0.5);
        let c2 = bisect_critical(&cmp, 0.5, 1.0);
        assert!((set.points[0] - c1).abs() < 1e-10);
        assert!((set.points[1] - c2).abs() < 1e-10);
        assert!((set.points[0] - 0.26268).abs() < 1e-5);
        assert!((set.points[1] - 0.73732).abs() < 1e-5);
    }

    #[test]
    fn degenerate_and_empty_critical_sets() {
        let set = critical_points(&cm(0.3, 1.0 / TAU));
        assert!(set.degenerate);
        assert_eq!(set.points, vec![0.5, 0.5]);
        assert!(critical_points(&cm(0.3, 0.1)).is_empty());
    }

    #[test]
    fn lyap1d_examples() {
        assert_eq!(lyap1d(0.3, 1000, &cm(0.4, 0.0)).unwrap().value, 0.0);
        // Oracle: iterate to the attracting fixed point, then read log|f′| there.
        let cmp = cm(0.0, 0.1);
        let mut x = 0.3;
        for _ in 0..10_000 {
            x = f(x, &cmp);
        }
        assert!((x - 0.5).abs() < 1e-12);
        let at_sink = derivative(x, &cmp).ln();
        assert_relative_eq!(at_sink, half_sink_exponent(0.1), epsilon = 1e-12);
        assert!((at_sink + 0.9898).abs() < 1e-4);
        let est = lyap1d(0.3, 1_000_000, &cmp).unwrap();
        assert!((est.value - at_sink).abs() < 1e-4, "{}", est.value);
    }

    #[test]
    fn lyap1d_chaotic_is_mostly_positive() {
        let cmp = cm(0.3, 2.0);
        let mut rng = prng::prng_stream(17, 0);
        let positive = (0..10)
            .filter(|_| lyap1d(prng::uniform(&mut rng), 100_000, &cmp).unwrap().value > 0.0)
            .count();
        assert!(positive >= 8);
    }

    #[test]
    fn lyap1d_flags_critical_hit() {
        let cmp = cm(0.0, 2.0);
        let c = critical_points(&cmp).points[0];
        let est = lyap1d(c, 10, &cmp).unwrap();
        assert!(est.critical_hit);
        assert_eq!(est.value, f64::NEG_INFINITY);
    }

    #[test]
    fn rotation_examples() {
        let r = rotation_number(&cm(0.25, 0.0), 1000, 1e-9).unwrap();
        assert_eq!(r.rho, 0.25);
        let r = rotation_number(&cm(0.0, 0.1), 10_000, 1e-9).unwrap();
        assert!(r.rho < 1e-9 || r.rho > 1.0 - 1e-9, "{r:?}");
        assert!(matches!(rotation_number(&cm(0.0, 0.2), 10, 1e-9), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn rotation_monotone_in_offset() {
        let rows = staircase(0.1, &uniform_offsets(512), 2_000, 1e-9).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].translation >= w[0].translation);
        }
    }

    #[test]
    fn identity_staircase() {
        let rows = staircase(0.0, &uniform_offsets(64), 100, 1e-12).unwrap();
        for row in rows {
            assert!((row.rho - row.a).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_plateau_matches_tongue() {
        let b = 0.1;
        let rows = staircase(b, &uniform_offsets(512), 4_000, 1e-9).unwrap();
        let tol = rows[0].error_bound;
        let (_, right) = zero_tongue(b);
        let first = plateaus(&rows, tol)[0];
        assert_eq!(first.a_start, 0.0);
        assert!(first.translation.abs() < tol);
        // The grid plateau ends at the last grid point inside [0, B].
        assert!((first.a_end - right).abs() <= 2.0 / 512.0, "{first:?}");
        assert!(first.width() > 0.0);
    }

    #[test]
    fn half_plateau_visible() {
        let rows = staircase(0.1, &uniform_offsets(512), 4_000, 1e-9).unwrap();
        let tol = rows[0].error_bound;
        let ps = plateaus(&rows, tol);
        assert!(ps.iter().any(|p| (p.translation - 0.5).abs() < tol && p.len > 2));
    }

    #[test]
    fn symmetric_critical_orbits() {
        let report = critical_orbit_diagnostic(&cm(0.0, 2.0), 5_000, 1e-3, 0.1).unwrap();
        let (a, b) = (report.orbits[0], report.orbits[1]);
        assert_eq!(a.min_distance, b.min_distance);
        assert_eq!(a.log_derivative, b.log_derivative);
        assert!(report.heuristic);
    }

    #[test]
    fn oversized_delta_is_inconclusive() {
        for i in 0..32 {
            let cmp = cm(i as f64 / 32.0, 2.0);
            let report = critical_orbit_diagnostic(&cmp, 50, 0.51, -100.0).unwrap();
            assert_eq!(report.verdict, MisiurewiczVerdict::Inconclusive);
        }
    }

    #[test]
    fn unforced_comparison() {
        let p = ShearParams::new(2.0, 0.1, 0.0, 30.3).unwrap();
        let cmp = compare_to_2d(&p, 100_000, 2, 1, &LyapunovConfig::default()).unwrap();
        assert!(cmp.lambda_1d.abs() < 1e-12);
        assert!(cmp.lambda_2d.abs() < 1e-3);
        assert!(cmp.gap < 1e-3);
    }

    proptest! {
        #[test]
        fn lift_has_degree_one(theta in -3.0f64..3.0, a in 0.0f64..1.0, b in 0.0f64..3.0) {
            let cmp = cm(a, b);
            let d = f_lift(theta + 1.0, &cmp) - f_lift(theta, &cmp);
            prop_assert!((d - 1.0).abs() < 1e-12);
        }

        #[test]
        fn diffeomorphism_criterion(b in 0.0f64..0.4) {
            prop_assume!((TAU * b - 1.0).abs() > 1e-6);
            let cmp = cm(0.2, b);
            let min_slope = (0..10_000)
                .map(|i| derivative(i as f64 / 10_000.0, &cmp))
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(min_slope > 0.0, cmp.is_diffeomorphism());
        }

        #[test]
        fn rotation_start_independent(t0 in 0.0f64..1.0, t1 in 0.0f64..1.0, a in 0.0f64..1.0) {
            let cmp = cm(a, 0.1);
            let n = 2_000;
            let r0 = rotation_number_from(t0, n, &cmp).unwrap();
            let r1 = rotation_number_from(t1, n, &cmp).unwrap();
            prop_assert!((r0.translation - r1.translation).abs() <= 2.0 / n as f64);
        }
    }
}
