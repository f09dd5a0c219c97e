//! Curves and point sets of the planar map: images of the limit cycle, fold
//! and crossing counts, the graph transform for invariant curves, and
//! attractor clouds.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prng;
use crate::shear::{self, CylinderPoint, LiftedPoint, ShearParams};

/// One sample of a curve: seed parameter `s` on the cycle and the lifted image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub s: f64,
    pub theta: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub points: Vec<CurvePoint>,
    pub params: Option<ShearParams>,
    pub n_kicks: usize,
    pub resolution: usize,
    /// The last point is the first shifted by one turn.
    pub closed: bool,
}

impl CurveSample {
    /// An open curve from raw `(θ-lift, y)` pairs, for synthetic input.
    pub fn from_points(points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let points: Vec<CurvePoint> = points
            .into_iter()
            .enumerate()
            .map(|(i, (theta, y))| CurvePoint { s: i as f64, theta, y })
            .collect();
        let resolution = points.len();
        Self {
            points,
            params: None,
            n_kicks: 0,
            resolution,
            closed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn thetas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineOptions {
    /// Largest allowed gap between neighbours in `(θ, y/h)`, `h` the trapping half-width.
    pub arc_tol: f64,
    /// Maximum number of samples in one curve.
    pub budget: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            arc_tol: 0.01,
            budget: 1 << 20,
        }
    }
}

/// Smallest seed spacing refinement will split.
const MIN_SEED_GAP: f64 = 1e-13;

/// Image of `γ = {y = 0}` under `n_kicks` applications of the lifted map,
/// refined until neighbours are within `arc_tol`.
pub fn image_of_cycle(
    params: &ShearParams,
    n_kicks: usize,
    resolution: usize,
    opts: &RefineOptions,
) -> Result<CurveSample> {
    if resolution < 64 {
        return Err(Error::InvalidSetup(format!("resolution must be at least 64, got {resolution}")));
    }
    if n_kicks == 0 {
        return Err(Error::InvalidSetup("n_kicks must be at least 1".into()));
    }
    let image = |s: f64| {
        let mut p = LiftedPoint::new(s, 0.0);
        for _ in 0..n_kicks {
            p = shear::psi_lifted(p, params);
        }
        CurvePoint { s, theta: p.theta, y: p.y }
    };
    let h = shear::trapping_bound(params);
    let y_scale = if h > 0.0 { 1.0 / h } else { 0.0 };
    let far = |p: &CurvePoint, q: &CurvePoint| {
        let dt = q.theta - p.theta;
        let dy = (q.y - p.y) * y_scale;
        (dt * dt + dy * dy).sqrt() > opts.arc_tol
    };

    let seeds: Vec<CurvePoint> = (0..=resolution).map(|i| image(i as f64 / resolution as f64)).collect();
    let mut points = Vec::with_capacity(2 * seeds.len());
    points.push(seeds[0]);
    let mut exhausted = false;
    let mut stack = Vec::new();
    for pair in seeds.windows(2) {
        stack.push((pair[0], pair[1]));
        while let Some((p, q)) = stack.pop() {
            let splittable = q.s - p.s > MIN_SEED_GAP;
            if !exhausted && splittable && far(&p, &q) {
                if points.len() + stack.len() + 2 > opts.budget {
                    exhausted = true;
                } else {
                    let m = image(0.5 * (p.s + q.s));
                    stack.push((m, q));
                    stack.push((p, m));
                    continue;
                }
            }
            points.push(q);
        }
    }
    let curve = CurveSample {
        points,
        params: Some(*params),
        n_kicks,
        resolution,
        closed: true,
    };
    if exhausted {
        return Err(Error::PointBudgetExceeded {
            budget: opts.budget,
            partial: Box::new(curve),
        });
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FoldReport {
    /// Strict local extrema of `θ`-lift along the curve.
    pub turning_points: usize,
    /// `⌊max θ-lift − min θ-lift⌋`.
    pub laps: u64,
    pub is_graph: bool,
}

/// Signs of consecutive differences, zeros dropped.
fn difference_signs(values: &[f64]) -> Vec<i8> {
    values
        .windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            if d > 0.0 {
                Some(1)
            } else if d < 0.0 {
                Some(-1)
            } else {
                None
            }
        })
        .collect()
}

pub fn fold_report(curve: &CurveSample) -> FoldReport {
    let thetas = curve.thetas();
    let signs = difference_signs(&thetas);
    let mut turning_points = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if curve.closed && signs.len() > 1 && signs[0] != signs[signs.len() - 1] {
        turning_points += 1;
    }
    let lo = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let laps = if thetas.is_empty() { 0 } else { (hi - lo).floor() as u64 };
    FoldReport {
        turning_points,
        laps,
        is_graph: turning_points == 0,
    }
}

/// Smallest `σ` at which the one-kick image of the cycle shows a fold,
/// by bisection on [`fold_report`] over `[lo, hi]` down to width `tol`.
pub fn numerical_fold_threshold(
    lambda: f64,
    amplitude: f64,
    tau: f64,
    (mut lo, mut hi): (f64, f64),
    tol: f64,
    resolution: usize,
) -> Result<f64> {
    let folded = |sigma: f64| -> Result<bool> {
        let params = ShearParams::new(sigma, lambda, amplitude, tau)?;
        let curve = image_of_cycle(&params, 1, resolution, &RefineOptions::default())?;
        Ok(fold_report(&curve).turning_points > 0)
    };
    if folded(lo)? || !folded(hi)? {
        return Err(Error::InvalidSetup(format!(
            "fold onset is not bracketed by sigma in [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if folded(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneSegment {
    pub theta_start: f64,
    pub theta_end: f64,
}

impl MonotoneSegment {
    pub fn extent(&self) -> f64 {
        (self.theta_end - self.theta_start).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorseshoeReport {
    /// Maximal monotone pieces of `Ψ_τ(γ)` whose `θ`-extent covers a full turn.
    pub full_crossings: usize,
    /// `Σ |Δθ|` around the closed image curve.
    pub total_variation: f64,
    pub segments: Vec<MonotoneSegment>,
    /// `full_crossings ≥ 2`; numerical evidence only.
    pub horseshoe_candidate: bool,
}

const FULL_TURN_TOL: f64 = 1e-9;

/// Splits the closed one-kick image of the cycle into monotone pieces and
/// counts those that wrap all the way around the cylinder.
pub fn horseshoe_crossing_diagnostic(params: &ShearParams, opts: &RefineOptions) -> Result<HorseshoeReport> {
    let curve = image_of_cycle(params, 1, 256, opts)?;
    Ok(crossings_of_closed_curve(&curve.thetas()))
}

/// `thetas` is a closed lifted curve: the last value is the first plus one.
fn crossings_of_closed_curve(thetas: &[f64]) -> HorseshoeReport {
    let total_variation = thetas.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let body = &thetas[..thetas.len() - 1];
    let n = body.len();
    let at = |i: usize| body[i % n] + (i / n) as f64;
    let dir = |i: usize| (at(i + 1) - at(i)).signum();

    // Start at a turning point so that no monotone piece straddles the seam.
    let start = (0..n).find(|&i| dir(i + n - 1) * dir(i) < 0.0);
    let segments = match start {
        None => vec![MonotoneSegment {
            theta_start: at(0),
            theta_end: at(n),
        }],
        Some(start) => {
            let mut segments = Vec::new();
            let mut seg_start = start;
            for i in start + 1..=start + n {
                let turning = i == start + n || dir(i - 1) * dir(i) < 0.0;
                if turning {
                    segments.push(MonotoneSegment {
                        theta_start: at(seg_start),
                        theta_end: at(i),
                    });
                    seg_start = i;
                }
            }
            segments
        }
    };
    let full_crossings = segments.iter().filter(|s| s.extent() >= 1.0 - FULL_TURN_TOL).count();
    HorseshoeReport {
        full_crossings,
        total_variation,
        segments,
        horseshoe_candidate: full_crossings >= 2,
    }
}

/// A periodic graph `y = g(θ)` on the uniform grid `θ_j = j/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCurve {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub last_change: f64,
}

impl InvariantCurve {
    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.values.len() as f64;
        (0..self.values.len()).map(|j| j as f64 / n).collect()
    }

    /// Periodic piecewise-linear interpolation.
    pub fn eval(&self, theta: f64) -> f64 {
        periodic_linear(&self.values, theta)
    }

    /// Vertical distance from `p` to the curve.
    pub fn distance(&self, p: CylinderPoint) -> f64 {
        (p.y - self.eval(p.theta)).abs()
    }
}

fn periodic_linear(values: &[f64], theta: f64) -> f64 {
    let n = values.len();
    let x = shear::wrap_unit(theta) * n as f64;
    let j = (x.floor() as usize).min(n - 1);
    let t = x - j as f64;
    values[j] * (1.0 - t) + values[(j + 1) % n] * t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InvariantCurveOutcome {
    Converged(InvariantCurve),
    /// The image of the current graph folded at this iterate; the invariant
    /// curve has broken (or never formed).
    Breakdown {
        iteration: usize,
        image: CurveSample,
    },
}

/// Extra samples per grid cell used to look for folds hidden between grid points.
const FOLD_PROBES_PER_CELL: usize = 4;

/// Result of one graph-transform step.
enum TransformStep {
    Graph(Vec<f64>),
    Folded(CurveSample),
}

fn graph_transform(params: &ShearParams, values: &[f64]) -> TransformStep {
    let n = values.len();
    let image: Vec<LiftedPoint> = (0..=n)
        .map(|j| shear::psi_lifted(LiftedPoint::new(j as f64 / n as f64, values[j % n]), params))
        .collect();

    let probe_thetas = (0..n * FOLD_PROBES_PER_CELL + 1).map(|i| {
        let theta = i as f64 / (n * FOLD_PROBES_PER_CELL) as f64;
        shear::psi_lifted(LiftedPoint::new(theta, periodic_linear(values, theta)), params).theta
    });
    let monotone = image.windows(2).all(|w| w[1].theta > w[0].theta) && {
        let mut prev = f64::NEG_INFINITY;
        probe_thetas.into_iter().all(|t| {
            let ok = t > prev;
            prev = t;
            ok
        })
    };
    if !monotone {
        return TransformStep::Folded(CurveSample {
            points: image
                .iter()
                .enumerate()
                .map(|(j, p)| CurvePoint {
                    s: j as f64 / n as f64,
                    theta: p.theta,
                    y: p.y,
                })
                .collect(),
            params: Some(*params),
            n_kicks: 1,
            resolution: n,
            closed: true,
        });
    }

    // The image is a graph over one full turn starting at image[0].theta.
    let base = image[0].theta.floor();
    let xs: Vec<f64> = image.iter().map(|p| p.theta - base).collect();
    let next = (0..n)
        .map(|k| {
            let mut target = k as f64 / n as f64;
            if target < xs[0] {
                target += 1.0;
            }
            let i = xs.partition_point(|&x| x <= target).clamp(1, n);
            let (x0, x1) = (xs[i - 1], xs[i]);
            let t = (target - x0) / (x1 - x0);
            image[i - 1].y * (1.0 - t) + image[i].y * t
        })
        .collect();
    TransformStep::Graph(next)
}

/// Graph transform from `g ≡ 0` until successive graphs differ by less than
/// `tol` in sup norm.
pub fn invariant_curve(
    params: &ShearParams,
    tol: f64,
    max_iters: usize,
    resolution: usize,
) -> Result<InvariantCurveOutcome> {
    if resolution < 64 {
        return Err(Error::InvalidSetup(format!("resolution must be at least 64, got {resolution}")));
    }
    let mut values = vec![0.0; resolution];
    let mut last_change = f64::INFINITY;
    for iteration in 1..=max_iters {
        match graph_transform(params, &values) {
            TransformStep::Folded(image) => {
                return Ok(InvariantCurveOutcome::Breakdown { iteration, image });
            }
            TransformStep::Graph(next) => {
                last_change = next
                    .iter()
                    .zip(&values)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                values = next;
                if last_change < tol {
                    return Ok(InvariantCurveOutcome::Converged(InvariantCurve {
                        values,
                        iterations: iteration,
                        last_change,
                    }));
                }
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        last_change,
    })
}

/// Sup-norm change from one more graph-transform step; `None` if that step folds.
pub fn transform_residual(params: &ShearParams, curve: &InvariantCurve) -> Option<f64> {
    match graph_transform(params, &curve.values) {
        TransformStep::Graph(next) => Some(
            next.iter()
                .zip(&curve.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        ),
        TransformStep::Folded(_) => None,
    }
}

/// Forward orbits sampled after a transient, ordered by seed point then time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorCloud {
    pub points: Vec<CylinderPoint>,
    pub n_points: usize,
    pub burn_in: u64,
    pub n_record: usize,
    pub seed: u64,
}

impl AttractorCloud {
    /// Largest `|y|` in the cloud.
    pub fn y_extent(&self) -> f64 {
        self.points.iter().map(|p| p.y.abs()).fold(0.0, f64::max)
    }
}

/// Starts `n_points` orbits uniformly in the trapping band (orbit `i` on stream
/// `(seed, i)`), discards `burn_in` kicks and records the next `n_record`.
pub fn attractor_cloud(
    params: &ShearParams,
    n_points: usize,
    burn_in: u64,
    n_record: usize,
    seed: u64,
) -> Result<AttractorCloud> {
    if n_points == 0 {
        return Err(Error::InvalidSetup("n_points must be at least 1".into()));
    }
    let h = shear::trapping_bound(params);
    let orbits: Vec<Vec<CylinderPoint>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = prng::prng_stream(seed, i as u64);
            let mut p = CylinderPoint::new(prng::uniform(&mut rng), prng::uniform_in(&mut rng, -h, h));
            for _ in 0..burn_in {
                p = shear::psi(p, params);
            }
            (0..n_record)
                .map(|_| {
                    p = shear::psi(p, params);
                    p
                })
                .collect()
        })
        .collect();
    Ok(AttractorCloud {
        points: orbits.into_iter().flatten().collect(),
        n_points,
        burn_in,
        n_record,
        seed,
    })
}

/// Groups points lying within `radius` (circle metric in `θ`) of a cluster's first member.
pub fn cluster_centers(points: &[CylinderPoint], radius: f64) -> Vec<CylinderPoint> {
    let mut centers: Vec<CylinderPoint> = Vec::new();
    for p in points {
        let near = centers
            .iter()
            .any(|c| shear::circle_distance(c.theta, p.theta).hypot(c.y - p.y) <= radius);
        if !near {
            centers.push(*p);
        }
    }
    centers
}
