use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RefineOptions;
use crate::lyapunov::LyapunovConfig;
use crate::ndim::{NdParams, NdParamsConfig};
use crate::shear::ShearParams;

/// Steps per orbit at desk scale.
pub const DEFAULT_N_STEPS: u64 = 100_000;
/// Steps per orbit selected by `--full`.
pub const FULL_N_STEPS: u64 = 4_000_000;
/// Grid spacing used when a range omits `step`.
pub const DEFAULT_GRID_STEP: f64 = 0.05;

/// Parses a JSON document, rejecting unknown keys, and reports failures as
/// `source: field `path`: message at line L column C`.
pub fn parse_json<T: DeserializeOwned>(text: &str, source: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            Error::Config(format!("{source}: {inner}"))
        } else {
            Error::Config(format!("{source}: field `{path}`: {inner}"))
        }
    })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: cannot read config: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

fn field_error(field: &str, err: Error) -> Error {
    match err {
        Error::Config(msg) => Error::Config(format!("field `{field}`: {msg}")),
        other => Error::Config(format!("field `{field}`: {other}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearParamsConfig {
    pub sigma: f64,
    pub lambda: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub tau: f64,
}

impl ShearParamsConfig {
    pub fn build(&self) -> Result<ShearParams> {
        ShearParams::new(self.sigma, self.lambda, self.amplitude, self.tau)
    }

    fn with(&self, parameter: SweptParameter, value: f64) -> Self {
        let mut out = *self;
        match parameter {
            SweptParameter::Tau => out.tau = value,
            SweptParameter::Sigma => out.sigma = value,
            SweptParameter::Lambda => out.lambda = value,
            SweptParameter::Amplitude => out.amplitude = value,
        }
        out
    }
}

impl From<&ShearParams> for ShearParamsConfig {
    fn from(p: &ShearParams) -> Self {
        Self {
            sigma: p.sigma(),
            lambda: p.lambda(),
            amplitude: p.amplitude(),
            tau: p.tau(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Shear2d,
    Ndim,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Shear2d => "shear2d",
            Model::Ndim => "ndim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweptParameter {
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "A")]
    Amplitude,
}

/// A swept axis: either explicit `values` or `start..=stop` in steps of `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub parameter: SweptParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl GridSpec {
    pub fn range(parameter: SweptParameter, start: f64, stop: f64, step: f64) -> Self {
        Self {
            parameter,
            values: None,
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
        }
    }

    pub fn values(parameter: SweptParameter, values: Vec<f64>) -> Self {
        Self {
            parameter,
            values: Some(values),
            start: None,
            stop: None,
            step: None,
        }
    }

    /// The grid, nonempty and strictly increasing.
    ///
    /// Range points are `start + i·step` rounded to 12 decimals, so a grid
    /// written as `5, 5.05, ...` holds the doubles nearest those decimals.
    pub fn points(&self) -> Result<Vec<f64>> {
        let grid = match (&self.values, self.start, self.stop) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::Config(
                    "field `sweep`: give either `values` or `start`/`stop`, not both".into(),
                ))
            }
            (Some(values), None, None) => {
                if self.step.is_some() {
                    return Err(Error::Config("field `sweep.step`: only valid with `start`/`stop`".into()));
                }
                values.clone()
            }
            (None, Some(start), Some(stop)) => {
                let step = self.step.unwrap_or(DEFAULT_GRID_STEP);
                if !(step.is_finite() && step > 0.0) {
                    return Err(Error::Config(format!("field `sweep.step`: must be positive, got {step}")));
                }
                if !(start.is_finite() && stop.is_finite()) {
                    return Err(Error::Config("field `sweep.start`: range ends must be finite".into()));
                }
                if stop < start {
                    return Err(Error::Config(format!(
                        "field `sweep.stop`: grid is empty (stop {stop} < start {start})"
                    )));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|i| {
                        let v = start + i as f64 * step;
                        format!("{v:.12}").parse::<f64>().expect("formatted float parses")
                    })
                    .collect()
            }
            _ => {
                return Err(Error::Config(
                    "field `sweep`: needs `values` or both `start` and `stop`".into(),
                ))
            }
        };
        if grid.is_empty() {
            return Err(Error::Config("field `sweep.values`: grid is empty".into()));
        }
        if let Some(bad) = grid.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("field `sweep.values`: non-finite grid value {bad}")));
        }
        if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "field `sweep.values`: grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSettings {
    #[serde(default = "default_n_orbits")]
    pub n_orbits: usize,
    #[serde(default = "default_n_steps")]
    pub n_steps: u64,
    pub seed: u64,
}

fn default_n_orbits() -> usize {
    10
}

fn default_n_steps() -> u64 {
    DEFAULT_N_STEPS
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Per-orbit CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<PathBuf>,
    /// Per-grid-point CSV; defaults to `<records stem>.summary.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<PathBuf>,
}

/// A Lyapunov sweep. Without `sweep` it is a single parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ShearParamsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ndim: Option<NdParamsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<GridSpec>,
    pub ensemble: EnsembleSettings,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

/// One validated grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum GridPoint {
    Shear2d(ShearParams),
    Ndim(NdParams),
}

impl SweepSpec {
    /// The shear2d spec with `tau` swept over `[start, stop]`.
    pub fn tau_sweep(params: ShearParamsConfig, start: f64, stop: f64, step: f64, ensemble: EnsembleSettings) -> Self {
        Self {
            model: Model::Shear2d,
            params: Some(params),
            ndim: None,
            sweep: Some(GridSpec::range(SweptParameter::Tau, start, stop, step)),
            ensemble,
            lyapunov: LyapunovConfig::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = parse_json(text, "sweep config")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let spec: Self = load_json(path)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_points().map(|_| ())
    }

    /// Builds the model at every grid value, in grid order.
    pub fn grid_points(&self) -> Result<Vec<GridPoint>> {
        if self.ensemble.n_orbits < 3 {
            return Err(Error::Config(format!(
                "field `ensemble.n_orbits`: need at least 3 orbits to drop two outliers, got {}",
                self.ensemble.n_orbits
            )));
        }
        if self.ensemble.n_steps == 0 {
            return Err(Error::Config("field `ensemble.n_steps`: must be at least 1".into()));
        }
        let lc = &self.lyapunov;
        if !(lc.zero_band >= 0.0 && lc.multi_gap >= 0.0 && lc.guard > 0.0) {
            return Err(Error::Config(
                "field `lyapunov`: zero_band and multi_gap must be non-negative and guard positive".into(),
            ));
        }
        match self.model {
            Model::Shear2d => {
                if self.ndim.is_some() {
                    return Err(Error::Config("field `ndim`: not allowed with model \"shear2d\"".into()));
                }
                let base = self
                    .params
                    .ok_or_else(|| Error::Config("field `params`: required for model \"shear2d\"".into()))?;
                match &self.sweep {
                    None => Ok(vec![GridPoint::Shear2d(base.build().map_err(|e| field_error("params", e))?)]),
                    Some(grid) => grid
                        .points()?
                        .into_iter()
                        .map(|v| {
                            base.with(grid.parameter, v)
                                .build()
                                .map(GridPoint::Shear2d)
                                .map_err(|e| field_error(&format!("sweep.values[{v}]"), e))
                        })
                        .collect(),
                }
            }
            Model::Ndim => {
                if self.params.is_some() {
                    return Err(Error::Config("field `params`: not allowed with model \"ndim\"".into()));
                }
                let base = self
                    .ndim
                    .as_ref()
                    .ok_or_else(|| Error::Config("field `ndim`: required for model \"ndim\"".into()))?;
                let built = base.build().map_err(|e| field_error("ndim", e))?;
                match &self.sweep {
                    None => Ok(vec![GridPoint::Ndim(built)]),
                    Some(grid) => {
                        let values = grid.points()?;
                        values
                            .into_iter()
                            .map(|v| {
                                let p = match grid.parameter {
                                    SweptParameter::Tau => built.with_tau(v),
                                    SweptParameter::Amplitude => built.with_amplitude(v),
                                    other => {
                                        return Err(Error::Config(format!(
                                            "field `sweep.parameter`: {other:?} cannot be swept for model \"ndim\"; use tau or A"
                                        )))
                                    }
                                };
                                p.map(GridPoint::Ndim)
                                    .map_err(|e| field_error(&format!("sweep.values[{v}]"), e))
                            })
                            .collect()
                    }
                }
            }
        }
    }

    /// Switches to the long-run step count.
    pub fn full_scale(mut self) -> Self {
        self.ensemble.n_steps = FULL_N_STEPS;
        self
    }

    /// Summary path: explicit, or derived from the records path.
    pub fn summary_path(&self, records: &Path) -> PathBuf {
        self.output.summary.clone().unwrap_or_else(|| derived_path(records, "summary.csv"))
    }
}

/// `dir/name.csv` becomes `dir/name.<suffix>`.
pub fn derived_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub theta: f64,
    pub y: f64,
}

/// Single-orbit trajectory of the planar map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub params: ShearParamsConfig,
    /// Drawn from the trapping band on stream `(seed, 0)` when absent.
    #[serde(default)]
    pub initial: Option<InitialState>,
    pub n_kicks: u64,
    #[serde(default)]
    pub seed: u64,
}

/// Images of the unforced cycle, one panel per `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleImageConfig {
    pub lambda: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub tau: f64,
    pub sigmas: Vec<f64>,
    #[serde(default = "one")]
    pub n_kicks: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub refine: RefineOptions,
}

fn one() -> usize {
    1
}

fn default_resolution() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttractorConfig {
    pub params: ShearParamsConfig,
    #[serde(default = "default_cloud_points")]
    pub n_points: usize,
    #[serde(default = "default_cloud_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_cloud_record")]
    pub n_record: usize,
    pub seed: u64,
}

fn default_cloud_points() -> usize {
    1000
}

fn default_cloud_burn_in() -> u64 {
    1000
}

fn default_cloud_record() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantCurveConfig {
    pub params: ShearParamsConfig,
    #[serde(default = "default_curve_tol")]
    pub tol: f64,
    #[serde(default = "default_curve_iters")]
    pub max_iters: usize,
    #[serde(default = "default_curve_resolution")]
    pub resolution: usize,
}

fn default_curve_tol() -> f64 {
    1e-8
}

fn default_curve_iters() -> usize {
    1000
}

fn default_curve_resolution() -> usize {
    1024
}

/// Rotation numbers of `f_a` for `a` on a uniform grid over `[a_start, a_stop)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseConfig {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(default)]
    pub a_start: f64,
    #[serde(default = "unit")]
    pub a_stop: f64,
    #[serde(default = "default_stair_points")]
    pub n_points: usize,
    #[serde(default = "default_stair_n")]
    pub n: u64,
    #[serde(default = "default_stair_tol")]
    pub tol: f64,
}

fn unit() -> f64 {
    1.0
}

fn default_stair_points() -> usize {
    512
}

fn default_stair_n() -> u64 {
    10_000
}

fn default_stair_tol() -> f64 {
    1e-4
}

impl StaircaseConfig {
    pub fn a_grid(&self) -> Result<Vec<f64>> {
        if self.n_points == 0 || !(self.a_stop > self.a_start) {
            return Err(Error::Config(
                "field `n_points`: need n_points >= 1 and a_stop > a_start".into(),
            ));
        }
        let width = self.a_stop - self.a_start;
        Ok((0..self.n_points)
            .map(|i| self.a_start + width * i as f64 / self.n_points as f64)
            .collect())
    }
}

/// Planar vs. singular-limit exponents at `τ = k + a` for every `k` and `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularCompareConfig {
    pub sigma: f64,
    pub lambda: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub k: Vec<u64>,
    pub a: Vec<f64>,
    #[serde(default = "default_n_steps")]
    pub n_steps: u64,
    #[serde(default = "default_compare_orbits")]
    pub n_orbits: usize,
    pub seed: u64,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
}

fn default_compare_orbits() -> usize {
    4
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEAK_SWEEP: &str = r#"{
        "model": "shear2d",
        "params": {"sigma": 0.05, "lambda": 0.1, "A": 0.1, "tau": 5},
        "sweep": {"parameter": "tau", "start": 5, "stop": 15, "step": 0.25},
        "ensemble": {"n_steps": 100000, "seed": 7}
    }"#;

    #[test]
    fn parses_range_grid() {
        let spec = SweepSpec::from_json(WEAK_SWEEP).unwrap();
        let grid = spec.sweep.as_ref().unwrap().points().unwrap();
        assert_eq!(grid.len(), 41);
        assert_eq!(grid[0], 5.0);
        assert_eq!(grid[40], 15.0);
        assert_eq!(grid[1], 5.25);
        assert_eq!(spec.ensemble.n_orbits, 10);
        assert_eq!(spec.lyapunov, LyapunovConfig::default());
    }

    #[test]
    fn default_step_is_a_twentieth() {
        let g = GridSpec {
            step: None,
            ..GridSpec::range(SweptParameter::Tau, 5.0, 15.0, 1.0)
        };
        let pts = g.points().unwrap();
        assert_eq!(pts.len(), 201);
        assert_eq!(pts[3], 5.15);
    }

    #[test]
    fn unknown_key_names_the_field() {
        let text = WEAK_SWEEP.replace("\"n_steps\"", "\"n_stpes\"");
        let err = SweepSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("ensemble"), "{err}");
        assert!(err.contains("n_stpes"), "{err}");
        assert!(err.contains("line 5"), "{err}");
    }

    #[test]
    fn missing_seed_is_rejected() {
        let text = WEAK_SWEEP.replace("\"n_steps\": 100000, \"seed\": 7", "\"n_steps\": 100000");
        let err = SweepSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn empty_grid_is_rejected() {
        let text = WEAK_SWEEP.replace(r#""start": 5, "stop": 15, "step": 0.25"#, r#""values": []"#);
        let err = SweepSpec::from_json(&text).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("empty"));
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        let g = GridSpec::values(SweptParameter::Sigma, vec![0.1, 0.3, 0.2]);
        assert!(g.points().unwrap_err().to_string().contains("strictly increasing"));
    }

    #[test]
    fn invalid_grid_value_names_it() {
        let text = WEAK_SWEEP.replace(r#""start": 5, "stop": 15, "step": 0.25"#, r#""values": [-1, 2]"#);
        let err = SweepSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("sweep.values[-1]"), "{err}");
    }

    #[test]
    fn ndim_sweep_builds() {
        let text = r#"{
            "model": "ndim",
            "ndim": {"sigma": [1, 0.5], "lambda": [[0.1, 0], [0, 0.2]], "A": 0.1, "tau": 10},
            "sweep": {"parameter": "A", "values": [0.05, 0.1]},
            "ensemble": {"seed": 1}
        }"#;
        let spec = SweepSpec::from_json(text).unwrap();
        assert_eq!(spec.grid_points().unwrap().len(), 2);
        let bad = text.replace("\"A\", \"values\"", "\"sigma\", \"values\"");
        assert!(SweepSpec::from_json(&bad).is_err());
    }

    #[test]
    fn derived_summary_path() {
        assert_eq!(
            derived_path(Path::new("out/weak.csv"), "summary.csv"),
            PathBuf::from("out/weak.summary.csv")
        );
    }
}
