use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{GridPoint, Model, SweepSpec};
use crate::error::{Error, Result};
use crate::lyapunov::{self, Classification, EnsembleReport};
use crate::ndim;

/// One orbit's estimate. For `ndim` rows `sigma` is `|σ|` and `lambda` is
/// `tr Λ / (n - 1)`, which reduce to the planar values when `n = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: Model,
    pub sigma: f64,
    pub lambda: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub tau: f64,
    pub seed: u64,
    pub orbit_id: usize,
    pub n_steps: u64,
    pub lambda_max: f64,
    pub classification: Classification,
}

/// The ensemble outcome at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub model: Model,
    pub sigma: f64,
    pub lambda: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub tau: f64,
    pub seed: u64,
    pub n_orbits: usize,
    pub n_steps: u64,
    pub dropped_min: usize,
    pub dropped_max: usize,
    pub min_retained: f64,
    pub max_retained: f64,
    pub trimmed_mean: f64,
    pub multi_behavior: bool,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Grid order, then orbit order.
    pub records: Vec<RunRecord>,
    pub summaries: Vec<GridSummary>,
    /// Wall time per grid point. Not written to the data files.
    pub wall_times: Vec<Duration>,
}

struct PointKey {
    model: Model,
    sigma: f64,
    lambda: f64,
    amplitude: f64,
    tau: f64,
}

impl GridPoint {
    fn key(&self) -> PointKey {
        match self {
            GridPoint::Shear2d(p) => PointKey {
                model: Model::Shear2d,
                sigma: p.sigma(),
                lambda: p.lambda(),
                amplitude: p.amplitude(),
                tau: p.tau(),
            },
            GridPoint::Ndim(p) => PointKey {
                model: Model::Ndim,
                sigma: p.sigma().norm(),
                lambda: p.lambda().trace() / p.sigma().len() as f64,
                amplitude: p.amplitude(),
                tau: p.tau(),
            },
        }
    }
}

fn summarize<S>(key: &PointKey, spec: &SweepSpec, report: &EnsembleReport<S>) -> (Vec<RunRecord>, GridSummary) {
    let seed = spec.ensemble.seed;
    let records = report
        .all_estimates
        .iter()
        .enumerate()
        .map(|(orbit_id, e)| RunRecord {
            model: key.model,
            sigma: key.sigma,
            lambda: key.lambda,
            amplitude: key.amplitude,
            tau: key.tau,
            seed,
            orbit_id,
            n_steps: e.n_steps,
            lambda_max: e.value,
            classification: e.classification,
        })
        .collect();
    let summary = GridSummary {
        model: key.model,
        sigma: key.sigma,
        lambda: key.lambda,
        amplitude: key.amplitude,
        tau: key.tau,
        seed,
        n_orbits: report.all_estimates.len(),
        n_steps: spec.ensemble.n_steps,
        dropped_min: report.dropped.0,
        dropped_max: report.dropped.1,
        min_retained: report.min_retained,
        max_retained: report.max_retained,
        trimmed_mean: report.trimmed_mean,
        multi_behavior: report.multi_behavior,
        classification: report.classification,
    };
    (records, summary)
}

/// Runs the ensemble protocol at every grid point. Grid points and orbits run
/// in the rayon pool; results are assembled in index order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let points = spec.grid_points()?;
    let ens = spec.ensemble;
    let per_point = points
        .par_iter()
        .map(|point| {
            let start = Instant::now();
            let key = point.key();
            let (records, summary) = match point {
                GridPoint::Shear2d(p) => {
                    let r = lyapunov::ensemble_protocol(p, ens.n_orbits, ens.n_steps, ens.seed, &spec.lyapunov)?;
                    summarize(&key, spec, &r)
                }
                GridPoint::Ndim(p) => {
                    let r = ndim::ensemble_nd(p, ens.n_orbits, ens.n_steps, ens.seed, &spec.lyapunov)?;
                    summarize(&key, spec, &r)
                }
            };
            Ok((records, summary, start.elapsed()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SweepOutcome {
        records: Vec::with_capacity(points.len() * ens.n_orbits),
        summaries: Vec::with_capacity(points.len()),
        wall_times: Vec::with_capacity(points.len()),
    };
    for (records, summary, t) in per_point {
        out.records.extend(records);
        out.summaries.push(summary);
        out.wall_times.push(t);
    }
    Ok(out)
}

/// CSV bytes with a header row, LF endings and shortest round-trip floats.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn parse_csv<T: DeserializeOwned>(bytes: &[u8]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(bytes);
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

/// Writes `bytes` next to `path` and renames over it, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, &csv_bytes(rows)?)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    parse_csv(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{EnsembleSettings, GridSpec, ShearParamsConfig, SweptParameter};

    fn small_spec() -> SweepSpec {
        let mut spec = SweepSpec::tau_sweep(
            ShearParamsConfig {
                sigma: 0.5,
                lambda: 0.1,
                amplitude: 0.1,
                tau: 10.0,
            },
            9.0,
            11.0,
            0.5,
            EnsembleSettings {
                n_orbits: 5,
                n_steps: 2_000,
                seed: 11,
            },
        );
        spec.lyapunov.burn_in = 100;
        spec
    }

    #[test]
    fn records_are_grid_then_orbit_ordered() {
        let out = run_sweep(&small_spec()).unwrap();
        assert_eq!(out.summaries.len(), 5);
        assert_eq!(out.records.len(), 25);
        for (i, r) in out.records.iter().enumerate() {
            assert_eq!(r.orbit_id, i % 5);
            assert_eq!(r.tau, out.summaries[i / 5].tau);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let out = run_sweep(&small_spec()).unwrap();
        let bytes = csv_bytes(&out.records).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with(
            "model,sigma,lambda,A,tau,seed,orbit_id,n_steps,lambda_max,classification\n"
        ));
        assert!(!text.contains('\r'));
        let back: Vec<RunRecord> = parse_csv(&bytes).unwrap();
        assert_eq!(back, out.records);
        for (a, b) in back.iter().zip(&out.records) {
            assert_eq!(a.lambda_max.to_bits(), b.lambda_max.to_bits());
        }
        let summaries: Vec<GridSummary> = parse_csv(&csv_bytes(&out.summaries).unwrap()).unwrap();
        assert_eq!(summaries, out.summaries);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = csv_bytes(&run_sweep(&small_spec()).unwrap().records).unwrap();
        let b = csv_bytes(&run_sweep(&small_spec()).unwrap().records).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn planar_ndim_rows_carry_planar_columns() {
        let spec = SweepSpec::from_json(
            r#"{"model": "ndim",
                "ndim": {"sigma": [2.0], "lambda": [[0.1]], "A": 0.1, "tau": 10},
                "ensemble": {"n_orbits": 3, "n_steps": 500, "seed": 1},
                "lyapunov": {"burn_in": 50}}"#,
        )
        .unwrap();
        let s = &run_sweep(&spec).unwrap().summaries[0];
        assert_eq!((s.sigma, s.lambda, s.amplitude, s.tau), (2.0, 0.1, 0.1, 10.0));
    }

    #[test]
    fn guard_trip_surfaces_as_nonfinite_state() {
        let mut spec = small_spec();
        spec.lyapunov.guard = 1e-9;
        spec.sweep = Some(GridSpec::values(SweptParameter::Tau, vec![10.0]));
        assert!(matches!(run_sweep(&spec), Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"old contents that are longer\n").unwrap();
        write_atomic(&path, b"new\n").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"new\n");
        let leftovers = std::fs::read_dir(path.parent().unwrap()).unwrap().count();
        assert_eq!(leftovers, 1);
    }
}
