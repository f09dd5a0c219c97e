use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use kickshear::circle::{self, CircleMapParams};
use kickshear::geometry::{self, InvariantCurveOutcome};
use kickshear::harness::*;
use kickshear::lyapunov;
use kickshear::shear::{self, CylinderPoint, ShearParams};
use kickshear::{Error, Result};

/// Kicked shear oscillator experiments driven by JSON configs.
#[derive(Parser)]
#[command(name = "kickshear", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write an SVG figure here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct LongRun {
    #[command(flatten)]
    common: Common,
    /// Use 4,000,000 steps per orbit.
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// One orbit of the planar map: kick, theta, y.
    Simulate(Common),
    /// Ensemble Lyapunov exponent at one parameter point.
    Lyapunov(LongRun),
    /// Ensemble Lyapunov exponents over a parameter grid.
    Sweep(LongRun),
    /// Images of the unforced cycle for several shear strengths.
    CycleImage(Common),
    /// Point cloud of the attractor.
    Attractor(Common),
    /// Graph-transform invariant curve, or the image where it folds.
    InvariantCurve(Common),
    /// Rotation numbers of the singular-limit circle map.
    Staircase(Common),
    /// Singular-limit versus planar exponents.
    SingularCompare(Common),
    /// Ensemble Lyapunov exponent of the n-dimensional model.
    Ndim(LongRun),
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(c) => simulate(&c),
        Command::Lyapunov(r) | Command::Sweep(r) => sweep(&r, None),
        Command::Ndim(r) => sweep(&r, Some(Model::Ndim)),
        Command::CycleImage(c) => cycle_image(&c),
        Command::Attractor(c) => attractor(&c),
        Command::InvariantCurve(c) => invariant_curve(&c),
        Command::Staircase(c) => staircase(&c),
        Command::SingularCompare(c) => singular_compare(&c),
    }
}

fn title(p: &ShearParams) -> String {
    format!("σ={} λ={} A={} τ={}", p.sigma(), p.lambda(), p.amplitude(), p.tau())
}

fn write_svg(path: &Option<PathBuf>, data: FigureData, title: String) -> Result<()> {
    if let Some(path) = path {
        let style = FigureStyle {
            title,
            ..FigureStyle::default()
        };
        write_atomic(path, emit_figure(&data, &style)?.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryRow {
    kick: u64,
    theta: f64,
    y: f64,
}

fn simulate(c: &Common) -> Result<()> {
    let mut cfg: SimulateConfig = load_json(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    let params = cfg.params.build()?;
    let mut p = match cfg.initial {
        Some(s) => CylinderPoint::new(s.theta, s.y),
        None => lyapunov::sample_trapping_band(&params, &mut prng_stream(cfg.seed, 0)).0,
    };
    let mut rows = Vec::with_capacity(cfg.n_kicks as usize + 1);
    rows.push(TrajectoryRow { kick: 0, theta: p.theta, y: p.y });
    for kick in 1..=cfg.n_kicks {
        p = shear::psi(p, &params);
        rows.push(TrajectoryRow { kick, theta: p.theta, y: p.y });
    }
    write_csv(&c.out, &rows)?;
    let cloud: Vec<(f64, f64)> = rows.iter().map(|r| (r.theta, r.y)).collect();
    let band = Some(shear::trapping_bound(&params));
    write_svg(&c.svg, FigureData::Attractor { points: cloud, band }, title(&params))
}

fn sweep(r: &LongRun, require: Option<Model>) -> Result<()> {
    let c = &r.common;
    let mut spec = SweepSpec::load(&c.config)?;
    if let Some(model) = require {
        if spec.model != model {
            return Err(Error::Config(format!(
                "{}: field `model`: this subcommand needs \"{}\"",
                c.config.display(),
                model.as_str()
            )));
        }
    }
    if let Some(s) = c.seed {
        spec.ensemble.seed = s;
    }
    if r.full {
        spec = spec.full_scale();
    }
    let out = run_sweep(&spec)?;
    write_csv(&c.out, &out.records)?;
    let summary_path = spec.summary_path(&c.out);
    write_csv(&summary_path, &out.summaries)?;
    for (s, t) in out.summaries.iter().zip(&out.wall_times) {
        eprintln!(
            "tau={} sigma={} A={}: trimmed mean {:.6} [{:.6}, {:.6}] {}{} ({:.2}s)",
            s.tau,
            s.sigma,
            s.amplitude,
            s.trimmed_mean,
            s.min_retained,
            s.max_retained,
            s.classification,
            if s.multi_behavior { ", multi-behavior" } else { "" },
            t.as_secs_f64()
        );
    }
    let svg = c.svg.clone().or_else(|| spec.output.figure.clone());
    let x = |s: &GridSummary| match spec.sweep.as_ref().map(|g| g.parameter) {
        Some(SweptParameter::Sigma) => s.sigma,
        Some(SweptParameter::Lambda) => s.lambda,
        Some(SweptParameter::Amplitude) => s.amplitude,
        _ => s.tau,
    };
    let series = |label: &str, f: fn(&GridSummary) -> f64, markers_only: bool| Series {
        label: label.into(),
        points: out.summaries.iter().map(|s| (x(s), f(s))).collect(),
        markers_only,
    };
    let data = FigureData::LyapunovVsTau(vec![
        series("trimmed mean", |s| s.trimmed_mean, false),
        series("min retained", |s| s.min_retained, true),
        series("max retained", |s| s.max_retained, true),
    ]);
    let first = &out.summaries[0];
    let caption = format!(
        "{} σ={} λ={} A={} seed={} n={}",
        first.model.as_str(),
        first.sigma,
        first.lambda,
        first.amplitude,
        spec.ensemble.seed,
        spec.ensemble.n_steps
    );
    write_svg(&svg, data, caption)
}

#[derive(Serialize)]
struct CycleRow {
    sigma: f64,
    s: f64,
    theta: f64,
    y: f64,
}

fn cycle_image(c: &Common) -> Result<()> {
    let cfg: CycleImageConfig = load_json(&c.config)?;
    let mut rows = Vec::new();
    let mut panels = Vec::new();
    for &sigma in &cfg.sigmas {
        let p = ShearParams::new(sigma, cfg.lambda, cfg.amplitude, cfg.tau)?;
        let curve = geometry::image_of_cycle(&p, cfg.n_kicks, cfg.resolution, &cfg.refine)?;
        let folds = geometry::fold_report(&curve);
        eprintln!("sigma={sigma}: {} points, {} turning points", curve.len(), folds.turning_points);
        rows.extend(curve.points.iter().map(|q| CycleRow { sigma, s: q.s, theta: q.theta, y: q.y }));
        panels.push(CurvePanel {
            label: format!("σ={sigma}"),
            points: curve.points.iter().map(|q| (q.theta, q.y)).collect(),
        });
    }
    write_csv(&c.out, &rows)?;
    let caption = format!("images of the cycle, λ={} A={} τ={}", cfg.lambda, cfg.amplitude, cfg.tau);
    write_svg(&c.svg, FigureData::CycleImage(panels), caption)
}

#[derive(Serialize)]
struct PointRow {
    theta: f64,
    y: f64,
}

fn attractor(c: &Common) -> Result<()> {
    let mut cfg: AttractorConfig = load_json(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    let params = cfg.params.build()?;
    let cloud = geometry::attractor_cloud(&params, cfg.n_points, cfg.burn_in, cfg.n_record, cfg.seed)?;
    let rows: Vec<PointRow> = cloud.points.iter().map(|p| PointRow { theta: p.theta, y: p.y }).collect();
    write_csv(&c.out, &rows)?;
    let band = shear::trapping_bound(&params);
    eprintln!("{} points, max |y| {:.6}, trapping bound {:.6}", rows.len(), cloud.y_extent(), band);
    let points = rows.iter().map(|r| (r.theta, r.y)).collect();
    write_svg(&c.svg, FigureData::Attractor { points, band: Some(band) }, title(&params))
}

fn invariant_curve(c: &Common) -> Result<()> {
    let cfg: InvariantCurveConfig = load_json(&c.config)?;
    let params = cfg.params.build()?;
    let (rows, label): (Vec<PointRow>, String) =
        match geometry::invariant_curve(&params, cfg.tol, cfg.max_iters, cfg.resolution)? {
            InvariantCurveOutcome::Converged(curve) => {
                eprintln!("converged after {} iterations (last change {:e})", curve.iterations, curve.last_change);
                let rows = curve
                    .grid()
                    .into_iter()
                    .zip(&curve.values)
                    .map(|(theta, &y)| PointRow { theta, y })
                    .collect();
                (rows, "invariant curve".into())
            }
            InvariantCurveOutcome::Breakdown { iteration, image } => {
                eprintln!("breakdown: the image folds at iteration {iteration}; writing that image");
                let rows = image.points.iter().map(|q| PointRow { theta: q.theta, y: q.y }).collect();
                (rows, format!("folded image, iteration {iteration}"))
            }
        };
    write_csv(&c.out, &rows)?;
    let panel = CurvePanel {
        label,
        points: rows.iter().map(|r| (r.theta, r.y)).collect(),
    };
    write_svg(&c.svg, FigureData::CycleImage(vec![panel]), title(&params))
}

fn staircase(c: &Common) -> Result<()> {
    let cfg: StaircaseConfig = load_json(&c.config)?;
    let rows = circle::staircase(cfg.b, &cfg.a_grid()?, cfg.n, cfg.tol)?;
    write_csv(&c.out, &rows)?;
    for p in circle::plateaus(&rows, cfg.tol).iter().filter(|p| p.width() > 0.0).take(12) {
        eprintln!("plateau rho={:.6} on a in [{:.6}, {:.6}]", p.translation, p.a_start, p.a_end);
    }
    let points = rows.iter().map(|r| (r.a, r.translation)).collect();
    write_svg(&c.svg, FigureData::Staircase(points), format!("B={} n={}", cfg.b, cfg.n))
}

fn singular_compare(c: &Common) -> Result<()> {
    let mut cfg: SingularCompareConfig = load_json(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    let mut rows = Vec::new();
    for &k in &cfg.k {
        for &a in &cfg.a {
            let p = ShearParams::new(cfg.sigma, cfg.lambda, cfg.amplitude, k as f64 + a)?;
            let b = CircleMapParams::from_shear(&p).b;
            let row = circle::compare_to_2d(&p, cfg.n_steps, cfg.n_orbits, cfg.seed, &cfg.lyapunov)?;
            eprintln!(
                "k={k} a={a} B={b:.4}: lambda_1d {:.6} lambda_2d {:.6} gap {:.6}",
                row.lambda_1d, row.lambda_2d, row.gap
            );
            rows.push(row);
        }
    }
    write_csv(&c.out, &rows)
}
