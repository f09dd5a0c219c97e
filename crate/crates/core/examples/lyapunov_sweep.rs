//! Ensemble Lyapunov exponents against the kick period, written as CSV and SVG.
//!
//! Run with `cargo run --release --example lyapunov_sweep -- [sigma] [out_dir]`.

use std::path::PathBuf;

use kickshear::harness::{
    csv_bytes, emit_figure, run_sweep, write_atomic, write_csv, EnsembleSettings, FigureData, FigureStyle,
    Series, ShearParamsConfig, SweepSpec,
};

fn main() -> kickshear::Result<()> {
    let mut args = std::env::args().skip(1);
    let sigma: f64 = args.next().map_or(0.5, |s| s.parse().expect("sigma must be a number"));
    let out_dir = args.next().map_or_else(std::env::temp_dir, PathBuf::from);

    let spec = SweepSpec::tau_sweep(
        ShearParamsConfig {
            sigma,
            lambda: 0.1,
            amplitude: 0.1,
            tau: 10.0,
        },
        5.0,
        15.0,
        0.25,
        EnsembleSettings {
            n_orbits: 10,
            n_steps: 20_000,
            seed: 2,
        },
    );
    let out = run_sweep(&spec)?;
    for s in &out.summaries {
        println!(
            "tau={:<6} mean={:+.5} retained=[{:+.5}, {:+.5}] {}{}",
            s.tau,
            s.trimmed_mean,
            s.min_retained,
            s.max_retained,
            s.classification,
            if s.multi_behavior { "  (multi-behavior)" } else { "" }
        );
    }

    let csv = out_dir.join("lyapunov_sweep.csv");
    write_csv(&csv, &out.records)?;
    let svg = out_dir.join("lyapunov_sweep.svg");
    let series = |label: &str, pick: fn(&kickshear::harness::GridSummary) -> f64, markers_only| Series {
        label: label.into(),
        points: out.summaries.iter().map(|s| (s.tau, pick(s))).collect(),
        markers_only,
    };
    let data = FigureData::LyapunovVsTau(vec![
        series("trimmed mean", |s| s.trimmed_mean, false),
        series("min retained", |s| s.min_retained, true),
        series("max retained", |s| s.max_retained, true),
    ]);
    let style = FigureStyle {
        title: format!("σ={sigma} λ=0.1 A=0.1, n=20000"),
        ..FigureStyle::default()
    };
    write_atomic(&svg, emit_figure(&data, &style)?.as_bytes())?;
    println!(
        "wrote {} ({} bytes) and {}",
        csv.display(),
        csv_bytes(&out.records)?.len(),
        svg.display()
    );
    Ok(())
}
