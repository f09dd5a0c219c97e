//! Hand-written SVG. Output depends only on the input values, so equal data
//! gives equal bytes.

use std::fmt::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    CycleImage,
    Staircase,
    Attractor,
    LyapunovVsTau,
}

/// A panel of the cycle-image figure: `(θ lift, y)` samples of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePanel {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers only, no connecting line.
    pub markers_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureData {
    /// Curves drawn with `θ` reduced mod 1 and broken at each wrap.
    CycleImage(Vec<CurvePanel>),
    /// `(a, ρ)` pairs; pass the unreduced translation number to avoid a jump at 1.
    Staircase(Vec<(f64, f64)>),
    /// `(θ, y)` cloud; `band` draws dashed lines at `y = ±band`.
    Attractor { points: Vec<(f64, f64)>, band: Option<f64> },
    LyapunovVsTau(Vec<Series>),
}

impl FigureData {
    pub fn kind(&self) -> FigureKind {
        match self {
            FigureData::CycleImage(_) => FigureKind::CycleImage,
            FigureData::Staircase(_) => FigureKind::Staircase,
            FigureData::Attractor { .. } => FigureKind::Attractor,
            FigureData::LyapunovVsTau(_) => FigureKind::LyapunovVsTau,
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            FigureData::CycleImage(p) => p.iter().all(|c| c.points.is_empty()),
            FigureData::Staircase(r) => r.is_empty(),
            FigureData::Attractor { points, .. } => points.is_empty(),
            FigureData::LyapunovVsTau(s) => s.iter().all(|c| c.points.is_empty()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureStyle {
    pub width: u32,
    pub height: u32,
    /// Shown above the plot; put the parameter values here.
    pub title: String,
}

impl Default for FigureStyle {
    fn default() -> Self {
        Self {
            width: 640,
            height: 440,
            title: String::new(),
        }
    }
}

const PALETTE: [&str; 6] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555"];

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Data range padded by 5%, never degenerate.
fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    let pad = if span > 0.0 { 0.05 * span } else { lo.abs().max(1.0) * 0.05 };
    (lo - pad, hi + pad)
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000" stroke-width="1"/>"##,
        num(f.x0),
        num(f.y0),
        num(f.w),
        num(f.h)
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.xr.0 + t * (f.xr.1 - f.xr.0);
        let yv = f.yr.0 + t * (f.yr.1 - f.yr.0);
        let (xp, yp) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>"##,
            num(xp),
            num(f.y0 + f.h + 13.0),
            num(xv)
        );
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"##,
            num(f.x0 - 4.0),
            num(yp + 3.0),
            num(yv)
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"##,
        num(f.x0 + f.w / 2.0),
        num(f.y0 + f.h + 28.0),
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"##,
        num(f.x0 - 40.0),
        num(f.y0 + f.h / 2.0),
        num(f.x0 - 40.0),
        num(f.y0 + f.h / 2.0),
        escape(y_label)
    );
}

fn polyline(out: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{},{}", num(f.px(x)), num(f.py(y))))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"##,
        coords.join(" ")
    );
}

fn dots(out: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str, r: f64) {
    for &(x, y) in pts {
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="{}" fill="{color}"/>"##,
            num(f.px(x)),
            num(f.py(y)),
            num(r)
        );
    }
}

fn hline(out: &mut String, f: &Frame, y: f64, class: &str, dashed: bool) {
    let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
    let _ = writeln!(
        out,
        r##"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-width="1"{dash}/>"##,
        num(f.x0),
        num(f.py(y)),
        num(f.x0 + f.w),
        num(f.py(y))
    );
}

/// Splits a lifted curve at each wrap of `θ mod 1`.
fn wrapped_runs(points: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let mut runs: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut last_turn = None;
    for &(theta, y) in points {
        let turn = theta.floor();
        if last_turn != Some(turn) {
            runs.push(Vec::new());
            last_turn = Some(turn);
        }
        runs.last_mut().expect("run started").push((theta - turn, y));
    }
    runs
}

/// Renders `data` as a self-contained SVG document.
pub fn emit_figure(data: &FigureData, style: &FigureStyle) -> Result<String> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let (w, h) = (style.width as f64, style.height as f64);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    let _ = writeln!(
        out,
        r##"<text x="{}" y="18" font-size="13" text-anchor="middle">{}</text>"##,
        num(w / 2.0),
        escape(&style.title)
    );
    let (left, top, right, bottom) = (56.0, 30.0, 12.0, 40.0);
    match data {
        FigureData::CycleImage(panels) => {
            let cols = (panels.len() as f64).sqrt().ceil() as usize;
            let rows = panels.len().div_ceil(cols);
            let cell_w = (w - 10.0) / cols as f64;
            let cell_h = (h - top) / rows as f64;
            for (i, panel) in panels.iter().enumerate() {
                let (c, r) = (i % cols, i / cols);
                let f = Frame {
                    x0: 10.0 + c as f64 * cell_w + left,
                    y0: top + r as f64 * cell_h + 18.0,
                    w: cell_w - left - right,
                    h: cell_h - 18.0 - bottom,
                    xr: (0.0, 1.0),
                    yr: padded(panel.points.iter().map(|p| p.1)),
                };
                let _ = writeln!(out, r#"<g class="panel">"#);
                let _ = writeln!(
                    out,
                    r##"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"##,
                    num(f.x0 + f.w / 2.0),
                    num(f.y0 - 5.0),
                    escape(&panel.label)
                );
                axes(&mut out, &f, "θ (mod 1)", "y");
                for run in wrapped_runs(&panel.points) {
                    polyline(&mut out, &f, &run, PALETTE[0]);
                }
                let _ = writeln!(out, "</g>");
            }
        }
        FigureData::Staircase(rows) => {
            let f = Frame {
                x0: left,
                y0: top,
                w: w - left - right,
                h: h - top - bottom,
                xr: padded(rows.iter().map(|p| p.0)),
                yr: padded(rows.iter().map(|p| p.1)),
            };
            axes(&mut out, &f, "a", "ρ");
            polyline(&mut out, &f, rows, PALETTE[0]);
        }
        FigureData::Attractor { points, band } => {
            let ys = points.iter().map(|p| p.1).chain(band.iter().flat_map(|&b| [b, -b]));
            let f = Frame {
                x0: left,
                y0: top,
                w: w - left - right,
                h: h - top - bottom,
                xr: (0.0, 1.0),
                yr: padded(ys),
            };
            axes(&mut out, &f, "θ", "y");
            if let Some(b) = band {
                hline(&mut out, &f, *b, "band", true);
                hline(&mut out, &f, -*b, "band", true);
            }
            dots(&mut out, &f, points, PALETTE[0], 0.8);
        }
        FigureData::LyapunovVsTau(series) => {
            let all = || series.iter().flat_map(|s| s.points.iter());
            let f = Frame {
                x0: left,
                y0: top,
                w: w - left - right,
                h: h - top - bottom,
                xr: padded(all().map(|p| p.0)),
                yr: padded(all().map(|p| p.1).chain([0.0])),
            };
            axes(&mut out, &f, "τ", "Λ_max");
            hline(&mut out, &f, 0.0, "zero", false);
            for (i, s) in series.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                if !s.markers_only {
                    polyline(&mut out, &f, &s.points, color);
                }
                dots(&mut out, &f, &s.points, color, 1.8);
                let _ = writeln!(
                    out,
                    r##"<text x="{}" y="{}" font-size="10" fill="{color}">{}</text>"##,
                    num(f.x0 + 6.0),
                    num(f.y0 + 12.0 + 12.0 * i as f64),
                    escape(&s.label)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
