//! Output collection and emission: snapshots, CSV files, minimal SVG plots.
//!
//! All artifacts are rendered into memory during the run and flushed only
//! after it succeeds, each through a write-then-rename so readers never see
//! a partially written file.

use anyhow::{Context, Result};
use mstrack::curve::Curve;
use mstrack::stepper::{SimulationSink, StepDiagnostics, StepRecord};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Collects interface snapshots at the requested times during a run.
pub struct SnapshotSink {
    targets: Vec<f64>,
    half_step: f64,
    next: usize,
    pub snapshots: Vec<(f64, Curve)>,
}

impl SnapshotSink {
    /// `times` must be sorted ascending; targets within half a step of t = 0
    /// are served by the initial curve immediately.
    pub fn new(initial: &Curve, times: &[f64], dt: f64) -> SnapshotSink {
        let mut sink = SnapshotSink {
            targets: times.to_vec(),
            half_step: 0.5 * dt * (1.0 + 1e-9),
            next: 0,
            snapshots: Vec::new(),
        };
        while sink.next < sink.targets.len() && sink.targets[sink.next] <= sink.half_step {
            sink.snapshots.push((sink.targets[sink.next], initial.clone()));
            sink.next += 1;
        }
        sink
    }
}

impl SimulationSink for SnapshotSink {
    fn on_step(&mut self, rec: &StepRecord) -> mstrack::Result<()> {
        let t = rec.diagnostics.t;
        // Each target is matched to the first step time at or past it minus
        // half a step, i.e. to the nearest point of the time grid.
        while self.next < self.targets.len() && self.targets[self.next] <= t + self.half_step {
            self.snapshots.push((self.targets[self.next], rec.new_curve.clone()));
            self.next += 1;
        }
        Ok(())
    }
}

/// Formats a snapshot time as a compact file-name fragment.
pub fn time_tag(t: f64) -> String {
    let mut s = format!("{t:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

/// Writes `bytes` to `path` through a sibling temp file and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("part");
    std::fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into place at {}", path.display()))?;
    Ok(())
}

/// Renders all prepared files under `dir`, creating it first.
pub fn flush(dir: &Path, files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    for (name, bytes) in files {
        write_atomic(&dir.join(name), bytes)?;
    }
    Ok(())
}

const SVG_SIZE: f64 = 600.0;
const CHART_W: f64 = 640.0;
const CHART_H: f64 = 420.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

/// Overlay of curve snapshots, earliest in blue shading to red at the end.
pub fn curves_svg(snapshots: &[(f64, Curve)]) -> String {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (_, curve) in snapshots {
        let (a, b) = curve.bounding_box();
        lo = (lo.0.min(a.x), lo.1.min(a.y));
        hi = (hi.0.max(b.x), hi.1.max(b.y));
    }
    if !lo.0.is_finite() {
        lo = (-1.0, -1.0);
        hi = (1.0, 1.0);
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-12);
    let pad = 0.06 * span;
    let cx = 0.5 * (lo.0 + hi.0);
    let cy = 0.5 * (lo.1 + hi.1);
    let half = 0.5 * span + pad;
    let scale = SVG_SIZE / (2.0 * half);
    let map = |x: f64, y: f64| ((x - cx + half) * scale, (cy + half - y) * scale);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" \
         viewBox=\"0 0 {SVG_SIZE} {SVG_SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let n = snapshots.len().max(1);
    for (i, (t, curve)) in snapshots.iter().enumerate() {
        let frac = if n > 1 { i as f64 / (n - 1) as f64 } else { 1.0 };
        let hue = 220.0 * (1.0 - frac);
        let _ = write!(svg, "<g stroke=\"hsl({hue:.0},70%,45%)\" fill=\"none\" stroke-width=\"1.2\">");
        let _ = write!(svg, "<title>t = {t:e}</title>");
        let pos = curve.positions();
        for range in curve.loops() {
            let mut d = String::new();
            for j in 0..range.count {
                let p = pos[range.first + j];
                let (x, y) = map(p.x, p.y);
                let _ = write!(d, "{}{x:.2} {y:.2} ", if j == 0 { "M" } else { "L" });
            }
            d.push('Z');
            let _ = write!(svg, "<path d=\"{d}\"/>");
        }
        svg.push_str("</g>\n");
    }
    let times: Vec<String> = snapshots.iter().map(|(t, _)| time_tag(*t)).collect();
    let _ = write!(
        svg,
        "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">t = {}</text>\n</svg>\n",
        times.join(", ")
    );
    svg
}

/// One named line of a chart.
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Minimal line chart: axes with four ticks per side and a legend.
pub fn line_chart_svg(title: &str, series: &[Series]) -> String {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            xr = (xr.0.min(x), xr.1.max(x));
            yr = (yr.0.min(y), yr.1.max(y));
        }
    }
    if !xr.0.is_finite() {
        xr = (0.0, 1.0);
        yr = (0.0, 1.0);
    }
    if xr.1 - xr.0 < 1e-300 {
        xr = (xr.0 - 0.5, xr.1 + 0.5);
    }
    let ypad = (yr.1 - yr.0).max(1e-3 * yr.1.abs().max(yr.0.abs())).max(1e-300) * 0.05;
    yr = (yr.0 - ypad, yr.1 + ypad);

    let plot_w = CHART_W - MARGIN_L - MARGIN_R;
    let plot_h = CHART_H - MARGIN_T - MARGIN_B;
    let mx = |x: f64| MARGIN_L + (x - xr.0) / (xr.1 - xr.0) * plot_w;
    let my = |y: f64| MARGIN_T + (yr.1 - y) / (yr.1 - yr.0) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{CHART_H}\" \
         viewBox=\"0 0 {CHART_W} {CHART_H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{MARGIN_L}\" y=\"22\" font-size=\"14\">{title}</text>\n"
    );
    let _ = write!(
        svg,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#444\"/>\n"
    );
    for i in 0..4 {
        let f = i as f64 / 3.0;
        let xv = xr.0 + f * (xr.1 - xr.0);
        let yv = yr.0 + f * (yr.1 - yr.0);
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{xv:.3e}</text>\n",
            mx(xv),
            CHART_H - MARGIN_B + 18.0
        );
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{yv:.3e}</text>\n",
            MARGIN_L - 6.0,
            my(yv) + 4.0
        );
        let _ = write!(
            svg,
            "<line x1=\"{MARGIN_L}\" y1=\"{0:.1}\" x2=\"{1:.1}\" y2=\"{0:.1}\" stroke=\"#ddd\"/>\n",
            my(yv),
            CHART_W - MARGIN_R
        );
    }
    for (i, s) in series.iter().enumerate() {
        let mut d = String::new();
        for (j, &(x, y)) in s.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if j == 0 { "M" } else { "L" }, mx(x), my(y));
        }
        let _ = write!(
            svg,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.4\"/>\n",
            s.color
        );
        let ly = MARGIN_T + 16.0 * i as f64 + 12.0;
        let lx = CHART_W - MARGIN_R - 150.0;
        let _ = write!(
            svg,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"2\"/>\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            lx + 24.0,
            s.color,
            lx + 30.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Energy-history chart; includes the weighted energy when it differs.
pub fn energy_chart(steps: &[StepDiagnostics], weighted: bool) -> String {
    let mut series = vec![Series {
        label: "interface length",
        color: "#1f4e9c",
        points: steps.iter().map(|s| (s.t, s.energy)).collect(),
    }];
    if weighted {
        series.push(Series {
            label: "weighted energy",
            color: "#b03030",
            points: steps.iter().map(|s| (s.t, s.energy_aniso)).collect(),
        });
    }
    line_chart_svg("Interface energy", &series)
}

/// Relative-volume-error history chart.
pub fn volume_chart(steps: &[StepDiagnostics]) -> String {
    line_chart_svg(
        "Relative volume error",
        &[Series {
            label: "(vol - vol0) / vol0",
            color: "#1f4e9c",
            points: steps.iter().map(|s| (s.t, s.v_rel)).collect(),
        }],
    )
}
