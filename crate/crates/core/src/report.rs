//! Trace CSV, run summaries and self-contained SVG plots.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algorithms::{IterationTrace, RunResult, RunStatus};
use crate::error::Result;

pub const TRACE_HEADER: [&str; 8] = [
    "iter",
    "p",
    "d",
    "gap",
    "memory_size",
    "active_size",
    "inner_iterations",
    "cum_time_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub p: f64,
    pub d: f64,
    pub gap: f64,
    pub memory_size: usize,
    pub active_size: usize,
    pub inner_iterations: usize,
    pub cum_time_ms: f64,
}

pub fn trace_rows(trace: &IterationTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            iter: r.iter,
            p: r.p,
            d: r.d,
            gap: r.gap,
            memory_size: r.memory_size,
            active_size: r.active_size,
            inner_iterations: r.inner_iterations,
            cum_time_ms: r.cum_time_ms,
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(out: W, trace: &IterationTrace) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in trace_rows(trace) {
        writer.serialize(row)?;
    }
    if trace.is_empty() {
        writer.write_record(TRACE_HEADER)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub status: String,
    pub final_p: f64,
    pub final_d: f64,
    pub final_gap: f64,
    /// `g(x) + f(x)` at the last iterate.
    pub primal_value: f64,
    /// Certified lower bound at the last iterate.
    pub dual_value: f64,
    pub iterations: usize,
    pub total_ms: f64,
    pub max_memory: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

pub fn status_name(status: RunStatus) -> &'static str {
    match status {
        RunStatus::Converged => "converged",
        RunStatus::IterationCap => "iteration_cap",
        RunStatus::InnerSolverFailure => "inner_solver_failure",
    }
}

pub fn summarize(result: &RunResult) -> RunSummary {
    let last = result.trace.last();
    let pick = |f: fn(&crate::algorithms::IterationRecord) -> f64| last.map_or(f64::NAN, f);
    RunSummary {
        algorithm: result.algorithm.name().to_string(),
        status: status_name(result.status).to_string(),
        final_p: pick(|r| r.p),
        final_d: pick(|r| r.d),
        final_gap: pick(|r| r.gap),
        primal_value: pick(|r| r.primal_value),
        dual_value: pick(|r| r.dual_value),
        iterations: result.iterations(),
        total_ms: pick(|r| r.cum_time_ms),
        max_memory: result
            .trace
            .records
            .iter()
            .map(|r| r.memory_size)
            .max()
            .unwrap_or(0),
        failure: result.failure.clone(),
    }
}

/// One curve of a plot.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Draw as a staircase instead of straight segments.
    pub step: bool,
}

/// One set of axes.
#[derive(Clone, Debug)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];
const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 320.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 36.0, 48.0); // left, right, top, bottom

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64) {
    let (ml, mr, mt, mb) = MARGIN;
    let (x0, x1) = (ml, WIDTH - mr);
    let (y0, y1) = (top + PANEL_HEIGHT - mb, top + mt);
    let transform = |y: f64| if panel.log_y { y.log10() } else { y };
    let pts: Vec<(f64, f64)> = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .map(|(x, y)| (x, transform(y)))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut xlo, mut xhi, mut ylo, mut yhi) = pts.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (xlo, xhi, ylo, yhi) = (0.0, 1.0, 0.0, 1.0);
    }
    if xhi <= xlo {
        xhi = xlo + 1.0;
    }
    if yhi <= ylo {
        ylo -= 0.5;
        yhi += 0.5;
    }
    let sx = |x: f64| x0 + (x - xlo) / (xhi - xlo) * (x1 - x0);
    let sy = |y: f64| y0 - (y - ylo) / (yhi - ylo) * (y0 - y1);

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        top + 22.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y0 - y1
    );
    for t in nice_ticks(xlo, xhi, 6) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"##,
            y0 + 4.0,
            y0 + 16.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(ylo, yhi, 5) {
        let y = sy(t);
        let label = if panel.log_y {
            format!("1e{}", fmt_tick(t))
        } else {
            fmt_tick(t)
        };
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="#444"/><line x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{label}</text>"##,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
        (x0 + x1) / 2.0,
        y0 + 34.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&panel.y_label)
    );
    for (k, series) in panel.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut path = String::new();
        let mut prev: Option<(f64, f64)> = None;
        for &(x, y) in &series.points {
            let y = transform(y);
            if !(x.is_finite() && y.is_finite()) {
                prev = None;
                continue;
            }
            let (px, py) = (sx(x), sy(y));
            match prev {
                None => {
                    let _ = write!(path, "M{px:.2},{py:.2}");
                }
                Some((_, qy)) if series.step => {
                    let _ = write!(path, " L{px:.2},{qy:.2} L{px:.2},{py:.2}");
                }
                Some(_) => {
                    let _ = write!(path, " L{px:.2},{py:.2}");
                }
            }
            prev = Some((px, py));
        }
        let _ = writeln!(
            svg,
            r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let ly = y1 + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            x1 - 110.0,
            x1 - 90.0,
            x1 - 85.0,
            ly + 4.0,
            escape(&series.name)
        );
    }
}

/// Renders stacked panels as a standalone SVG document.
pub fn render_svg(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
"#
    );
    for (k, panel) in panels.iter().enumerate() {
        render_panel(&mut svg, panel, k as f64 * PANEL_HEIGHT);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Positive gaps only; zero gaps have no logarithm.
fn gap_points(trace: &IterationTrace) -> Vec<(f64, f64)> {
    trace
        .records
        .iter()
        .filter(|r| r.gap > 0.0)
        .map(|r| (r.iter as f64, r.gap))
        .collect()
}

pub fn gap_panel(runs: &[(&str, &IterationTrace)]) -> Panel {
    Panel {
        title: "Duality gap".into(),
        x_label: "iteration".into(),
        y_label: "gap (log10)".into(),
        log_y: true,
        series: runs
            .iter()
            .map(|(name, t)| Series {
                name: name.to_string(),
                points: gap_points(t),
                step: false,
            })
            .collect(),
    }
}

pub fn memory_panel(runs: &[(&str, &IterationTrace)]) -> Panel {
    Panel {
        title: "Memory".into(),
        x_label: "iteration".into(),
        y_label: "vertices kept".into(),
        log_y: false,
        series: runs
            .iter()
            .map(|(name, t)| Series {
                name: name.to_string(),
                points: t
                    .records
                    .iter()
                    .map(|r| (r.iter as f64, r.memory_size as f64))
                    .collect(),
                step: true,
            })
            .collect(),
    }
}

pub fn time_panel(runs: &[(&str, &IterationTrace)]) -> Panel {
    Panel {
        title: "Cumulative time".into(),
        x_label: "iteration".into(),
        y_label: "ms".into(),
        log_y: false,
        series: runs
            .iter()
            .map(|(name, t)| Series {
                name: name.to_string(),
                points: t
                    .records
                    .iter()
                    .map(|r| (r.iter as f64, r.cum_time_ms))
                    .collect(),
                step: false,
            })
            .collect(),
    }
}
