//! Self-contained SVG renderings of a graduation run.
//!
//! Every chart records its data window on the `plot-area` rectangle
//! (`data-xmin`, `data-xmax`, `data-ymin`, `data-ymax`, and `data-yscale`,
//! where log-scale limits are base-10 exponents), so that marks can be mapped
//! back to data coordinates.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use gradkit::{GraduationResult, MortalityTable};

use crate::format::g6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum PlotKind {
    Observed,
    Fitted,
    Obsfit,
    Histres,
    Histpropres,
    Exposed,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Observed => "observed",
            PlotKind::Fitted => "fitted",
            PlotKind::Obsfit => "obsfit",
            PlotKind::Histres => "histres",
            PlotKind::Histpropres => "histpropres",
            PlotKind::Exposed => "exposed",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.svg", self.name())
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 40.0;
const PLOT_W: f64 = 540.0;
const PLOT_H: f64 = 330.0;

const RATE_LABEL: &str = "mortality rate (log scale)";

#[derive(Debug, Clone, Copy)]
enum Scale {
    Linear,
    Log10,
}

/// Maps data to pixel coordinates; `y` limits are exponents on a log scale.
#[derive(Debug, Clone, Copy)]
struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    yscale: Scale,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.xmin) / (self.xmax - self.xmin) * PLOT_W
    }

    fn py(&self, y: f64) -> f64 {
        let t = match self.yscale {
            Scale::Linear => y,
            Scale::Log10 => y.log10(),
        };
        TOP + (self.ymax - t) / (self.ymax - self.ymin) * PLOT_H
    }

    fn bottom(&self) -> f64 {
        TOP + PLOT_H
    }
}

fn padded(lo: f64, hi: f64, pad: f64) -> (f64, f64) {
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        let d = (hi - lo) * pad;
        (lo - d, hi + d)
    }
}

fn age_frame(omega: usize, ymin: f64, ymax: f64, yscale: Scale) -> Frame {
    Frame {
        xmin: -0.5,
        xmax: omega as f64 + 0.5,
        ymin,
        ymax,
        yscale,
    }
}

fn log_frame(omega: usize, values: impl Iterator<Item = f64>) -> Result<Frame> {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .map(f64::log10)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        bail!("no positive rates to show on a logarithmic axis");
    }
    let (lo, hi) = padded(lo, hi, 0.04);
    Ok(age_frame(omega, lo, hi, Scale::Log10))
}

/// Tick positions at multiples of 1, 2 or 5 times a power of ten.
fn linear_ticks(lo: f64, hi: f64, target: f64) -> Vec<f64> {
    let raw = (hi - lo) / target;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str, frame: &Frame, xlabel: &str, ylabel: &str) -> Self {
        let mut body = String::new();
        let scale = match frame.yscale {
            Scale::Linear => "linear",
            Scale::Log10 => "log10",
        };
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>"#,
            LEFT + PLOT_W / 2.0
        );
        let _ = writeln!(
            body,
            r#"<rect class="plot-area" x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="black" data-xmin="{}" data-xmax="{}" data-ymin="{}" data-ymax="{}" data-yscale="{scale}"/>"#,
            frame.xmin, frame.xmax, frame.ymin, frame.ymax
        );
        let _ = writeln!(
            body,
            r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
            LEFT + PLOT_W / 2.0,
            TOP + PLOT_H + 42.0
        );
        let _ = writeln!(
            body,
            r#"<text class="ylabel" transform="translate(20 {}) rotate(-90)" text-anchor="middle">{ylabel}</text>"#,
            TOP + PLOT_H / 2.0
        );
        Svg { body }
    }

    fn x_ticks(&mut self, frame: &Frame, ticks: &[f64]) {
        for &t in ticks {
            let x = frame.px(t);
            let b = frame.bottom();
            let _ = writeln!(
                self.body,
                r#"<line x1="{x:.3}" y1="{b}" x2="{x:.3}" y2="{}" stroke="black"/><text x="{x:.3}" y="{}" text-anchor="middle">{}</text>"#,
                b + 5.0,
                b + 18.0,
                g6(t)
            );
        }
    }

    fn y_ticks(&mut self, frame: &Frame) {
        let ticks: Vec<(f64, String)> = match frame.yscale {
            Scale::Linear => linear_ticks(frame.ymin, frame.ymax, 5.0)
                .into_iter()
                .map(|t| (t, g6(t)))
                .collect(),
            Scale::Log10 => {
                let decades: Vec<f64> = (frame.ymin.ceil() as i64..=frame.ymax.floor() as i64)
                    .map(|k| k as f64)
                    .collect();
                let exps = if decades.is_empty() {
                    linear_ticks(frame.ymin, frame.ymax, 3.0)
                } else {
                    decades
                };
                exps.into_iter()
                    .map(|e| (10f64.powf(e), g6(10f64.powf(e))))
                    .collect()
            }
        };
        for (v, label) in ticks {
            let y = frame.py(v);
            let _ = writeln!(
                self.body,
                r#"<line x1="{}" y1="{y:.3}" x2="{LEFT}" y2="{y:.3}" stroke="black"/><text x="{}" y="{:.3}" text-anchor="end">{label}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn age_ticks(omega: usize) -> Vec<f64> {
    if omega == 0 {
        return vec![0.0];
    }
    linear_ticks(0.0, omega as f64, 8.0)
        .into_iter()
        .map(f64::round)
        .collect()
}

fn need_result(kind: PlotKind, result: Option<&GraduationResult>) -> Result<&GraduationResult> {
    result.ok_or_else(|| anyhow!("the {} plot needs a graduation result", kind.name()))
}

fn points(svg: &mut Svg, frame: &Frame, rates: &[f64]) {
    for (age, &q) in rates.iter().enumerate() {
        if q > 0.0 {
            let _ = writeln!(
                svg.body,
                r#"<circle class="observed" data-age="{age}" cx="{:.3}" cy="{:.3}" r="2.5" fill="none" stroke="black"/>"#,
                frame.px(age as f64),
                frame.py(q)
            );
        }
    }
}

fn line(svg: &mut Svg, frame: &Frame, rates: &[f64]) {
    let pts: Vec<String> = rates
        .iter()
        .enumerate()
        .filter(|(_, q)| **q > 0.0)
        .map(|(age, &q)| format!("{:.3},{:.3}", frame.px(age as f64), frame.py(q)))
        .collect();
    let _ = writeln!(
        svg.body,
        r#"<polyline class="fitted" points="{}" fill="none" stroke="firebrick" stroke-width="1.5"/>"#,
        pts.join(" ")
    );
}

fn band(svg: &mut Svg, frame: &Frame, lower: &[f64], upper: &[f64]) {
    for (age, (&lo, &hi)) in lower.iter().zip(upper).enumerate() {
        if hi <= 0.0 {
            continue;
        }
        let x = frame.px(age as f64);
        let (y1, clipped) = if lo > 0.0 {
            (frame.py(lo), "")
        } else {
            (frame.bottom(), r#" data-clipped="true""#)
        };
        let _ = writeln!(
            svg.body,
            r#"<line class="ci" data-age="{age}"{clipped} x1="{x:.3}" y1="{y1:.3}" x2="{x:.3}" y2="{:.3}" stroke="steelblue" stroke-width="3" stroke-opacity="0.5"/>"#,
            frame.py(hi)
        );
    }
}

fn rate_plot(kind: PlotKind, table: &MortalityTable, result: Option<&GraduationResult>) -> Result<String> {
    let omega = table.omega();
    let observed = table.crude_rates();
    let (title, show_obs, fitted, bounds) = match kind {
        PlotKind::Observed => ("Observed rates", true, None, None),
        PlotKind::Fitted => ("Fitted rates", false, Some(need_result(kind, result)?), None),
        _ => {
            let r = need_result(kind, result)?;
            let bounds = r.lower.as_deref().zip(r.upper.as_deref());
            ("Observed and fitted rates", true, Some(r), bounds)
        }
    };
    if let Some(r) = fitted {
        if r.fitted.len() != table.len() {
            bail!(
                "result covers {} ages but the table has {}",
                r.fitted.len(),
                table.len()
            );
        }
    }
    let mut all: Vec<f64> = Vec::new();
    if show_obs {
        all.extend_from_slice(observed);
    }
    if let Some(r) = fitted {
        all.extend_from_slice(&r.fitted);
    }
    if let Some((lo, hi)) = bounds {
        all.extend_from_slice(lo);
        all.extend_from_slice(hi);
    }
    let frame = log_frame(omega, all.into_iter())?;
    let mut svg = Svg::new(title, &frame, "age", RATE_LABEL);
    svg.x_ticks(&frame, &age_ticks(omega));
    svg.y_ticks(&frame);
    if let Some((lo, hi)) = bounds {
        band(&mut svg, &frame, lo, hi);
    }
    if show_obs {
        points(&mut svg, &frame, observed);
    }
    if let Some(r) = fitted {
        line(&mut svg, &frame, &r.fitted);
    }
    Ok(svg.finish())
}

/// Sturges' rule: `ceil(log2 n) + 1` equal-width bins spanning the data.
fn sturges_bins(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = values.len();
    let k = (n as f64).log2().ceil() as usize + 1;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { padded(lo, hi, 0.0) };
    let width = (hi - lo) / k as f64;
    let edges = (0..=k)
        .map(|i| if i == k { hi } else { lo + i as f64 * width })
        .collect();
    let mut counts = vec![0; k];
    for &v in values {
        let i = (((v - lo) / width).floor() as usize).min(k - 1);
        counts[i] += 1;
    }
    (edges, counts)
}

fn histogram(kind: PlotKind, result: Option<&GraduationResult>) -> Result<String> {
    let r = need_result(kind, result)?;
    let (title, raw) = if kind == PlotKind::Histres {
        ("Histogram of residuals", &r.residuals)
    } else {
        ("Histogram of proportional residuals", &r.prop_residuals)
    };
    let values: Vec<f64> = raw.iter().copied().filter(|v| v.is_finite()).collect();
    if values.is_empty() {
        bail!("no finite residuals to bin");
    }
    let (edges, counts) = sturges_bins(&values);
    let top = *counts.iter().max().unwrap() as f64;
    let frame = Frame {
        xmin: edges[0],
        xmax: *edges.last().unwrap(),
        ymin: 0.0,
        ymax: top * 1.05,
        yscale: Scale::Linear,
    };
    let mut svg = Svg::new(title, &frame, "residual", "frequency");
    svg.x_ticks(&frame, &edges);
    svg.y_ticks(&frame);
    for (i, &c) in counts.iter().enumerate() {
        let (x0, x1) = (frame.px(edges[i]), frame.px(edges[i + 1]));
        let y = frame.py(c as f64);
        let _ = writeln!(
            svg.body,
            r#"<rect class="bar" data-lo="{:e}" data-hi="{:e}" data-count="{c}" x="{x0:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="lightgray" stroke="black"/>"#,
            edges[i],
            edges[i + 1],
            x1 - x0,
            frame.bottom() - y
        );
    }
    Ok(svg.finish())
}

fn exposure_bars(table: &MortalityTable) -> Result<String> {
    let e = table.require_exposures("the exposed plot")?;
    let top = e.iter().copied().fold(0.0, f64::max);
    let frame = age_frame(table.omega(), 0.0, top * 1.05, Scale::Linear);
    let mut svg = Svg::new("Exposed to risk", &frame, "age", "exposed");
    svg.x_ticks(&frame, &age_ticks(table.omega()));
    svg.y_ticks(&frame);
    for (age, &v) in e.iter().enumerate() {
        let x = frame.px(age as f64 - 0.4);
        let w = frame.px(age as f64 + 0.4) - x;
        let y = frame.py(v);
        let _ = writeln!(
            svg.body,
            r#"<rect class="bar" data-age="{age}" data-value="{v}" x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{:.3}" fill="gray"/>"#,
            frame.bottom() - y
        );
    }
    Ok(svg.finish())
}

/// Renders one chart as SVG text.
///
/// `observed` and `exposed` need only the table. The obsfit chart draws the
/// pointwise band whenever the result carries bounds.
pub fn plot_svg(kind: PlotKind, table: &MortalityTable, result: Option<&GraduationResult>) -> Result<String> {
    match kind {
        PlotKind::Observed | PlotKind::Fitted | PlotKind::Obsfit => rate_plot(kind, table, result),
        PlotKind::Histres | PlotKind::Histpropres => histogram(kind, result),
        PlotKind::Exposed => Ok(exposure_bars(table)?),
    }
}

pub fn render_plot(
    kind: PlotKind,
    table: &MortalityTable,
    result: Option<&GraduationResult>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let svg = plot_svg(kind, table, result)?;
    fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))
}
