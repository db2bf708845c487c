//! Plain SVG figures. Every data marker carries `data-x`/`data-y` attributes
//! holding the exact exported values.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::measures::BasisLabel;

use super::sweep::{Measure, SweepResult};
use super::udist::UDistribution;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }

    fn draw_axes(&self, svg: &mut String, xlabel: &str, ylabel: &str, font: f64) {
        let (l, t, w, h) = (self.left, self.top, self.width, self.height);
        let _ = writeln!(
            svg,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{w:.2}" height="{h:.2}" fill="white" stroke="black"/>"##
        );
        for v in ticks(self.x.0, self.x.1) {
            let x = self.px(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-size="{font}" text-anchor="middle">{}</text>"##,
                t + h,
                t + h - 5.0,
                t + h + font + 3.0,
                tick_label(v)
            );
        }
        for v in ticks(self.y.0, self.y.1) {
            let y = self.py(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{l:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="{font}" text-anchor="end">{}</text>"##,
                l + 5.0,
                l - 4.0,
                y + font / 3.0,
                tick_label(v)
            );
        }
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="{}" text-anchor="middle">{}</text>"##,
            l + w / 2.0,
            t + h + 2.4 * font + 4.0,
            font + 2.0,
            escape(xlabel)
        );
        let (cx, cy) = (l - 3.2 * font, t + h / 2.0);
        let _ = writeln!(
            svg,
            r##"<text x="{cx:.2}" y="{cy:.2}" font-size="{}" text-anchor="middle" transform="rotate(-90 {cx:.2} {cy:.2})">{}</text>"##,
            font + 2.0,
            escape(ylabel)
        );
    }

    fn line(&self, svg: &mut String, xs: &[f64], ys: &[f64], color: &str, dashed: bool) {
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| y.is_finite() && self.contains(**x, **y))
            .map(|(&x, &y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        if pts.len() < 2 {
            return;
        }
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline class="theory" fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            pts.join(" ")
        );
    }

    /// A marker with a vertical error bar.
    fn marker(&self, svg: &mut String, series: &str, x: f64, y: f64, err: f64, color: &str) {
        if !self.contains(x, y) {
            return;
        }
        let (px, py) = (self.px(x), self.py(y));
        let lo = self.py((y - err).max(self.y.0));
        let hi = self.py((y + err).min(self.y.1));
        let _ = writeln!(
            svg,
            r#"<g class="point" data-series="{}" data-x="{x}" data-y="{y}" data-stderr="{err}"><line x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}" stroke="{color}"/><circle cx="{px:.2}" cy="{py:.2}" r="3.5" fill="none" stroke="{color}" stroke-width="1.4"/></g>"#,
            escape(series)
        );
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">
<title>{}</title>
<rect width="100%" height="100%" fill="white"/>"#,
        escape(title)
    );
    svg
}

fn legend(svg: &mut String, x: f64, y: f64, entries: &[(String, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let yy = y + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{yy:.2}" r="3.5" fill="none" stroke="{color}" stroke-width="1.4"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            x + 10.0,
            yy + 4.0,
            escape(label)
        );
    }
}

fn upper(values: impl Iterator<Item = f64>) -> f64 {
    let m = values.filter(|v| v.is_finite()).fold(0.0, f64::max);
    if m > 0.0 {
        m * 1.08
    } else {
        1.0
    }
}

fn x_extent(result: &SweepResult) -> f64 {
    let m = result.points.iter().map(|p| p.sqrt_lambda).fold(0.0, f64::max);
    if m > 0.0 {
        m * 1.02
    } else {
        1.0
    }
}

fn entropy_label(k: u32) -> String {
    if k == 1 {
        "S₁ (von Neumann)".into()
    } else {
        format!("S{k}")
    }
}

/// Mean entropies against `√Λ` with the closed-form transition lines and a
/// magnified small-`Λ` inset.
pub fn entropy_figure(result: &SweepResult) -> String {
    let k_set = &result.config().k_set;
    let mut svg = header("Eigenstate entropies");
    let series: Vec<(Measure, &str)> = k_set
        .iter()
        .enumerate()
        .map(|(i, &k)| (Measure::Entropy(k), PALETTE[i % PALETTE.len()]))
        .collect();
    let y_top = upper(
        result
            .points
            .iter()
            .flat_map(|p| series.iter().filter_map(|(m, _)| p.stat(*m).map(|s| s.mean + s.stderr)))
            .chain(
                result
                    .theory_curves
                    .iter()
                    .filter(|c| matches!(c.measure, Measure::Entropy(_)))
                    .flat_map(|c| c.values.iter().copied()),
            ),
    );
    let x_max = x_extent(result);
    let main = Frame {
        left: 80.0,
        top: 30.0,
        width: WIDTH - 110.0,
        height: HEIGHT - 100.0,
        x: (0.0, x_max),
        y: (0.0, y_top),
    };
    main.draw_axes(&mut svg, "√Λ", "⟨S_k⟩", 12.0);
    draw_entropy_series(&mut svg, &main, result, &series);

    // Inset: the region √Λ ≤ x_in.
    let x_in = (0.1f64).min(x_max);
    let in_top = upper(result.points.iter().filter(|p| p.sqrt_lambda <= x_in).flat_map(|p| {
        series
            .iter()
            .filter_map(move |(m, _)| p.stat(*m).map(|s| s.mean + s.stderr))
    }));
    let inset = Frame {
        left: main.left + 0.52 * main.width,
        top: main.top + 0.42 * main.height,
        width: 0.44 * main.width,
        height: 0.48 * main.height,
        x: (0.0, x_in),
        y: (0.0, in_top),
    };
    svg.push_str(r#"<g class="inset">"#);
    inset.draw_axes(&mut svg, "", "", 10.0);
    draw_entropy_series(&mut svg, &inset, result, &series);
    svg.push_str("</g>\n");

    let entries: Vec<(String, &str)> = k_set
        .iter()
        .zip(&series)
        .map(|(&k, (_, c))| (entropy_label(k), *c))
        .collect();
    legend(&mut svg, main.left + 20.0, main.top + 20.0, &entries);
    svg.push_str("</svg>\n");
    svg
}

fn draw_entropy_series(svg: &mut String, frame: &Frame, result: &SweepResult, series: &[(Measure, &str)]) {
    for (m, color) in series {
        if let Some(c) = result.theory_curves.iter().find(|c| c.measure == *m) {
            frame.line(svg, &c.sqrt_lambda, &c.values, color, false);
        }
        for p in &result.points {
            if let Some(s) = p.stat(*m) {
                frame.marker(svg, &m.to_string(), p.sqrt_lambda, s.mean, s.stderr, color);
            }
        }
    }
}

/// Rescaled IPR per basis and `1 + <P₂>` against `√Λ`, with the ratio in an
/// inset.
pub fn ipr_figure(result: &SweepResult) -> String {
    let bases = &result.config().bases;
    let mut svg = header("Rescaled inverse participation ratio");
    let mut series: Vec<(Measure, &str, String)> = vec![(Measure::PurityTerm, "black", "1 + ⟨P₂⟩".into())];
    for (i, &b) in bases.iter().enumerate() {
        series.push((Measure::RescaledIpr(b), PALETTE[i % PALETTE.len()], format!("Ĩ, {b}")));
    }
    let y_top = upper(result.points.iter().flat_map(|p| {
        series
            .iter()
            .filter_map(|(m, _, _)| p.stat(*m).map(|s| s.mean + s.stderr))
    }));
    let main = Frame {
        left: 80.0,
        top: 30.0,
        width: WIDTH - 110.0,
        height: HEIGHT - 100.0,
        x: (0.0, x_extent(result)),
        y: (0.0, y_top),
    };
    main.draw_axes(&mut svg, "√Λ", "rescaled IPR", 12.0);
    if let Some(c) = result.theory_curves.iter().find(|c| c.measure == Measure::PurityTerm) {
        main.line(&mut svg, &c.sqrt_lambda, &c.values, "black", true);
    }
    for (m, color, _) in &series {
        for p in &result.points {
            if let Some(s) = p.stat(*m) {
                main.marker(&mut svg, &m.to_string(), p.sqrt_lambda, s.mean, s.stderr, color);
            }
        }
    }

    let ratios: Vec<(BasisLabel, &str)> = bases
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, PALETTE[i % PALETTE.len()]))
        .collect();
    let spread = result
        .points
        .iter()
        .flat_map(|p| ratios.iter().filter_map(|(b, _)| p.stat(Measure::IprRatio(*b))))
        .map(|s| (s.mean - 1.0).abs() + s.stderr)
        .filter(|v| v.is_finite())
        .fold(0.01, f64::max)
        * 1.15;
    let inset = Frame {
        left: main.left + 0.50 * main.width,
        top: main.top + 0.06 * main.height,
        width: 0.46 * main.width,
        height: 0.40 * main.height,
        x: main.x,
        y: (1.0 - spread, 1.0 + spread),
    };
    svg.push_str(r#"<g class="inset">"#);
    inset.draw_axes(&mut svg, "", "r", 10.0);
    inset.line(&mut svg, &[inset.x.0, inset.x.1], &[1.0, 1.0], "gray", true);
    for (b, color) in &ratios {
        let m = Measure::IprRatio(*b);
        for p in &result.points {
            if let Some(s) = p.stat(m) {
                inset.marker(&mut svg, &m.to_string(), p.sqrt_lambda, s.mean, s.stderr, color);
            }
        }
    }
    svg.push_str("</g>\n");
    let entries: Vec<(String, &str)> = series.iter().map(|(_, c, l)| (l.clone(), *c)).collect();
    legend(
        &mut svg,
        main.left + 20.0,
        main.top + main.height - 20.0 - 18.0 * entries.len() as f64,
        &entries,
    );
    svg.push_str("</svg>\n");
    svg
}

/// Histogram of `u` with the universal density.
pub fn u_figure(dist: &UDistribution) -> String {
    let mut svg = header("Distribution of u");
    let y_top = upper(dist.density.iter().chain(&dist.curve_density).copied());
    let frame = Frame {
        left: 80.0,
        top: 30.0,
        width: WIDTH - 110.0,
        height: HEIGHT - 100.0,
        x: (0.0, *dist.edges.last().unwrap_or(&1.0)),
        y: (0.0, y_top),
    };
    frame.draw_axes(&mut svg, "u = √(Λ/λ₂)", "density", 12.0);
    for (i, &d) in dist.density.iter().enumerate() {
        let (x0, x1) = (dist.edges[i], dist.edges[i + 1]);
        let _ = writeln!(
            svg,
            r##"<rect class="bar" data-x="{x0}" data-y="{d}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#2ca02c" fill-opacity="0.45" stroke="#2ca02c"/>"##,
            frame.px(x0),
            frame.py(d),
            frame.px(x1) - frame.px(x0),
            frame.py(0.0) - frame.py(d)
        );
    }
    frame.line(&mut svg, &dist.curve_u, &dist.curve_density, "black", false);
    let label = format!(
        "{} samples, Λ ∈ {{{}}}",
        dist.samples(),
        dist.lambdas
            .iter()
            .map(|l| format!("{l:e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
        frame.left + frame.width - 10.0,
        frame.top + 20.0,
        escape(&label)
    );
    svg.push_str("</svg>\n");
    svg
}

/// Writes `entropies.svg`, `ipr.svg` and, when given, `u_distribution.svg`.
pub fn emit_plots(result: &SweepResult, dist: Option<&UDistribution>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = vec![
        (dir.join("entropies.svg"), entropy_figure(result)),
        (dir.join("ipr.svg"), ipr_figure(result)),
    ];
    if let Some(d) = dist {
        files.push((dir.join("u_distribution.svg"), u_figure(d)));
    }
    for (path, body) in &files {
        fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
