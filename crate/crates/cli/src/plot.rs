//! Plot data: CSV series extracted from result files and plain SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// A named curve.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads a CSV with a header; returns the header and the rows as strings.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .with_context(|| format!("{} is empty", path.display()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    Ok((header, rows))
}

pub fn column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("missing column `{name}`"))
}

pub fn series_csv(series: &[Series], x: &str, y: &str) -> String {
    let mut out = format!("series,{x},{y}\n");
    for s in series {
        for (a, b) in &s.points {
            let _ = writeln!(out, "{},{},{}", s.label, glradial::verify::num(*a), glradial::verify::num(*b));
        }
    }
    out
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot with a box frame, axis extremes and a legend.
pub fn svg(series: &[Series], title: &str, x: &str, y: &str) -> Result<String> {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(a, b)| a.is_finite() && b.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(a, b) in pts {
        (x0, x1, y0, y1) = (x0.min(a), x1.max(a), y0.min(b), y1.max(b));
    }
    if !(x0 < x1) {
        bail!("nothing to plot for `{title}`");
    }
    if !(y0 < y1) {
        (y0, y1) = (y0 - 1.0, y1 + 1.0);
    }
    let sx = |a: f64| PAD + (a - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |b: f64| H - PAD - (b - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(out, r#"<text x="12" y="{}" transform="rotate(-90 12 {})">{y}</text>"#, H / 2.0, H / 2.0);
    for (v, px, py, anchor) in [
        (x0, PAD, H - PAD + 14.0, "start"),
        (x1, W - PAD, H - PAD + 14.0, "end"),
        (y0, PAD - 4.0, H - PAD, "end"),
        (y1, PAD - 4.0, PAD + 8.0, "end"),
    ] {
        let _ = writeln!(out, r#"<text x="{px}" y="{py}" text-anchor="{anchor}">{v:.4}</text>"#);
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            out,
            r#"<line x1="{PAD}" y1="{z:.2}" x2="{}" y2="{z:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            W - PAD,
            z = sy(0.0)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            PAD + 8.0,
            PAD + 16.0 + 14.0 * k as f64,
            s.label
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_rejects_empty() {
        let s = [Series {
            label: "a".into(),
            points: vec![(0.0, -1.0), (1.0, 2.0)],
        }];
        assert_eq!(svg(&s, "t", "x", "y").unwrap(), svg(&s, "t", "x", "y").unwrap());
        assert!(svg(&[], "t", "x", "y").is_err());
    }
}
