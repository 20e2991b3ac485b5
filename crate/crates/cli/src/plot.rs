// SPDX-License-Identifier: Apache-2.0

//! Minimal standalone SVG figures. Every figure carries its plotted numbers
//! in an XML comment so the file doubles as a data record.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#555555"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn line(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, style: Style::Line }
    }

    pub fn markers(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, style: Style::Markers }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub y_range: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

/// Round tick spacing giving roughly `target` intervals over [lo, hi].
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= target as f64).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite()) {
        xs = (xs.0.min(*x), xs.1.max(*x));
        ys = (ys.0.min(*y), ys.1.max(*y));
    }
    if !xs.0.is_finite() {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    if xs.0 == xs.1 {
        xs = (xs.0 - 0.5, xs.1 + 0.5);
    }
    if ys.0 == ys.1 {
        ys = (ys.0 - 0.5, ys.1 + 0.5);
    }
    (xs, ys)
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let ((x0, x1), auto_y) = bounds(&self.series);
        let (y0, y1) = self.y_range.unwrap_or_else(|| {
            let pad = 0.05 * (auto_y.1 - auto_y.0);
            (auto_y.0 - pad, auto_y.1 + pad)
        });
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        for s in &self.series {
            let _ = writeln!(out, "<!-- data \"{}\": x y", escape(&s.label));
            for (x, y) in &s.points {
                let _ = writeln!(out, "{x:e} {y:e}");
            }
            let _ = writeln!(out, "-->");
        }
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for t in ticks(x0, x1, 8) {
            let x = sx(t);
            let yb = MARGIN_TOP + ph;
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{yb}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, yb + 5.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, yb + 18.0, fmt_tick(t));
        }
        for t in ticks(y0, y1, 6) {
            let y = sy(t);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="black"/>"#,
                MARGIN_LEFT - 5.0
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_LEFT - 8.0, y + 4.0, fmt_tick(t));
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(
            out,
            r#"<clipPath id="plot-area"><rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}"/></clipPath>"#
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> =
                s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| (sx(*x), sy(*y))).collect();
            match s.style {
                Style::Line => {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(
                        out,
                        r#"<polyline clip-path="url(#plot-area)" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        path.join(" ")
                    );
                }
                Style::Markers => {
                    for (x, y) in &pts {
                        let _ = writeln!(out, r#"<circle clip-path="url(#plot-area)" cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
                    }
                }
            }
            let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
            let lx = MARGIN_LEFT + pw - 150.0;
            let _ = writeln!(out, r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="4" fill="{color}"/>"#, ly - 6.0);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 18.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Density-matrix element chart: one bar per entry rising or falling from a
/// mid-cell baseline, with the target value drawn as a dashed outline.
pub fn matrix_bars(title: &str, values: &[Vec<f64>], target: Option<&[Vec<f64>]>, labels: &[String]) -> String {
    let k = values.len();
    let scale = values
        .iter()
        .flatten()
        .chain(target.into_iter().flatten().flatten())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-12);
    let size = 560.0;
    let left = 60.0;
    let top = 50.0;
    let cell = if k == 0 { size } else { size / k as f64 };
    let half = 0.45 * cell;
    let total_w = left + size + 20.0;
    let total_h = top + size + 50.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, "<!-- data: row col value target");
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let t = target.map(|t| t[i][j]).unwrap_or(f64::NAN);
            let _ = writeln!(out, "{i} {j} {v:e} {t:e}");
        }
    }
    let _ = writeln!(out, "-->");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="15">{}</text>"#, total_w / 2.0, escape(title));
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let cx = left + (j as f64 + 0.5) * cell;
            let cy = top + (i as f64 + 0.5) * cell;
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="none" stroke="#dddddd"/>"##,
                cx - cell / 2.0,
                cy - cell / 2.0
            );
            let h = v / scale * half;
            let (y, hh) = if h >= 0.0 { (cy - h, h) } else { (cy, -h) };
            let color = if *v >= 0.0 { "#1f77b4" } else { "#d62728" };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{hh:.2}" fill="{color}"/>"#,
                cx - 0.3 * cell,
                0.6 * cell
            );
            if let Some(t) = target {
                let th = t[i][j] / scale * half;
                if th.abs() > 1e-9 {
                    let (ty, thh) = if th >= 0.0 { (cy - th, th) } else { (cy, -th) };
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.2}" y="{ty:.2}" width="{:.2}" height="{thh:.2}" fill="none" stroke="black" stroke-dasharray="3,2"/>"#,
                        cx - 0.35 * cell,
                        0.7 * cell
                    );
                }
            }
        }
    }
    for (i, label) in labels.iter().enumerate().take(k) {
        let c = (i as f64 + 0.5) * cell;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, left + c, top + size + 16.0, escape(label));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, top + c + 4.0, escape(label));
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">bar half-height = {}; dashed: target</text>"#,
        left + size / 2.0,
        top + size + 38.0,
        fmt_tick(scale)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 180.0, 8), vec![0.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0]);
        let t = ticks(0.0, 1.0, 5);
        assert_eq!(t.len(), 6);
        for (k, v) in t.iter().enumerate() {
            assert!((v - 0.2 * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn svg_embeds_data() {
        let plot = LinePlot {
            title: "t <1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series::line("a", vec![(0.0, 1.0), (2.0, 3.0)])],
            y_range: None,
        };
        let svg = plot.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("0e0 1e0\n2e0 3e0"));
        assert!(svg.contains("t &lt;1&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn matrix_chart_lists_every_entry() {
        let v = vec![vec![0.5, -0.25], vec![-0.25, 0.5]];
        let svg = matrix_bars("m", &v, Some(&v), &["a".into(), "b".into()]);
        assert_eq!(svg.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 4);
        assert!(svg.contains("stroke-dasharray"));
    }
}
