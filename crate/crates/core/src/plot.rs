//! A minimal SVG plotter: line charts and histograms with axes and ticks.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 30.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Fixed axis ranges; computed from the data when `None`.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN.0 + (x - self.x.0) / (self.x.1 - self.x.0) * (W - MARGIN.0 - MARGIN.1)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN.3 - (y - self.y.0) / (self.y.1 - self.y.0) * (H - MARGIN.2 - MARGIN.3)
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, f: &Frame, title: &str, xl: &str, yl: &str) {
    let (x0, x1, y0, y1) = (MARGIN.0, W - MARGIN.1, MARGIN.2, H - MARGIN.3);
    let _ = writeln!(out, r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#000"/>"##, x1 - x0, y1 - y0);
    for t in ticks(f.x.0, f.x.1) {
        let x = f.px(t);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}" stroke="#000"/>"##, y1 + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, y1 + 18.0, fmt_tick(t));
    }
    for t in ticks(f.y.0, f.y.1) {
        let y = f.py(t);
        let _ = writeln!(out, r##"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="#000"/>"##, x0 - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, fmt_tick(t));
    }
    let _ = writeln!(out, r#"<text x="{}" y="18" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 10.0, escape(xl));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(yl)
    );
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

impl LinePlot {
    pub fn render(&self) -> String {
        let f = Frame {
            x: self.x_range.unwrap_or_else(|| bounds(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)))),
            y: self.y_range.unwrap_or_else(|| bounds(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)))),
        };
        let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        out.push('\n');
        axes(&mut out, &f, &self.title, &self.x_label, &self.y_label);
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#, pts.join(" "));
            let ly = MARGIN.2 + 16.0 + 16.0 * i as f64;
            let lx = W - MARGIN.1 - 150.0;
            let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 20.0);
            let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Histogram counts over `bins` equal-width bins spanning `[lo, hi]`.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let w = (hi - lo) / bins as f64;
    for &v in values {
        if v >= lo && v <= hi {
            counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone)]
pub struct HistogramPlot {
    pub title: String,
    pub x_label: String,
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    /// Vertical reference lines, e.g. a bulk edge.
    pub markers: Vec<(String, f64)>,
}

impl HistogramPlot {
    pub fn render(&self) -> String {
        let max = self.counts.iter().copied().max().unwrap_or(1).max(1) as f64;
        let f = Frame {
            x: (self.lo, self.hi),
            y: (0.0, max * 1.05),
        };
        let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        out.push('\n');
        axes(&mut out, &f, &self.title, &self.x_label, "count");
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        for (i, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let x0 = f.px(self.lo + i as f64 * w);
            let x1 = f.px(self.lo + (i + 1) as f64 * w);
            let y = f.py(c as f64);
            let _ = writeln!(
                out,
                r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="#fff" stroke-width="0.5"/>"##,
                x1 - x0,
                f.py(0.0) - y
            );
        }
        for (i, (label, x)) in self.markers.iter().enumerate() {
            let px = f.px(*x);
            let color = COLORS[(i + 1) % COLORS.len()];
            let _ = writeln!(
                out,
                r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="{color}" stroke-dasharray="4,3"/>"#,
                MARGIN.2,
                H - MARGIN.3
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{}" font-size="11" fill="{color}">{}</text>"#, px + 4.0, MARGIN.2 + 14.0 + 14.0 * i as f64, escape(label));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
    }

    #[test]
    fn renders_well_formed_svg() {
        let p = LinePlot {
            title: "a < b".into(),
            series: vec![Series { label: "s".into(), points: vec![(0.0, 0.0), (1.0, 1.0)], dashed: false }],
            ..Default::default()
        };
        let s = p.render();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        let h = histogram(&[0.0, 0.5, 1.0], 0.0, 1.0, 2);
        assert_eq!(h, vec![1, 2]);
    }
}
