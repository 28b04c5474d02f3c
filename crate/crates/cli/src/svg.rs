// SPDX-License-Identifier: MIT OR Apache-2.0

//! Minimal SVG charts. Coordinates are printed with fixed precision so the
//! same data always yields the same bytes.

use std::fmt::Write;

const PALETTE: [&str; 8] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
];

const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Linear map from a data interval onto a pixel interval.
struct Axis {
    lo: f64,
    hi: f64,
    p0: f64,
    p1: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, p0: f64, p1: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        Self { lo, hi, p0, p1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.p0 + (v - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0)
    }
}

fn open(out: &mut String, width: u32, height: u32, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        num(f64::from(width) / 2.0),
        escape(title)
    );
}

fn axis_titles(out: &mut String, width: f64, height: f64, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(LEFT + (width - LEFT - RIGHT) / 2.0),
        num(height - 10.0),
        escape(xlabel)
    );
    let cy = TOP + (height - TOP - BOTTOM) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        num(cy),
        escape(ylabel)
    );
}

/// One bar per value, labelled `1..=n` along the x axis.
pub fn bar_chart(title: &str, ylabel: &str, values: &[f64], width: u32, height: u32) -> String {
    let (w, h) = (f64::from(width), f64::from(height));
    let lo = values.iter().copied().fold(0.0_f64, f64::min);
    let hi = values.iter().copied().fold(0.0_f64, f64::max);
    let y = Axis::new(lo, hi, h - BOTTOM, TOP);
    let slot = (w - LEFT - RIGHT) / values.len().max(1) as f64;

    let mut out = String::new();
    open(&mut out, width, height, title);
    for v in [y.lo, 0.0, y.hi] {
        let py = num(y.map(v));
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{py}" x2="{}" y2="{py}" stroke="#dddddd"/>"##,
            num(LEFT),
            num(w - RIGHT)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{py}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            num(LEFT - 6.0),
            label(v)
        );
    }
    let base = y.map(0.0);
    for (i, &v) in values.iter().enumerate() {
        let top = y.map(v);
        let x = LEFT + slot * (i as f64 + 0.1);
        let _ = writeln!(
            out,
            r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{}: {}</title></rect>"#,
            num(x),
            num(top.min(base)),
            num(slot * 0.8),
            num((top - base).abs()),
            color(0),
            i + 1,
            label(v)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(LEFT + slot * (i as f64 + 0.5)),
            num(h - BOTTOM + 14.0),
            i + 1
        );
    }
    let _ = writeln!(
        out,
        r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#333333"/>"##,
        num(LEFT),
        num(base),
        num(w - RIGHT)
    );
    axis_titles(&mut out, w, h, "index", ylabel);
    out.push_str("</svg>\n");
    out
}

/// A straight segment between two data points.
pub type Segment = ((f64, f64), (f64, f64));

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Scatter plot with grey connecting segments drawn underneath the points.
pub fn scatter(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    segments: &[Segment],
    width: u32,
    height: u32,
) -> String {
    let (w, h) = (f64::from(width), f64::from(height));
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (mut xl, mut xh, mut yl, mut yh) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(px, py) in all() {
        xl = xl.min(px);
        xh = xh.max(px);
        yl = yl.min(py);
        yh = yh.max(py);
    }
    if xl > xh {
        (xl, xh, yl, yh) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| 0.05 * (hi - lo);
    let (px, py) = (pad(xl, xh), pad(yl, yh));
    let x = Axis::new(xl - px, xh + px, LEFT, w - RIGHT);
    let y = Axis::new(yl - py, yh + py, h - BOTTOM, TOP);

    let mut out = String::new();
    open(&mut out, width, height, title);
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333333"/>"##,
        num(LEFT),
        num(TOP),
        num(w - LEFT - RIGHT),
        num(h - TOP - BOTTOM)
    );
    out.push_str("<g class=\"pairs\" stroke=\"#999999\" stroke-opacity=\"0.35\" stroke-width=\"0.6\">\n");
    for &((ax, ay), (bx, by)) in segments {
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(x.map(ax)),
            num(y.map(ay)),
            num(x.map(bx)),
            num(y.map(by))
        );
    }
    out.push_str("</g>\n");
    for (i, s) in series.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="series" fill="{}">"#, color(i));
        for &(a, b) in &s.points {
            let _ = writeln!(
                out,
                r#"<circle class="point" cx="{}" cy="{}" r="2.5"/>"#,
                num(x.map(a)),
                num(y.map(b))
            );
        }
        out.push_str("</g>\n");
        let ly = TOP + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="4" fill="{}"/><text x="{}" y="{}" dominant-baseline="middle">{}</text>"#,
            num(w - RIGHT - 70.0),
            num(ly),
            color(i),
            num(w - RIGHT - 62.0),
            num(ly),
            escape(&s.name)
        );
    }
    axis_titles(&mut out, w, h, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}
