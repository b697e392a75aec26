//! Static SVG figures: curves with error bands and point-cloud scatters.
//!
//! Output depends only on the data, so identical inputs give identical files.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 50.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// One curve: `y` values with an optional symmetric spread drawn as a band.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub spread: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

/// Two 2D clouds with row-wise correspondence, joined by segments.
#[derive(Debug, Clone)]
pub struct PairedScatter {
    pub title: String,
    pub reference: Vec<[f64; 2]>,
    pub reference_label: String,
    pub other: Vec<[f64; 2]>,
    pub other_label: String,
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data coordinates onto the plotting area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_y: bool,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), log_y: bool, area: (f64, f64, f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let (x0, x1) = pad(x);
        let (y0, y1) = if log_y { pad((y.0.log10(), y.1.log10())) } else { pad(y) };
        let (left, right, top, bottom) = area;
        Self { x0, x1, y0, y1, log_y, left, right, top, bottom }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        let y = if self.log_y { y.log10() } else { y };
        self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }

    fn axes(&self, svg: &mut String, x_label: &str, y_label: &str) {
        let _ = writeln!(
            svg,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            num(self.left),
            num(self.top),
            num(self.right - self.left),
            num(self.bottom - self.top)
        );
        for k in 0..=4 {
            let x = self.x0 + (self.x1 - self.x0) * k as f64 / 4.0;
            let px = self.px(x);
            let _ = writeln!(
                svg,
                r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#333"/><text x="{0}" y="{3}" font-size="11" text-anchor="middle">{4}</text>"##,
                num(px),
                num(self.bottom),
                num(self.bottom + 4.0),
                num(self.bottom + 17.0),
                tick(x)
            );
        }
        let y_ticks: Vec<f64> = if self.log_y {
            (self.y0.ceil() as i32..=self.y1.floor() as i32).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=4).map(|k| self.y0 + (self.y1 - self.y0) * k as f64 / 4.0).collect()
        };
        for y in y_ticks {
            let py = self.py(y);
            let _ = writeln!(
                svg,
                r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#333"/><text x="{3}" y="{4}" font-size="11" text-anchor="end">{5}</text>"##,
                num(self.left - 4.0),
                num(py),
                num(self.left),
                num(self.left - 7.0),
                num(py + 4.0),
                tick(y)
            );
        }
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"##,
            num((self.left + self.right) / 2.0),
            num(self.bottom + 36.0),
            escape(x_label)
        );
        let cy = (self.top + self.bottom) / 2.0;
        let cx = self.left - 52.0;
        let _ = writeln!(
            svg,
            r##"<text x="{0}" y="{1}" font-size="12" text-anchor="middle" transform="rotate(-90 {0} {1})">{2}</text>"##,
            num(cx),
            num(cy),
            escape(y_label)
        );
    }
}

fn header(svg: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="sans-serif">"##,
        num(w),
        num(h)
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"##,
        num(w / 2.0),
        escape(title)
    );
}

fn legend(svg: &mut String, x: f64, y: f64, entries: &[(&str, &str)]) {
    for (k, (label, color)) in entries.iter().enumerate() {
        let yy = y + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r##"<rect x="{}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}" font-size="11">{}</text>"##,
            num(x),
            num(yy - 10.0),
            color,
            num(x + 17.0),
            num(yy),
            escape(label)
        );
    }
}

fn finite_range(values: impl Iterator<Item = f64>, positive: bool) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite() && (!positive || *v > 0.0))
        .fold(None, |acc, v| Some(acc.map_or((v, v), |(lo, hi): (f64, f64)| (lo.min(v), hi.max(v)))))
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let log = self.y_scale == Scale::Log;
        let xs = finite_range(self.series.iter().flat_map(|s| s.x.iter().copied()), false).unwrap_or((0.0, 1.0));
        let band = |s: &Series, sign: f64| -> Vec<f64> {
            match &s.spread {
                Some(sd) => s.y.iter().zip(sd).map(|(y, d)| y + sign * d).collect(),
                None => s.y.clone(),
            }
        };
        let ys = finite_range(
            self.series.iter().flat_map(|s| {
                let mut v = s.y.clone();
                v.extend(band(s, 1.0));
                if !log {
                    v.extend(band(s, -1.0));
                }
                v
            }),
            log,
        )
        .unwrap_or((1e-3, 1.0));
        let frame = Frame::new(
            xs,
            ys,
            log,
            (MARGIN_LEFT, WIDTH - MARGIN_RIGHT, MARGIN_TOP, HEIGHT - MARGIN_BOTTOM),
        );
        let clamp = |y: f64| if log { y.max(ys.0) } else { y };
        let mut svg = String::new();
        header(&mut svg, WIDTH, HEIGHT, &self.title);
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            if s.spread.is_some() {
                let hi = band(s, 1.0);
                let lo = band(s, -1.0);
                let mut pts: Vec<String> = s
                    .x
                    .iter()
                    .zip(&hi)
                    .map(|(&x, &y)| format!("{},{}", num(frame.px(x)), num(frame.py(clamp(y)))))
                    .collect();
                pts.extend(
                    s.x.iter()
                        .zip(&lo)
                        .rev()
                        .map(|(&x, &y)| format!("{},{}", num(frame.px(x)), num(frame.py(clamp(y))))),
                );
                let _ = writeln!(
                    svg,
                    r##"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"##,
                    pts.join(" ")
                );
            }
            let pts: Vec<String> = s
                .x
                .iter()
                .zip(&s.y)
                .filter(|(_, y)| y.is_finite() && (!log || **y > 0.0))
                .map(|(&x, &y)| format!("{},{}", num(frame.px(x)), num(frame.py(y))))
                .collect();
            let _ = writeln!(
                svg,
                r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"##,
                pts.join(" ")
            );
        }
        frame.axes(&mut svg, &self.x_label, &self.y_label);
        let entries: Vec<(&str, &str)> = self
            .series
            .iter()
            .enumerate()
            .map(|(k, s)| (s.label.as_str(), PALETTE[k % PALETTE.len()]))
            .collect();
        legend(&mut svg, WIDTH - MARGIN_RIGHT + 12.0, MARGIN_TOP + 12.0, &entries);
        svg.push_str("</svg>\n");
        svg
    }
}

fn equal_aspect(points: &[[f64; 2]]) -> ((f64, f64), (f64, f64)) {
    let xs = finite_range(points.iter().map(|p| p[0]), false).unwrap_or((0.0, 1.0));
    let ys = finite_range(points.iter().map(|p| p[1]), false).unwrap_or((0.0, 1.0));
    let half = ((xs.1 - xs.0).max(ys.1 - ys.0) / 2.0).max(1e-12) * 1.08;
    let cx = (xs.0 + xs.1) / 2.0;
    let cy = (ys.0 + ys.1) / 2.0;
    ((cx - half, cx + half), (cy - half, cy + half))
}

fn dots(svg: &mut String, frame: &Frame, points: &[[f64; 2]], color: &str, r: f64) {
    for p in points {
        let _ = writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="{}" fill="{color}"/>"##,
            num(frame.px(p[0])),
            num(frame.py(p[1])),
            num(r)
        );
    }
}

impl PairedScatter {
    pub fn to_svg(&self) -> String {
        let side = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let width = MARGIN_LEFT + side + MARGIN_RIGHT;
        let all: Vec<[f64; 2]> = self.reference.iter().chain(&self.other).copied().collect();
        let (xs, ys) = equal_aspect(&all);
        let frame = Frame::new(xs, ys, false, (MARGIN_LEFT, MARGIN_LEFT + side, MARGIN_TOP, MARGIN_TOP + side));
        let mut svg = String::new();
        header(&mut svg, width, HEIGHT, &self.title);
        for (a, b) in self.reference.iter().zip(&self.other) {
            let _ = writeln!(
                svg,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-width="0.8"/>"##,
                num(frame.px(a[0])),
                num(frame.py(a[1])),
                num(frame.px(b[0])),
                num(frame.py(b[1]))
            );
        }
        dots(&mut svg, &frame, &self.reference, PALETTE[0], 3.5);
        dots(&mut svg, &frame, &self.other, PALETTE[1], 2.5);
        frame.axes(&mut svg, "x", "y");
        legend(
            &mut svg,
            MARGIN_LEFT + side + 12.0,
            MARGIN_TOP + 12.0,
            &[(&self.reference_label, PALETTE[0]), (&self.other_label, PALETTE[1])],
        );
        svg.push_str("</svg>\n");
        svg
    }
}

/// Scatter of every pair of axes of a point cloud, side by side.
pub fn pairwise_axes_svg(title: &str, points: &[Vec<f64>], max_dims: usize) -> String {
    let dims = points.first().map_or(0, Vec::len).min(max_dims);
    let pairs: Vec<(usize, usize)> = (0..dims).flat_map(|i| (i + 1..dims).map(move |j| (i, j))).collect();
    let panel = 220.0;
    let pad = 56.0;
    let n = pairs.len().max(1) as f64;
    let width = pad + n * (panel + pad);
    let height = MARGIN_TOP + panel + MARGIN_BOTTOM;
    let mut svg = String::new();
    header(&mut svg, width, height, title);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[i], p[j]]).collect();
        let (xs, ys) = equal_aspect(&pts);
        let left = pad + k as f64 * (panel + pad);
        let frame = Frame::new(xs, ys, false, (left, left + panel, MARGIN_TOP, MARGIN_TOP + panel));
        dots(&mut svg, &frame, &pts, PALETTE[0], 2.5);
        frame.axes(&mut svg, &format!("h{}", i + 1), &format!("h{}", j + 1));
    }
    svg.push_str("</svg>\n");
    svg
}
