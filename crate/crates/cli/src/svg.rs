//! Minimal static SVG and PNG rendering for fields, traces and heatmaps.

use std::fmt::Write as _;

use image::{ImageFormat, Rgb, RgbImage};
use riccati_dynamics::wigner::PhaseSpaceGrid;
use riccati_dynamics::PlaneField;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub color: &'a str,
}

pub struct HLine<'a> {
    pub y: f64,
    pub label: &'a str,
    pub color: &'a str,
}

pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Frame { x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn open(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let (x0, x1, y0, y1) = (self.px(self.x.0), self.px(self.x.1), self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for t in ticks(self.x.0, self.x.1) {
            let p = self.px(t);
            let _ =
                writeln!(out, r#"<line x1="{p:.2}" y1="{y0:.2}" x2="{p:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
            let _ =
                writeln!(out, r#"<text x="{p:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 18.0, fmt_tick(t));
        }
        for t in ticks(self.y.0, self.y.1) {
            let p = self.py(t);
            let _ =
                writeln!(out, r#"<line x1="{:.2}" y1="{p:.2}" x2="{x0:.2}" y2="{p:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                p + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(xlabel)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }

    fn clip(&self, out: &mut String) {
        let (x0, x1, y0, y1) = (self.px(self.x.0), self.px(self.x.1), self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(
            out,
            r#"<defs><clipPath id="plot"><rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#,
            x1 - x0,
            y0 - y1
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn fmt_num(v: f64) -> String {
    fmt_tick((v * 1e3).round() / 1e3)
}

/// Arrow plot of a planar field with labelled fixed points.
pub fn vector_field(field: &PlaneField<f64>, fixed: &[Marker], title: &str, xlabel: &str, ylabel: &str) -> String {
    let nx = field.xs.len();
    let ny = field.ys.len();
    let dx = (field.xs[nx - 1] - field.xs[0]) / (nx - 1) as f64;
    let dy = (field.ys[ny - 1] - field.ys[0]) / (ny - 1) as f64;
    let frame = Frame::new(
        (field.xs[0] - dx / 2.0, field.xs[nx - 1] + dx / 2.0),
        (field.ys[0] - dy / 2.0, field.ys[ny - 1] + dy / 2.0),
    );
    let mut out = String::new();
    frame.open(&mut out, title, xlabel, ylabel);
    let cell =
        (frame.px(field.xs[0] + dx) - frame.px(field.xs[0])).min(frame.py(field.ys[0]) - frame.py(field.ys[0] + dy));
    let len = 0.8 * cell;
    for iy in 0..ny {
        for ix in 0..nx {
            let (u, v) = field.at(ix, iy);
            let (cx, cy) = (frame.px(field.xs[ix]), frame.py(field.ys[iy]));
            // Screen direction: y grows downward.
            let (sx, sy) = (u / dx, -v / dy);
            let norm = sx.hypot(sy);
            if !norm.is_finite() || norm == 0.0 {
                let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="1.5" fill="gray"/>"#);
                continue;
            }
            let (ux, uy) = (sx / norm, sy / norm);
            let (x0, y0) = (cx - ux * len / 2.0, cy - uy * len / 2.0);
            let (x1, y1) = (cx + ux * len / 2.0, cy + uy * len / 2.0);
            let head = len * 0.3;
            let (hx1, hy1) = (x1 - head * (ux * 0.866 - uy * 0.5), y1 - head * (uy * 0.866 + ux * 0.5));
            let (hx2, hy2) = (x1 - head * (ux * 0.866 + uy * 0.5), y1 - head * (uy * 0.866 - ux * 0.5));
            let _ = writeln!(
                out,
                r#"<path d="M{x0:.2} {y0:.2}L{x1:.2} {y1:.2}M{hx1:.2} {hy1:.2}L{x1:.2} {y1:.2}L{hx2:.2} {hy2:.2}" stroke="steelblue" fill="none"/>"#
            );
        }
    }
    for m in fixed {
        let (cx, cy) = (frame.px(m.x), frame.py(m.y));
        let _ = writeln!(
            out,
            r#"<circle class="fixed-point" cx="{cx:.2}" cy="{cy:.2}" r="5" fill="crimson"/><text x="{:.2}" y="{:.2}" fill="crimson">{}</text>"#,
            cx + 8.0,
            cy - 8.0,
            escape(&m.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Line traces with optional horizontal reference lines and a legend.
pub fn line_plot(series: &[Series], hlines: &[HLine], title: &str, xlabel: &str, ylabel: &str) -> String {
    let finite = |v: &&f64| v.is_finite();
    let xs = series.iter().flat_map(|s| s.xs.iter()).filter(finite);
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let ys = series.iter().flat_map(|s| s.ys.iter()).chain(hlines.iter().map(|h| &h.y)).filter(finite);
    let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let pad = 0.05 * (y_hi - y_lo).max(1e-12);
    let frame = Frame::new((x_lo, x_hi), (y_lo - pad, y_hi + pad));
    let mut out = String::new();
    frame.open(&mut out, title, xlabel, ylabel);
    frame.clip(&mut out);
    for h in hlines {
        let y = frame.py(h.y);
        let _ = writeln!(
            out,
            r#"<line class="squeezing-line" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-dasharray="6 4"/>"#,
            frame.px(frame.x.0),
            frame.px(frame.x.1),
            h.color
        );
    }
    for s in series {
        let mut d = String::new();
        for (k, (x, y)) in s.xs.iter().zip(s.ys).enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if k == 0 { "M" } else { "L" }, frame.px(*x), frame.py(*y));
        }
        let _ = writeln!(
            out,
            r#"<path d="{d}" stroke="{}" fill="none" stroke-width="1.5" clip-path="url(#plot)"/>"#,
            s.color
        );
    }
    let mut ly = MARGIN_T + 14.0;
    let lx = WIDTH - MARGIN_R - 150.0;
    for (label, color, dashed) in
        series.iter().map(|s| (s.label, s.color, false)).chain(hlines.iter().map(|h| (h.label, h.color, true)))
    {
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"{dash}/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 24.0,
            ly - 4.0,
            lx + 30.0,
            escape(label)
        );
        ly += 16.0;
    }
    out.push_str("</svg>\n");
    out
}

/// Five-stop perceptual colormap on `[0, 1]`.
fn colormap(v: f64) -> [u8; 3] {
    const STOPS: [[f64; 3]; 5] =
        [[68.0, 1.0, 84.0], [59.0, 82.0, 139.0], [33.0, 145.0, 140.0], [94.0, 201.0, 98.0], [253.0, 231.0, 37.0]];
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 } * 4.0;
    let k = (v.floor() as usize).min(3);
    let f = v - k as f64;
    let mut c = [0u8; 3];
    for i in 0..3 {
        c[i] = (STOPS[k][i] + f * (STOPS[k + 1][i] - STOPS[k][i])).round() as u8;
    }
    c
}

/// Heatmap of `W` with an optional overlay curve and peak marker. Cells are
/// block-averaged so the document stays below `max_cells²` rectangles.
pub fn heatmap(
    grid: &PhaseSpaceGrid<f64>,
    vmax: f64,
    overlay: &[(f64, f64)],
    peak: Option<(f64, f64)>,
    title: &str,
    max_cells: usize,
) -> String {
    let frame = Frame::new((grid.x_min, grid.x_max), (grid.p_min, grid.p_max));
    let mut out = String::new();
    frame.open(&mut out, title, "x", "p");
    let bx = grid.n_x.div_ceil(max_cells).max(1);
    let bp = grid.n_p.div_ceil(max_cells).max(1);
    let (dx, dp) = (grid.dx(), grid.dp());
    for ix0 in (0..grid.n_x).step_by(bx) {
        for ip0 in (0..grid.n_p).step_by(bp) {
            let ix1 = (ix0 + bx).min(grid.n_x);
            let ip1 = (ip0 + bp).min(grid.n_p);
            let mut sum = 0.0;
            for ix in ix0..ix1 {
                for ip in ip0..ip1 {
                    sum += grid.at(ix, ip);
                }
            }
            let mean = sum / ((ix1 - ix0) * (ip1 - ip0)) as f64;
            let [r, g, b] = colormap(mean / vmax);
            let x_lo = (grid.x_min + (ix0 as f64 - 0.5) * dx).max(grid.x_min);
            let x_hi = (grid.x_min + (ix1 as f64 - 0.5) * dx).min(grid.x_max);
            let p_lo = (grid.p_min + (ip0 as f64 - 0.5) * dp).max(grid.p_min);
            let p_hi = (grid.p_min + (ip1 as f64 - 0.5) * dp).min(grid.p_max);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                frame.px(x_lo),
                frame.py(p_hi),
                frame.px(x_hi) - frame.px(x_lo) + 0.3,
                frame.py(p_lo) - frame.py(p_hi) + 0.3
            );
        }
    }
    frame.clip(&mut out);
    if !overlay.is_empty() {
        let mut d = String::new();
        for (k, (x, p)) in overlay.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if k == 0 { "M" } else { "L" }, frame.px(*x), frame.py(*p));
        }
        let _ = writeln!(
            out,
            r#"<path class="energy-ellipse" d="{d}Z" stroke="white" stroke-dasharray="4 3" fill="none" clip-path="url(#plot)"/>"#
        );
    }
    if let Some((x, p)) = peak {
        let _ = writeln!(
            out,
            r#"<circle class="peak" cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="red" stroke-width="2"/><text x="{:.2}" y="{:.2}" fill="white">({}, {})</text>"#,
            frame.px(x),
            frame.py(p),
            frame.px(x) + 7.0,
            frame.py(p) - 7.0,
            fmt_num(x),
            fmt_num(p)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Full-resolution heatmap PNG, `x` to the right and `p` upward.
pub fn heatmap_png(grid: &PhaseSpaceGrid<f64>, vmax: f64) -> Vec<u8> {
    let img = RgbImage::from_fn(grid.n_x as u32, grid.n_p as u32, |col, row| {
        let ip = grid.n_p - 1 - row as usize;
        Rgb(colormap(grid.at(col as usize, ip) / vmax))
    });
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).expect("in-memory PNG encoding");
    buf.into_inner()
}
