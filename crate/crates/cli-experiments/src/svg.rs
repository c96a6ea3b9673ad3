//! Minimal SVG charts: polylines on linear or logarithmic axes, and
//! heatmaps of 2D fields. Coordinates are printed with fixed precision so
//! output is reproducible.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Leave out the legend, for plots with many unlabelled curves.
    pub hide_legend: bool,
}

impl Chart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Chart { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Default::default() }
    }

    pub fn render(&self) -> String {
        let ty = |y: f64| if self.log_y { y.max(1e-300).log10() } else { y };
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let pts: Vec<(f64, f64)> = pts.filter(|p| !self.log_y || p.1 > 0.0).map(|&(x, y)| (x, ty(y))).collect();
        let (mut x0, mut x1, mut y0, mut y1) = bounds(&pts);
        if x1 <= x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 <= y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = header(&self.title);
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let ylab = if self.log_y { format!("1e{yv:.1}") } else { format!("{yv:.3}") };
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{:.3}</text>"#, sx(xv), H - BOTTOM + 16.0, xv);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{ylab}</text>"#, LEFT - 6.0, sy(yv) + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        for (i, ser) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let mut d = String::new();
            for &(x, y) in &ser.points {
                if !x.is_finite() || !y.is_finite() || (self.log_y && y <= 0.0) {
                    continue;
                }
                let _ = write!(d, "{:.2},{:.2} ", sx(x), sy(ty(y)));
            }
            let dash = if ser.dashed { r#" stroke-dasharray="5,4""# } else { "" };
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#, d.trim_end());
            if !self.hide_legend {
                let ly = TOP + 14.0 + 16.0 * i as f64;
                let lx = W - RIGHT + 10.0;
                let _ = writeln!(s, r#"<line x1="{lx}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="2"{dash}/>"#, ly - 4.0, lx + 18.0, ly - 4.0);
                let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" font-size="11">{}</text>"#, lx + 24.0, esc(&ser.label));
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Heatmap of nodal values on an `nx × ny` grid, blue for negative and red
/// for positive, scaled by the largest magnitude.
pub fn heatmap(title: &str, nx: usize, ny: usize, values: &[f64]) -> String {
    let peak = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let cw = pw / nx as f64;
    let ch = ph / ny as f64;
    let mut s = header(title);
    for j in 0..ny {
        for i in 0..nx {
            let v = if peak > 0.0 { values[j * nx + i] / peak } else { 0.0 };
            let (r, g, b) = diverging(v);
            let y = TOP + (ny - 1 - j) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                LEFT + i as f64 * cw,
                y,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12">max |u| = {peak:.4e}</text>"#, W - RIGHT + 10.0, TOP + 14.0);
    s.push_str("</svg>\n");
    s
}

fn diverging(v: f64) -> (u8, u8, u8) {
    let v = v.clamp(-1.0, 1.0);
    let fade = |a: f64| (255.0 * (1.0 - a.abs())).round() as u8;
    if v >= 0.0 {
        (255, fade(v), fade(v))
    } else {
        (fade(v), fade(v), 255)
    }
}

fn bounds(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    if pts.is_empty() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |b, &(x, y)| {
        (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y))
    })
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, esc(title));
    s
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
