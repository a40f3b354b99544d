//! Minimal SVG plots: polylines, polygons and markers in data coordinates.
//!
//! The viewport is the bounding box of everything drawn plus a 5% margin,
//! with the y axis pointing up. Coordinates are written with six decimals
//! so the output is byte-stable.

use std::fmt::Write;

use polysle::Complex64;

const SIZE: f64 = 600.0;

#[derive(Debug, Clone)]
enum Item {
    Line { points: Vec<Complex64>, stroke: String },
    Polygon { points: Vec<Complex64>, stroke: String, fill: String },
    Marker { at: Complex64, color: String },
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    title: String,
    items: Vec<Item>,
}

fn finite(points: &[Complex64]) -> Vec<Complex64> {
    points.iter().copied().filter(|p| p.re.is_finite() && p.im.is_finite()).collect()
}

impl Plot {
    pub fn new(title: &str) -> Plot {
        Plot {
            title: title.into(),
            items: Vec::new(),
        }
    }

    pub fn polyline(&mut self, points: &[Complex64], stroke: &str) -> &mut Self {
        self.items.push(Item::Line {
            points: finite(points),
            stroke: stroke.into(),
        });
        self
    }

    pub fn polygon(&mut self, points: &[Complex64], stroke: &str, fill: &str) -> &mut Self {
        self.items.push(Item::Polygon {
            points: finite(points),
            stroke: stroke.into(),
            fill: fill.into(),
        });
        self
    }

    pub fn marker(&mut self, at: Complex64, color: &str) -> &mut Self {
        if at.re.is_finite() && at.im.is_finite() {
            self.items.push(Item::Marker { at, color: color.into() });
        }
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        let mut grow = |p: &Complex64| {
            b.0 = b.0.min(p.re);
            b.1 = b.1.max(p.re);
            b.2 = b.2.min(p.im);
            b.3 = b.3.max(p.im);
        };
        for item in &self.items {
            match item {
                Item::Line { points, .. } | Item::Polygon { points, .. } => points.iter().for_each(&mut grow),
                Item::Marker { at, .. } => grow(at),
            }
        }
        if !b.0.is_finite() {
            return (-1.0, 1.0, -1.0, 1.0);
        }
        // square aspect, never degenerate
        let span = (b.1 - b.0).max(b.3 - b.2).max(1e-9) * 1.1;
        let (cx, cy) = (0.5 * (b.0 + b.1), 0.5 * (b.2 + b.3));
        (cx - 0.5 * span, cx + 0.5 * span, cy - 0.5 * span, cy + 0.5 * span)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let scale = SIZE / (x1 - x0);
        let px = |p: &Complex64| ((p.re - x0) * scale, (y1 - p.im) * scale);
        let coords = |points: &[Complex64]| {
            points
                .iter()
                .map(|p| {
                    let (x, y) = px(p);
                    format!("{x:.6},{y:.6}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        )
        .unwrap();
        writeln!(s, "<title>{}</title>", escape(&self.title)).unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        self.axes(&mut s, (x0, x1, y0, y1), scale);
        for item in &self.items {
            match item {
                Item::Line { points, stroke } => writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.5" points="{}"/>"#,
                    coords(points)
                ),
                Item::Polygon { points, stroke, fill } => writeln!(
                    s,
                    r#"<polygon fill="{fill}" fill-opacity="0.3" stroke="{stroke}" stroke-width="1.5" points="{}"/>"#,
                    coords(points)
                ),
                Item::Marker { at, color } => {
                    let (x, y) = px(at);
                    writeln!(s, r#"<circle cx="{x:.6}" cy="{y:.6}" r="3.5" fill="{color}"/>"#)
                }
            }
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }

    fn axes(&self, s: &mut String, (x0, x1, y0, y1): (f64, f64, f64, f64), scale: f64) {
        let step = tick_step(x1 - x0);
        let style = r##"stroke="#bbbbbb" stroke-width="0.5""##;
        let label = r##"font-size="10" fill="#666666" font-family="sans-serif""##;
        if (y0..=y1).contains(&0.0) {
            let y = y1 * scale;
            writeln!(s, r#"<line x1="0" y1="{y:.6}" x2="{SIZE}" y2="{y:.6}" {style}/>"#).unwrap();
        }
        if (x0..=x1).contains(&0.0) {
            let x = -x0 * scale;
            writeln!(s, r#"<line x1="{x:.6}" y1="0" x2="{x:.6}" y2="{SIZE}" {style}/>"#).unwrap();
        }
        let mut k = (x0 / step).ceil() as i64;
        while k as f64 * step <= x1 {
            let v = k as f64 * step;
            let x = (v - x0) * scale;
            writeln!(s, r#"<text x="{x:.6}" y="{:.6}" {label}>{}</text>"#, SIZE - 4.0, fmt_tick(v, step)).unwrap();
            k += 1;
        }
        let mut k = (y0 / step).ceil() as i64;
        while k as f64 * step <= y1 {
            let v = k as f64 * step;
            let y = (y1 - v) * scale;
            writeln!(s, r#"<text x="4" y="{y:.6}" {label}>{}</text>"#, fmt_tick(v, step)).unwrap();
            k += 1;
        }
    }
}

fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let v = if v.abs() < 0.5 * step { 0.0 } else { v };
    format!("{v:.decimals$}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
