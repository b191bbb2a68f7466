//! Just enough SVG to draw scatter and line plots with axes.

use std::fmt::Write;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Scale {
    pub lo: f64,
    pub hi: f64,
    pub log: bool,
}

impl Scale {
    pub fn linear(lo: f64, hi: f64) -> Self {
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Scale { lo, hi, log: false }
    }

    /// Log axis widened to whole decades.
    pub fn log(lo: f64, hi: f64) -> Self {
        let lo = 10f64.powf(lo.max(f64::MIN_POSITIVE).log10().floor());
        let hi = 10f64.powf(hi.max(lo * 10.0).log10().ceil());
        Scale { lo, hi, log: true }
    }

    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            let every = ((b - a) / 8).max(1);
            (a..=b)
                .filter(|e| (e - a) % every == 0)
                .map(|e| {
                    (
                        10f64.powi(e),
                        if e.abs() < 4 {
                            format!("{}", 10f64.powi(e))
                        } else {
                            format!("1e{e}")
                        },
                    )
                })
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let mut t = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while t <= self.hi + step * 1e-9 {
                out.push((t, format!("{}", (t / step).round() * step)));
                t += step;
            }
            out
        }
    }
}

/// A plotting area inside a document, in pixel coordinates.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Panel {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x: Scale,
    pub y: Scale,
}

impl Panel {
    pub fn px(&self, x: f64) -> f64 {
        self.left + self.x.frac(x) * self.width
    }

    pub fn py(&self, y: f64) -> f64 {
        self.top + (1.0 - self.y.frac(y)) * self.height
    }
}

pub(crate) struct Svg {
    buf: String,
}

pub(crate) const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut buf = String::new();
        writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(buf, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
        Svg { buf }
    }

    pub fn metadata(&mut self, json: &str) {
        writeln!(self.buf, "<metadata>{}</metadata>", escape(json)).unwrap();
    }

    pub fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        writeln!(
            self.buf,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        )
        .unwrap();
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dash: bool) {
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(
            self.buf,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{dash}/>"#
        )
        .unwrap();
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, dash: bool) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        )
        .unwrap();
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str, opacity: f64) {
        writeln!(
            self.buf,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}" fill-opacity="{opacity}"/>"#
        )
        .unwrap();
    }

    pub fn axes(&mut self, p: &Panel, title: &str, xlabel: &str, ylabel: &str) {
        let (l, t, r, b) = (p.left, p.top, p.left + p.width, p.top + p.height);
        writeln!(
            self.buf,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            p.width, p.height
        )
        .unwrap();
        for (v, label) in p.x.ticks() {
            let x = p.px(v);
            self.line(x, b, x, b + 5.0, "black", false);
            self.text(x, b + 18.0, "middle", &label);
        }
        for (v, label) in p.y.ticks() {
            let y = p.py(v);
            self.line(l - 5.0, y, l, y, "black", false);
            self.text(l - 8.0, y + 4.0, "end", &label);
        }
        self.text((l + r) / 2.0, t - 10.0, "middle", title);
        self.text((l + r) / 2.0, b + 36.0, "middle", xlabel);
        let (cx, cy) = (l - 50.0, (t + b) / 2.0);
        writeln!(
            self.buf,
            r#"<text x="{cx:.2}" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 {cx:.2} {cy:.2})">{}</text>"#,
            escape(ylabel)
        )
        .unwrap();
    }

    pub fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_map_endpoints() {
        let s = Scale::log(3.0, 2e6);
        assert_eq!((s.lo, s.hi), (1.0, 1e7));
        assert!((s.frac(1e3) - 3.0 / 7.0).abs() < 1e-12);
        let l = Scale::linear(0.0, 120.0);
        assert_eq!(l.frac(60.0), 0.5);
        let ticks = l.ticks();
        assert_eq!(ticks.first().unwrap().1, "0");
        assert_eq!(ticks.last().unwrap().1, "120");
    }

    #[test]
    fn text_is_escaped() {
        let mut s = Svg::new(10.0, 10.0);
        s.text(0.0, 0.0, "start", "a<b & c");
        assert!(s.finish().contains("a&lt;b &amp; c"));
    }
}
