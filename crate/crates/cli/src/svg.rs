//! Minimal static SVG rendering: polylines, markers and grayscale cells.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;

pub struct Plot {
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

impl Plot {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Self {
            x_range: pad(x_range),
            y_range: pad(y_range),
            body: String::new(),
        }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn visible(&self, y: f64) -> bool {
        y.is_finite() && y >= self.y_range.0 && y <= self.y_range.1
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, width: f64) {
        let mut path = String::new();
        for &(x, y) in points.iter().filter(|p| self.visible(p.1)) {
            let _ = write!(path, "{:.2},{:.2} ", self.sx(x), self.sy(y));
        }
        if !path.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
                path.trim_end()
            );
        }
    }

    pub fn marker(&mut self, x: f64, y: f64, color: &str, radius: f64) {
        if self.visible(y) {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{color}"/>"#,
                self.sx(x),
                self.sy(y)
            );
        }
    }

    /// Cell centred on `(x, y)` with gray level `level` in [0, 1].
    pub fn cell(&mut self, x: f64, y: f64, dx: f64, dy: f64, level: f64) {
        let g = (255.0 * (1.0 - level.clamp(0.0, 1.0))).round() as u8;
        let (x0, x1) = (self.sx(x - 0.5 * dx), self.sx(x + 0.5 * dx));
        let (y0, y1) = (self.sy(y + 0.5 * dy), self.sy(y - 0.5 * dy));
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
            x1 - x0,
            y1 - y0
        );
    }

    pub fn finish(self, x_label: &str, y_label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        s.push_str(&self.body);
        let (x0, x1) = (MARGIN, WIDTH - MARGIN);
        let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        let label = |v: f64| format!("{v:.3}");
        let _ = writeln!(s, r#"<text x="{x0}" y="{}" font-size="12">{}</text>"#, y0 + 16.0, label(self.x_range.0));
        let _ = writeln!(
            s,
            r#"<text x="{x1}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
            y0 + 16.0,
            label(self.x_range.1)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{y0}" font-size="12" text-anchor="end">{}</text>"#, x0 - 4.0, label(self.y_range.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#, x0 - 4.0, y1 + 10.0, label(self.y_range.1));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{x_label}</text>"#,
            0.5 * (x0 + x1),
            HEIGHT - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
            0.5 * (y0 + y1),
            0.5 * (y0 + y1)
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_points_are_dropped() {
        let mut p = Plot::new((0.0, 1.0), (0.0, 1.0));
        p.polyline(&[(0.0, 0.0), (0.5, 5.0), (1.0, 1.0)], "black", 1.0);
        p.marker(0.5, -3.0, "red", 2.0);
        let s = p.finish("x", "y");
        assert!(s.starts_with("<svg"));
        assert!(s.contains(r#"points="50.00,430.00 590.00,50.00""#));
        assert!(!s.contains("<circle"));
    }
}
