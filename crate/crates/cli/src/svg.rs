//! A small SVG writer: polylines, filled rectangles, markers and labels.

use std::fmt::Write;

use filippov_core::flow::Rect;
use filippov_core::Vec2;

pub struct Plot {
    world: Rect,
    width: f64,
    height: f64,
    body: String,
}

const MARGIN: f64 = 24.0;

impl Plot {
    pub fn new(world: Rect, width: f64) -> Self {
        let aspect = (world.y1 - world.y0) / (world.x1 - world.x0);
        let height = (width * aspect).clamp(120.0, 1600.0);
        let mut p = Self { world, width, height, body: String::new() };
        p.frame();
        p
    }

    fn map(&self, q: Vec2) -> (f64, f64) {
        let u = (q.x - self.world.x0) / (self.world.x1 - self.world.x0);
        let v = (q.y - self.world.y0) / (self.world.y1 - self.world.y0);
        (MARGIN + u * self.width, MARGIN + (1.0 - v) * self.height)
    }

    fn frame(&mut self) {
        let _ = writeln!(
            self.body,
            r##"<rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
            self.width, self.height
        );
    }

    pub fn polyline(&mut self, pts: &[Vec2], stroke: &str) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for q in pts {
            let (x, y) = self.map(*q);
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.2"/>"#,
            d.trim_end()
        );
    }

    pub fn rect(&mut self, r: &Rect, fill: &str, opacity: f64) {
        let (x0, y1) = self.map(Vec2::new(r.x0, r.y0));
        let (x1, y0) = self.map(Vec2::new(r.x1, r.y1));
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}" fill-opacity="{opacity:.2}" stroke="none"/>"#,
            (x1 - x0).max(0.5),
            (y1 - y0).max(0.5)
        );
    }

    pub fn marker(&mut self, q: Vec2, fill: &str) {
        let (x, y) = self.map(q);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{fill}"/>"#);
    }

    pub fn label(&mut self, q: Vec2, text: &str) {
        let (x, y) = self.map(q);
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" font-size="11" font-family="sans-serif">{}</text>"#, escape(text));
    }

    pub fn finish(self, title: &str) -> String {
        let w = self.width + 2.0 * MARGIN;
        let h = self.height + 2.0 * MARGIN;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n<title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"{MARGIN}\" y=\"16\" font-size=\"12\" font-family=\"sans-serif\">{}</text>\n{}</svg>\n",
            escape(title),
            escape(title),
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Colour for a classification label.
pub fn label_colour(label: &str) -> &'static str {
    match label {
        "crossing" | "Crossing" => "#4c78a8",
        "sliding" | "Sliding" => "#e45756",
        "escaping" | "Escaping" => "#f2a541",
        _ => "#222222",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_well_formed_svg() {
        let mut p = Plot::new(Rect::new(0.0, 0.0, 1.0, 1.0).unwrap(), 200.0);
        p.polyline(&[Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)], "black");
        p.rect(&Rect::new(0.25, 0.25, 0.5, 0.5).unwrap(), "red", 0.5);
        p.label(Vec2::new(0.5, 0.5), "a<b");
        let s = p.finish("t");
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a&lt;b"));
        assert!(s.contains(r#"points="24.00,224.00 224.00,24.00""#));
    }
}
