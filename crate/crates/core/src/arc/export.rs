//! SVG rendering of the square complex and the approximating curves.

use std::fmt::Write as _;

use super::curve::PolylineCurve;
use super::tree::ArcTree;

/// Minimal SVG builder in plane coordinates (y up).
pub struct Svg {
    view: [f64; 4],
    body: String,
}

impl Svg {
    /// `view = [min_x, min_y, width, height]`
    pub fn new(view: [f64; 4]) -> Self {
        Self {
            view,
            body: String::new(),
        }
    }

    fn fy(&self, y: f64) -> f64 {
        self.view[1] + self.view[3] - (y - self.view[1])
    }

    pub fn rect(&mut self, r: [f64; 4], fill: &str) {
        let [x0, y0, x1, y1] = r;
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0}" y="{}" width="{}" height="{}" fill="{fill}" stroke="none"/>"#,
            self.fy(y1),
            x1 - x0,
            y1 - y0
        );
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, width: f64) {
        let mut d = String::new();
        for p in pts {
            let _ = write!(d, "{},{} ", p[0], self.fy(p[1]));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    pub fn finish(self) -> String {
        let [x, y, w, h] = self.view;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x} {y} {w} {h}\">\n{}</svg>\n",
            self.body
        )
    }
}

/// `E_n` as filled squares plus connector strokes, with `J_n` overlaid.
pub fn render_arc(tree: &ArcTree, curve: Option<&PolylineCurve>) -> String {
    let mut svg = Svg::new([0.0, 0.0, 1.0, 1.0]);
    let stroke = 1.0 / 2048.0;
    for leaf in tree.leaves() {
        svg.rect(leaf.bounds().to_f64(), "#202020");
    }
    for d in 0..tree.depth() {
        let t = tree.templates.for_depth(d);
        for node in &tree.levels[d] {
            for j in 0..3 {
                let (a, b) = node.connector(&t, j);
                svg.polyline(&[a.to_f64(), b.to_f64()], "#202020", stroke);
            }
        }
    }
    if let Some(c) = curve {
        let pts: Vec<[f64; 2]> = c.vertices.iter().map(|v| v.to_f64()).collect();
        svg.polyline(&pts, "#d02020", stroke);
    }
    svg.finish()
}
