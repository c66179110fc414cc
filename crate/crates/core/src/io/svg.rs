use std::fmt::Write as _;
use std::path::Path;

use super::IoError;
use crate::decomposition::LayerDecomposition;
use crate::geometry::{GridPoint, Point2};
use crate::multilayer::{LayerPlan, MoveKind};

const CELL: &str = "#9e9e9e";
const PRINT: &str = "#e41a1c";
const IDLE: &str = "#f781bf";
const ENTRY: &str = "#2ca02c";
const EXIT: &str = "#1f4fe0";
const PIXEL: &str = "#ececec";
const CURVE: &str = "#333333";

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Pixels of output per millimetre.
    pub scale: f64,
    pub margin: f64,
    pub show_cells: bool,
    pub show_terminals: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { scale: 20.0, margin: 10.0, show_cells: true, show_terminals: true }
    }
}

/// Maps millimetres to canvas units with y pointing up.
struct Canvas {
    out: String,
    min: Point2,
    max_y: f64,
    scale: f64,
    margin: f64,
}

impl Canvas {
    fn new(points: &[Point2], opts: &SvgOptions) -> Self {
        let mut c = Canvas { out: String::new(), min: Point2::new(0.0, 0.0), max_y: 0.0, scale: opts.scale, margin: opts.margin };
        let (w, h) = if points.is_empty() {
            (2.0 * opts.margin, 2.0 * opts.margin)
        } else {
            let fold = |f: fn(f64, f64) -> f64, g: fn(&Point2) -> f64, init: f64| points.iter().map(g).fold(init, f);
            let (x0, x1) = (fold(f64::min, |p| p.x, f64::INFINITY), fold(f64::max, |p| p.x, f64::NEG_INFINITY));
            let (y0, y1) = (fold(f64::min, |p| p.y, f64::INFINITY), fold(f64::max, |p| p.y, f64::NEG_INFINITY));
            c.min = Point2::new(x0, y0);
            c.max_y = y1;
            ((x1 - x0) * opts.scale + 2.0 * opts.margin, (y1 - y0) * opts.scale + 2.0 * opts.margin)
        };
        writeln!(c.out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#).unwrap();
        writeln!(c.out, r#"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="white"/>"#).unwrap();
        c
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        ((p.x - self.min.x) * self.scale + self.margin, (self.max_y - p.y) * self.scale + self.margin)
    }

    fn rect(&mut self, lo: Point2, hi: Point2, fill: &str, stroke: &str) {
        let (x, y) = self.map(Point2::new(lo.x, hi.y));
        let (w, h) = ((hi.x - lo.x) * self.scale, (hi.y - lo.y) * self.scale);
        writeln!(self.out, r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#).unwrap();
    }

    fn line(&mut self, a: Point2, b: Point2, stroke: &str, extra: &str) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        writeln!(self.out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{stroke}" stroke-width="2"{extra}/>"#).unwrap();
    }

    fn polyline(&mut self, pts: &[Point2], stroke: &str) {
        let coords: Vec<String> = pts.iter().map(|&p| self.map(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        writeln!(self.out, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#, coords.join(" ")).unwrap();
    }

    fn dot(&mut self, p: Point2, fill: &str) {
        let (x, y) = self.map(p);
        writeln!(self.out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{fill}"/>"#, self.scale * 0.15).unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn square(origin: GridPoint, size: u32, p: f64) -> (Point2, Point2) {
    let lo = Point2::new(f64::from(origin.x) * p, f64::from(origin.y) * p);
    (lo, Point2::new(lo.x + f64::from(size) * p, lo.y + f64::from(size) * p))
}

/// Print moves in red, travel dotted pink, cell outlines grey, entry and
/// exit pixels as green and blue dots.
pub fn render_layer(plan: &LayerPlan, opts: &SvgOptions) -> String {
    let p = plan.pixel_size_mm;
    let mut pts: Vec<Point2> = plan.moves.iter().flat_map(|m| [m.from, m.to]).collect();
    if opts.show_cells {
        for c in plan.cells.iter().flat_map(|c| &c.members) {
            let (lo, hi) = square(c.origin, c.size, p);
            pts.extend([lo, hi]);
        }
    }
    let mut cv = Canvas::new(&pts, opts);
    if opts.show_cells {
        for c in plan.cells.iter().flat_map(|c| &c.members) {
            let (lo, hi) = square(c.origin, c.size, p);
            cv.rect(lo, hi, "none", CELL);
        }
    }
    for m in &plan.moves {
        match m.kind {
            MoveKind::Print => cv.line(m.from, m.to, PRINT, r#" stroke-linecap="round""#),
            MoveKind::Idle => cv.line(m.from, m.to, IDLE, r#" stroke-dasharray="2,4""#),
        }
    }
    if opts.show_terminals {
        for c in &plan.cells {
            cv.dot(c.s.center_mm(p), ENTRY);
            cv.dot(c.t.center_mm(p), EXIT);
        }
    }
    cv.finish()
}

/// Region pixels, quadtree cells and the Hilbert polyline through the cell
/// centres of each component.
pub fn render_decomposition(dec: &LayerDecomposition, pixel_size: f64, opts: &SvgOptions) -> String {
    let p = pixel_size;
    let mut pts = Vec::new();
    for comp in &dec.components {
        for c in comp.sequence.cells.iter() {
            let (lo, hi) = square(c.cell.origin, c.cell.size, p);
            pts.extend([lo, hi]);
        }
    }
    let mut cv = Canvas::new(&pts, opts);
    for comp in &dec.components {
        for px in comp.region.pixels() {
            let (lo, hi) = square(px, 1, p);
            cv.rect(lo, hi, PIXEL, "none");
        }
    }
    for comp in &dec.components {
        for c in comp.sequence.cells.iter() {
            let (lo, hi) = square(c.cell.origin, c.cell.size, p);
            cv.rect(lo, hi, "none", CELL);
        }
        let centres: Vec<Point2> = comp
            .sequence
            .cells
            .iter()
            .map(|c| {
                let (lo, hi) = square(c.cell.origin, c.cell.size, p);
                Point2::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0)
            })
            .collect();
        if centres.len() > 1 {
            cv.polyline(&centres, CURVE);
        }
        if opts.show_terminals {
            for c in comp.sequence.cells.iter() {
                cv.dot(c.entry().center_mm(p), ENTRY);
                cv.dot(c.exit().center_mm(p), EXIT);
            }
        }
    }
    cv.finish()
}

pub fn emit_svg(plan: &LayerPlan, opts: &SvgOptions, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, render_layer(plan, opts))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{decompose_layer, Corner};
    use crate::geometry::IopRegion;
    use crate::multilayer::LayerMetrics;

    #[test]
    fn empty_layer_is_a_bare_canvas() {
        let plan = LayerPlan {
            layer_index: 0,
            z_index: 0,
            z_mm: 0.2,
            pixel_size_mm: 1.0,
            cells: vec![],
            moves: vec![],
            metrics: LayerMetrics::default(),
            boundary: None,
            warnings: vec![],
        };
        let svg = render_layer(&plan, &SvgOptions::default());
        assert_eq!(svg.lines().count(), 3);
        assert!(svg.starts_with("<svg ") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<line") && !svg.contains("<circle"));
    }

    #[test]
    fn decomposition_draws_one_polyline_per_component() {
        let region = IopRegion::from_ascii(GridPoint::new(0, 0), &["####..##", "####..##", "####....", "####...."]).unwrap();
        let dec = decompose_layer(&region, 4, Corner::SW, Corner::SE).unwrap();
        let svg = render_decomposition(&dec, 1.0, &SvgOptions::default());
        let cells: usize = dec.components.iter().map(|c| c.sequence.cells.len()).sum();
        assert_eq!(svg.matches("<polyline").count(), dec.components.iter().filter(|c| c.sequence.cells.len() > 1).count());
        assert_eq!(svg.matches(&format!(r#"fill="none" stroke="{CELL}""#)).count(), cells);
        assert_eq!(svg.matches(&format!(r#"fill="{PIXEL}""#)).count(), region.count());
    }
}
