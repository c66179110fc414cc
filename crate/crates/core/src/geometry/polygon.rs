use serde::{Deserialize, Serialize};

use super::Point2;

/// Closed ring stored without the repeated closing vertex.
pub type Ring = Vec<Point2>;

/// Polygon with holes in millimetres. Outer ring counterclockwise, holes
/// clockwise; constructors normalise orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralPolygon {
    pub outer: Ring,
    #[serde(default)]
    pub holes: Vec<Ring>,
}

pub(crate) fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc * 0.5
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point2::new(a.x + t * dx, a.y + t * dy))
}

fn ring_edges(ring: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    let n = ring.len();
    (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
}

/// Even-odd crossing test; boundary handling is the caller's job.
fn ring_contains(ring: &[Point2], p: Point2) -> bool {
    let mut inside = false;
    for (a, b) in ring_edges(ring) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn ring_self_intersects(ring: &[Point2]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

fn rings_cross(r1: &[Point2], r2: &[Point2]) -> bool {
    ring_edges(r1).any(|(a, b)| ring_edges(r2).any(|(c, d)| segments_intersect(a, b, c, d)))
}

fn normalize_ring(mut ring: Ring) -> Result<Ring, String> {
    if ring.len() >= 2 && ring.first() == ring.last() {
        ring.pop();
    }
    ring.dedup();
    if ring.len() < 3 {
        return Err(format!("ring has {} distinct vertices, need at least 3", ring.len()));
    }
    if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err("ring contains a non-finite coordinate".into());
    }
    if ring_self_intersects(&ring) {
        return Err("self-intersecting ring".into());
    }
    if signed_area(&ring) == 0.0 {
        return Err("ring has zero area".into());
    }
    Ok(ring)
}

impl GeneralPolygon {
    /// Validates and orients the rings.
    pub fn new(outer: Ring, holes: Vec<Ring>) -> Result<Self, String> {
        let mut outer = normalize_ring(outer).map_err(|e| format!("outer ring: {e}"))?;
        if signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        let mut out_holes: Vec<Ring> = Vec::with_capacity(holes.len());
        for (k, h) in holes.into_iter().enumerate() {
            let mut h = normalize_ring(h).map_err(|e| format!("hole {k}: {e}"))?;
            if signed_area(&h) > 0.0 {
                h.reverse();
            }
            if rings_cross(&outer, &h) {
                return Err(format!("hole {k} crosses the outer ring"));
            }
            if !ring_contains(&outer, h[0]) {
                return Err(format!("hole {k} lies outside the outer ring"));
            }
            for (j, other) in out_holes.iter().enumerate() {
                if rings_cross(other, &h) {
                    return Err(format!("hole {k} crosses hole {j}"));
                }
            }
            out_holes.push(h);
        }
        Ok(Self { outer, holes: out_holes })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            outer: vec![
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1),
                Point2::new(x0, y1),
            ],
            holes: Vec::new(),
        }
    }

    /// Regular `segments`-gon inscribed in the circle of the given radius.
    pub fn regular(center: Point2, radius: f64, segments: usize) -> Self {
        let outer = (0..segments)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / segments as f64;
                Point2::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        Self { outer, holes: Vec::new() }
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.rings().flat_map(|r| ring_edges(r))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.outer) + self.holes.iter().map(|h| signed_area(h)).sum::<f64>()
    }

    /// `(min_x, min_y, max_x, max_y)` of the outer ring.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.outer.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y)),
        )
    }

    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed containment: points within `eps` of the boundary count as inside.
    pub fn contains(&self, p: Point2, eps: f64) -> bool {
        if self.distance_to_boundary(p) <= eps {
            return true;
        }
        ring_contains(&self.outer, p) && !self.holes.iter().any(|h| ring_contains(h, p))
    }

    /// Whether any boundary edge meets the open box shrunk by `eps`.
    pub fn crosses_open_box(&self, x0: f64, y0: f64, x1: f64, y1: f64, eps: f64) -> bool {
        let (x0, y0, x1, y1) = (x0 + eps, y0 + eps, x1 - eps, y1 - eps);
        self.edges().any(|(a, b)| segment_meets_open_box(a, b, x0, y0, x1, y1))
    }

    /// Distance along an axis-parallel ray from `origin` to the first boundary
    /// hit beyond `min_t`.
    pub fn ray_hit(&self, origin: Point2, dir: (f64, f64), min_t: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (a, b) in self.edges() {
            if let Some(t) = ray_segment(origin, dir, a, b) {
                if t > min_t && best.is_none_or(|bt| t < bt) {
                    best = Some(t);
                }
            }
        }
        best
    }
}

fn segment_meets_open_box(a: Point2, b: Point2, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    if x0 >= x1 || y0 >= y1 {
        return false;
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (p, d, mn, mx) in [(a.x, b.x - a.x, x0, x1), (a.y, b.y - a.y, y0, y1)] {
        if d == 0.0 {
            if !(p > mn && p < mx) {
                return false;
            }
        } else {
            let ta = (mn - p) / d;
            let tb = (mx - p) / d;
            lo = lo.max(ta.min(tb));
            hi = hi.min(ta.max(tb));
        }
    }
    lo < hi && lo < 1.0 && hi > 0.0
}

fn ray_segment(o: Point2, dir: (f64, f64), a: Point2, b: Point2) -> Option<f64> {
    let (dx, dy) = dir;
    let ex = b.x - a.x;
    let ey = b.y - a.y;
    let denom = dx * ey - dy * ex;
    if denom == 0.0 {
        return None;
    }
    let wx = a.x - o.x;
    let wy = a.y - o.y;
    let t = (wx * ey - wy * ex) / denom;
    let u = (wx * dy - wy * dx) / denom;
    if (0.0..=1.0).contains(&u) && t >= 0.0 {
        Some(t)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Ring {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn orientation_is_normalised() {
        let cw = pts(&[(0.0, 0.0), (0.0, 4.0), (4.0, 4.0), (4.0, 0.0)]);
        let hole_ccw = pts(&[(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]);
        let p = GeneralPolygon::new(cw, vec![hole_ccw]).unwrap();
        assert!(signed_area(&p.outer) > 0.0);
        assert!(signed_area(&p.holes[0]) < 0.0);
        assert!((p.area() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn bowtie_is_rejected() {
        let bow = pts(&[(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)]);
        let err = GeneralPolygon::new(bow, vec![]).unwrap_err();
        assert!(err.contains("self-intersecting"), "{err}");
    }

    #[test]
    fn closing_vertex_is_stripped() {
        let r = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)]);
        let p = GeneralPolygon::new(r, vec![]).unwrap();
        assert_eq!(p.outer.len(), 3);
    }

    #[test]
    fn open_box_crossing() {
        let sq = GeneralPolygon::rectangle(0.0, 0.0, 8.0, 8.0);
        // edges lie on pixel boundaries, not in the interior
        assert!(!sq.crosses_open_box(0.0, 0.0, 1.0, 1.0, 1e-9));
        assert!(!sq.crosses_open_box(7.0, 7.0, 8.0, 8.0, 1e-9));
        assert!(sq.crosses_open_box(7.5, 2.0, 8.5, 3.0, 1e-9));
    }

    #[test]
    fn ray_hits_nearest_edge() {
        let sq = GeneralPolygon::rectangle(0.0, 0.0, 4.0, 4.0);
        let t = sq.ray_hit(Point2::new(1.0, 1.0), (1.0, 0.0), 0.0).unwrap();
        assert!((t - 3.0).abs() < 1e-12);
        let t = sq.ray_hit(Point2::new(1.0, 1.5), (0.0, -1.0), 0.0).unwrap();
        assert!((t - 1.5).abs() < 1e-12);
    }

    #[test]
    fn closed_containment_includes_boundary() {
        let sq = GeneralPolygon::rectangle(0.0, 0.0, 2.0, 2.0);
        assert!(sq.contains(Point2::new(0.0, 0.0), 1e-12));
        assert!(sq.contains(Point2::new(1.0, 2.0), 1e-12));
        assert!(!sq.contains(Point2::new(2.1, 1.0), 1e-12));
    }
}
