use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{GeneralPolygon, GeometryError, GridPoint, Point2};

/// Integral orthogonal region as a pixel bitmap. `origin` is the global pixel
/// index of the mask's lower-left entry; the mask is row-major from the
/// bottom row up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IopRegion {
    pub origin: GridPoint,
    pub width: u32,
    pub height: u32,
    pub mask: Vec<bool>,
}

impl IopRegion {
    /// Tight region around the given pixels. Returns `None` for an empty set.
    pub fn from_pixels<I: IntoIterator<Item = GridPoint>>(pixels: I) -> Option<Self> {
        let pixels: Vec<GridPoint> = pixels.into_iter().collect();
        let first = *pixels.first()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
        for p in &pixels {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let width = (x1 - x0 + 1) as u32;
        let height = (y1 - y0 + 1) as u32;
        let mut mask = vec![false; (width * height) as usize];
        for p in &pixels {
            mask[((p.y - y0) as u32 * width + (p.x - x0) as u32) as usize] = true;
        }
        Some(Self { origin: GridPoint::new(x0, y0), width, height, mask })
    }

    /// Full `width x height` block at `origin`.
    pub fn rectangle(origin: GridPoint, width: u32, height: u32) -> Self {
        Self { origin, width, height, mask: vec![true; (width * height) as usize] }
    }

    /// Parses rows of `#`/`.` given top row first.
    pub fn from_ascii(origin: GridPoint, rows: &[&str]) -> Option<Self> {
        let h = rows.len() as i32;
        let pixels = rows.iter().enumerate().flat_map(|(r, line)| {
            line.chars()
                .enumerate()
                .filter(|(_, c)| *c == '#')
                .map(move |(c, _)| GridPoint::new(origin.x + c as i32, origin.y + h - 1 - r as i32))
        });
        Self::from_pixels(pixels.collect::<Vec<_>>())
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        let dx = p.x - self.origin.x;
        let dy = p.y - self.origin.y;
        if dx < 0 || dy < 0 || dx >= self.width as i32 || dy >= self.height as i32 {
            return false;
        }
        self.mask[(dy as u32 * self.width + dx as u32) as usize]
    }

    /// Pixels in row-major order (bottom row first).
    pub fn pixels(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(move |(i, _)| {
            let i = i as u32;
            GridPoint::new(
                self.origin.x + (i % self.width) as i32,
                self.origin.y + (i / self.width) as i32,
            )
        })
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Pixel-wise union.
    pub fn union(&self, other: &IopRegion) -> IopRegion {
        IopRegion::from_pixels(self.pixels().chain(other.pixels()).collect::<Vec<_>>())
            .expect("union of nonempty regions")
    }
}

/// Largest set of pixels whose closed squares lie inside the polygon.
///
/// A pixel is kept iff its four corners are inside (boundary inclusive) and
/// no polygon edge passes through its open interior.
pub fn rasterize(polygon: &GeneralPolygon, pixel_size: f64) -> Result<IopRegion, GeometryError> {
    if !(pixel_size > 0.0) || !pixel_size.is_finite() {
        return Err(GeometryError::BadPixelSize(pixel_size));
    }
    let eps = 1e-9 * pixel_size;
    let (min_x, min_y, max_x, max_y) = polygon.bounds();
    let i0 = (min_x / pixel_size).floor() as i32;
    let j0 = (min_y / pixel_size).floor() as i32;
    let i1 = (max_x / pixel_size).ceil() as i32;
    let j1 = (max_y / pixel_size).ceil() as i32;
    let cols = (i1 - i0).max(0) as usize;
    let rows = (j1 - j0).max(0) as usize;

    // corner containment on the (cols+1) x (rows+1) lattice
    let mut corner = vec![false; (cols + 1) * (rows + 1)];
    for r in 0..=rows {
        for c in 0..=cols {
            let p = Point2::new(
                f64::from(i0 + c as i32) * pixel_size,
                f64::from(j0 + r as i32) * pixel_size,
            );
            corner[r * (cols + 1) + c] = polygon.contains(p, eps);
        }
    }
    let at = |c: usize, r: usize| corner[r * (cols + 1) + c];

    let mut pixels = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if !(at(c, r) && at(c + 1, r) && at(c, r + 1) && at(c + 1, r + 1)) {
                continue;
            }
            let x0 = f64::from(i0 + c as i32) * pixel_size;
            let y0 = f64::from(j0 + r as i32) * pixel_size;
            if polygon.crosses_open_box(x0, y0, x0 + pixel_size, y0 + pixel_size, eps) {
                continue;
            }
            pixels.push(GridPoint::new(i0 + c as i32, j0 + r as i32));
        }
    }
    IopRegion::from_pixels(pixels).ok_or(GeometryError::EmptyRaster { pixel_size })
}

/// Splits a region into its 4-connected components, ordered by their
/// smallest pixel.
pub fn connected_components(region: &IopRegion) -> Vec<IopRegion> {
    let w = region.width as usize;
    let h = region.height as usize;
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if !region.mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut comp = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            comp.push(GridPoint::new(region.origin.x + x as i32, region.origin.y + y as i32));
            let mut push = |j: usize| {
                if region.mask[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                push(i - 1);
            }
            if x + 1 < w {
                push(i + 1);
            }
            if y > 0 {
                push(i - w);
            }
            if y + 1 < h {
                push(i + w);
            }
        }
        out.extend(IopRegion::from_pixels(comp));
    }
    out
}
