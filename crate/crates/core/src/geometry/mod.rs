//! Layer geometry: general polygons, their largest pixel-aligned interior
//! regions, and the 4-neighbour dual graphs built over those pixels.
//!
//! Pixel `(i, j)` covers `[i*p, (i+1)*p] x [j*p, (j+1)*p]` in millimetres for
//! pixel size `p`; the raster grid is anchored at the world origin so that
//! identical polygons on different layers land on identical pixels.

mod dual;
mod layers;
mod polygon;
mod raster;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use dual::{build_dual_graph, DualGraph, Edge, EdgeId, VertexId, DIRS};
pub use layers::{load_layer_stack, parse_layer_stack, write_layer_stack, Layer, LayerStack};
pub use polygon::{GeneralPolygon, Ring};
pub(crate) use polygon::segments_intersect;
pub use raster::{connected_components, rasterize, IopRegion};

/// Integer lattice point. Used for pixel corners and for dual vertices, which
/// are identified with the index pair of the pixel whose centre they sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: i32,
    pub y: i32,
}

impl GridPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: GridPoint) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// Centre of this pixel in millimetres.
    pub fn center_mm(self, pixel_size: f64) -> Point2 {
        Point2::new(
            (f64::from(self.x) + 0.5) * pixel_size,
            (f64::from(self.y) + 0.5) * pixel_size,
        )
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Colour class of a lattice point: even iff `x + y` is even.
pub fn vertex_parity(v: GridPoint) -> Parity {
    if (i64::from(v.x) + i64::from(v.y)).rem_euclid(2) == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Real-valued point in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("layer stack parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("layer {layer}: {message}")]
    InvalidLayer { layer: usize, message: String },
    #[error("layer stack contains no layers")]
    EmptyStack,
    #[error("polygon rasterizes to no pixels at pixel size {pixel_size}")]
    EmptyRaster { pixel_size: f64 },
    #[error("pixel size must be positive, got {0}")]
    BadPixelSize(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_examples() {
        assert_eq!(vertex_parity(GridPoint::new(0, 0)), Parity::Even);
        assert_eq!(vertex_parity(GridPoint::new(1, 2)), Parity::Odd);
        assert_eq!(vertex_parity(GridPoint::new(3, 5)), Parity::Even);
        assert_eq!(vertex_parity(GridPoint::new(-1, 0)), Parity::Odd);
    }

    #[test]
    fn manhattan_distance() {
        assert_eq!(GridPoint::new(3, 4).manhattan(GridPoint::new(4, 4)), 1);
        assert_eq!(GridPoint::new(2, 5).manhattan(GridPoint::new(6, 1)), 8);
    }
}
