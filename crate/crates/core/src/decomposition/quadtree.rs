use serde::{Deserialize, Serialize};

use crate::geometry::{GridPoint, IopRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellStatus {
    FullyInside,
    Mixed,
}

/// Square cell of the quadtree, in pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadCell {
    pub origin: GridPoint,
    pub size: u32,
    pub depth: u32,
    pub status: CellStatus,
}

impl QuadCell {
    pub fn area(&self) -> u64 {
        u64::from(self.size) * u64::from(self.size)
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        let s = self.size as i32;
        p.x >= self.origin.x && p.y >= self.origin.y && p.x < self.origin.x + s && p.y < self.origin.y + s
    }

    pub fn pixels(&self) -> impl Iterator<Item = GridPoint> + '_ {
        let s = self.size as i32;
        (0..s).flat_map(move |dy| (0..s).map(move |dx| self.origin.offset(dx, dy)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NodeKind {
    Leaf(usize),
    /// Children in spatial order SW, SE, NW, NE; `None` where dropped.
    Internal([Option<usize>; 4]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Node {
    pub cell: QuadCell,
    pub kind: NodeKind,
}

/// Quadtree over a `2^q x 2^q` root cell. Only cells fully inside the region
/// survive as leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quadtree {
    pub root_origin: GridPoint,
    pub root_exponent: u32,
    pub delta: u64,
    pub leaves: Vec<QuadCell>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: Option<usize>,
}

/// Smallest `q` with `2^q >= extent`.
pub fn enclosing_exponent(extent: u32) -> u32 {
    extent.max(1).next_power_of_two().trailing_zeros()
}

/// Summed-area table over a region's bounding box.
struct PixelCounter<'a> {
    region: &'a IopRegion,
    sums: Vec<u64>,
}

impl<'a> PixelCounter<'a> {
    fn new(region: &'a IopRegion) -> Self {
        let w = region.width as usize;
        let h = region.height as usize;
        let mut sums = vec![0u64; (w + 1) * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                let m = u64::from(region.mask[y * w + x]);
                sums[(y + 1) * (w + 1) + x + 1] =
                    m + sums[y * (w + 1) + x + 1] + sums[(y + 1) * (w + 1) + x] - sums[y * (w + 1) + x];
            }
        }
        Self { region, sums }
    }

    fn count(&self, origin: GridPoint, size: u32) -> u64 {
        let w = self.region.width as i64;
        let h = self.region.height as i64;
        let x0 = (i64::from(origin.x) - i64::from(self.region.origin.x)).clamp(0, w) as usize;
        let y0 = (i64::from(origin.y) - i64::from(self.region.origin.y)).clamp(0, h) as usize;
        let x1 = (i64::from(origin.x) + i64::from(size) - i64::from(self.region.origin.x)).clamp(0, w) as usize;
        let y1 = (i64::from(origin.y) + i64::from(size) - i64::from(self.region.origin.y)).clamp(0, h) as usize;
        let stride = self.region.width as usize + 1;
        self.sums[y1 * stride + x1] + self.sums[y0 * stride + x0]
            - self.sums[y0 * stride + x1]
            - self.sums[y1 * stride + x0]
    }
}

/// Quadtree rooted at the region's own bounding-box corner.
pub fn build_quadtree(region: &IopRegion, delta: u64) -> Quadtree {
    let q = enclosing_exponent(region.width.max(region.height));
    build_quadtree_in(region, region.origin, q, delta)
}

/// Quadtree over an explicit root cell, which must cover the region.
///
/// Cells are split until fully inside or fully outside; outside cells are
/// dropped; inside cells with area above `delta` are split further.
pub fn build_quadtree_in(region: &IopRegion, root_origin: GridPoint, root_exponent: u32, delta: u64) -> Quadtree {
    assert!(delta >= 1, "delta must be positive");
    let counter = PixelCounter::new(region);
    let mut tree = Quadtree {
        root_origin,
        root_exponent,
        delta,
        leaves: Vec::new(),
        nodes: Vec::new(),
        root: None,
    };
    tree.root = grow(&mut tree, &counter, root_origin, 1 << root_exponent, 0);
    tree
}

fn grow(tree: &mut Quadtree, counter: &PixelCounter<'_>, origin: GridPoint, size: u32, depth: u32) -> Option<usize> {
    let count = counter.count(origin, size);
    if count == 0 {
        return None;
    }
    let area = u64::from(size) * u64::from(size);
    let full = count == area;
    let status = if full { CellStatus::FullyInside } else { CellStatus::Mixed };
    let cell = QuadCell { origin, size, depth, status };
    if full && (area <= tree.delta || size == 1) {
        let leaf = tree.leaves.len();
        tree.leaves.push(cell);
        tree.nodes.push(Node { cell, kind: NodeKind::Leaf(leaf) });
        return Some(tree.nodes.len() - 1);
    }
    let half = size / 2;
    let mut children = [None; 4];
    for (k, child) in children.iter_mut().enumerate() {
        let o = origin.offset((k % 2) as i32 * half as i32, (k / 2) as i32 * half as i32);
        *child = grow(tree, counter, o, half, depth + 1);
    }
    tree.nodes.push(Node { cell, kind: NodeKind::Internal(children) });
    Some(tree.nodes.len() - 1)
}
