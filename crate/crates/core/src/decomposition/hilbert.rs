use serde::{Deserialize, Serialize};

use super::quadtree::{NodeKind, QuadCell, Quadtree};
use super::DecompositionError;
use crate::geometry::GridPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    SW,
    SE,
    NW,
    NE,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::SW, Corner::SE, Corner::NW, Corner::NE];

    fn offsets(self) -> (bool, bool) {
        match self {
            Corner::SW => (false, false),
            Corner::SE => (true, false),
            Corner::NW => (false, true),
            Corner::NE => (true, true),
        }
    }

    /// Lattice point of this corner on a cell.
    pub fn point(self, origin: GridPoint, size: u32) -> GridPoint {
        let (east, north) = self.offsets();
        origin.offset(if east { size as i32 } else { 0 }, if north { size as i32 } else { 0 })
    }

    /// Which corner of the cell `p` is, if any.
    pub fn of(p: GridPoint, origin: GridPoint, size: u32) -> Option<Corner> {
        Corner::ALL.into_iter().find(|c| c.point(origin, size) == p)
    }

    pub fn is_diagonal_to(self, other: Corner) -> bool {
        let (a, b) = self.offsets();
        let (c, d) = other.offsets();
        a != c && b != d
    }

    /// Pixel of a cell nearest to this corner.
    pub fn nearest_pixel(self, origin: GridPoint, size: u32) -> GridPoint {
        let (east, north) = self.offsets();
        let last = size as i32 - 1;
        origin.offset(if east { last } else { 0 }, if north { last } else { 0 })
    }
}

/// A leaf cell in curve order, with the corners where the limiting Hilbert
/// curve enters and leaves it, and the chosen entry/exit pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencedCell {
    pub cell: QuadCell,
    /// First order-`q` curve index covered by the cell.
    pub hilbert_key: u64,
    pub entry_corner: Corner,
    pub exit_corner: Corner,
    pub s: Option<GridPoint>,
    pub t: Option<GridPoint>,
}

impl SequencedCell {
    pub fn entry(&self) -> GridPoint {
        self.s.expect("entry assigned")
    }

    pub fn exit(&self) -> GridPoint {
        self.t.expect("exit assigned")
    }

    pub fn is_trivial(&self) -> bool {
        self.cell.size == 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSequence {
    pub cells: Vec<SequencedCell>,
}

impl CellSequence {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn min_key(&self) -> Option<u64> {
        self.cells.iter().map(|c| c.hilbert_key).min()
    }
}

/// Orders the leaves along the Hilbert curve that enters the root cell at
/// `entry` and leaves it at `exit`. The two corners must share a side.
pub fn hilbert_order(tree: &Quadtree, entry: Corner, exit: Corner) -> Result<CellSequence, DecompositionError> {
    if entry == exit || entry.is_diagonal_to(exit) {
        return Err(DecompositionError::InvalidCorners { entry, exit });
    }
    let mut cells = Vec::with_capacity(tree.leaves.len());
    if let Some(root) = tree.root {
        let size = 1u32 << tree.root_exponent;
        let e = entry.point(tree.root_origin, size);
        let x = exit.point(tree.root_origin, size);
        walk(tree, root, e, x, 0, &mut cells);
    }
    Ok(CellSequence { cells })
}

fn walk(tree: &Quadtree, node: usize, entry: GridPoint, exit: GridPoint, key: u64, out: &mut Vec<SequencedCell>) {
    let n = &tree.nodes[node];
    let (origin, size) = (n.cell.origin, n.cell.size);
    match &n.kind {
        NodeKind::Leaf(_) => out.push(SequencedCell {
            cell: n.cell,
            hilbert_key: key,
            entry_corner: Corner::of(entry, origin, size).expect("entry on a cell corner"),
            exit_corner: Corner::of(exit, origin, size).expect("exit on a cell corner"),
            s: None,
            t: None,
        }),
        NodeKind::Internal(children) => {
            let half = (size / 2) as i32;
            // u runs along the entry/exit side, v points into the cell
            let (ux, uy) = ((exit.x - entry.x).signum() * half, (exit.y - entry.y).signum() * half);
            let (vx, vy) = if ux == 0 {
                (if entry.x == origin.x { half } else { -half }, 0)
            } else {
                (0, if entry.y == origin.y { half } else { -half })
            };
            let m_entry = entry.offset(vx, vy);
            let center = entry.offset(ux + vx, uy + vy);
            let m_exit = exit.offset(vx, vy);
            let far_entry = entry.offset(2 * vx, 2 * vy);
            let far_exit = exit.offset(2 * vx, 2 * vy);
            let legs = [
                (entry, entry, m_entry),
                (far_entry, m_entry, center),
                (far_exit, center, m_exit),
                (exit, m_exit, exit),
            ];
            let child_span = 1u64 << (2 * (n.cell.size.trailing_zeros() - 1));
            for (k, (quadrant_corner, e, x)) in legs.into_iter().enumerate() {
                let qx = quadrant_corner.x.min(center.x);
                let qy = quadrant_corner.y.min(center.y);
                let spatial = ((qx - origin.x) / half + 2 * ((qy - origin.y) / half)) as usize;
                if let Some(child) = children[spatial] {
                    walk(tree, child, e, x, key + k as u64 * child_span, out);
                }
            }
        }
    }
}

/// Entry pixel nearest the curve's entry corner, exit pixel nearest its exit.
pub fn assign_entry_exit(mut seq: CellSequence) -> CellSequence {
    for c in &mut seq.cells {
        c.s = Some(c.entry_corner.nearest_pixel(c.cell.origin, c.cell.size));
        c.t = Some(c.exit_corner.nearest_pixel(c.cell.origin, c.cell.size));
    }
    seq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::quadtree::build_quadtree;
    use crate::geometry::{vertex_parity, IopRegion};

    fn labels(seq: &CellSequence, cell_area: u64) -> Vec<u64> {
        seq.cells.iter().map(|c| c.hilbert_key / cell_area).collect()
    }

    #[test]
    fn uniform_eight_by_eight() {
        let r = IopRegion::rectangle(GridPoint::new(0, 0), 8, 8);
        let seq = hilbert_order(&build_quadtree(&r, 4), Corner::SW, Corner::SE).unwrap();
        assert_eq!(labels(&seq, 4), (0..16).collect::<Vec<_>>());
        // curve starts at (0,0), goes up first, ends at (8,0)
        assert_eq!(seq.cells[0].cell.origin, GridPoint::new(0, 0));
        assert_eq!(seq.cells[0].entry_corner, Corner::SW);
        assert_eq!(seq.cells[15].cell.origin, GridPoint::new(6, 0));
        assert_eq!(seq.cells[15].exit_corner, Corner::SE);
        assert_eq!(seq.cells[4].cell.origin, GridPoint::new(0, 4));
        for w in seq.cells.windows(2) {
            let (a, b) = (&w[0].cell, &w[1].cell);
            assert_eq!(a.origin.manhattan(b.origin), 2, "{a:?} -> {b:?}");
        }
    }

    #[test]
    fn pruned_l_shape_skips_missing_quadrant() {
        let mut r = IopRegion::rectangle(GridPoint::new(0, 0), 8, 8);
        for y in 4..8 {
            for x in 4..8 {
                r.mask[y * 8 + x] = false;
            }
        }
        let seq = hilbert_order(&build_quadtree(&r, 4), Corner::SW, Corner::SE).unwrap();
        assert_eq!(labels(&seq, 4), vec![0, 1, 2, 3, 4, 5, 6, 7, 12, 13, 14, 15]);
    }

    #[test]
    fn diagonal_corners_rejected() {
        let r = IopRegion::rectangle(GridPoint::new(0, 0), 2, 2);
        let t = build_quadtree(&r, 4);
        assert!(hilbert_order(&t, Corner::SW, Corner::NE).is_err());
        assert!(hilbert_order(&t, Corner::SW, Corner::SW).is_err());
    }

    #[test]
    fn entry_exit_pixels() {
        let r = IopRegion::rectangle(GridPoint::new(0, 0), 4, 4);
        let seq = assign_entry_exit(hilbert_order(&build_quadtree(&r, 16), Corner::SW, Corner::SE).unwrap());
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.cells[0].s, Some(GridPoint::new(0, 0)));
        assert_eq!(seq.cells[0].t, Some(GridPoint::new(3, 0)));
        let one = IopRegion::rectangle(GridPoint::new(2, 2), 1, 1);
        let seq = assign_entry_exit(hilbert_order(&build_quadtree(&one, 16), Corner::SW, Corner::SE).unwrap());
        assert!(seq.cells[0].is_trivial());
        assert_eq!(seq.cells[0].s, seq.cells[0].t);
    }

    #[test]
    fn entry_and_exit_have_opposite_parity() {
        let r = IopRegion::rectangle(GridPoint::new(0, 0), 16, 16);
        for delta in [4, 16, 64, 256] {
            let seq = assign_entry_exit(hilbert_order(&build_quadtree(&r, delta), Corner::SW, Corner::SE).unwrap());
            for c in &seq.cells {
                assert!(!c.entry_corner.is_diagonal_to(c.exit_corner));
                assert_ne!(vertex_parity(c.entry()), vertex_parity(c.exit()));
            }
        }
    }
}
