//! Quadtree decomposition of a layer's pixel region and Hilbert ordering of
//! the resulting leaf cells.

mod hilbert;
mod quadtree;

pub use hilbert::{assign_entry_exit, hilbert_order, CellSequence, Corner, SequencedCell};
pub use quadtree::{build_quadtree, build_quadtree_in, enclosing_exponent, CellStatus, QuadCell, Quadtree};

use crate::geometry::{connected_components, GridPoint, IopRegion};

#[derive(Debug, thiserror::Error)]
pub enum DecompositionError {
    #[error("entry corner {entry:?} and exit corner {exit:?} must be distinct and share a side")]
    InvalidCorners { entry: Corner, exit: Corner },
}

/// Per-component quadtrees over one shared root cell, plus the combined
/// cell order.
#[derive(Debug, Clone)]
pub struct LayerDecomposition {
    pub root_origin: GridPoint,
    pub root_exponent: u32,
    pub components: Vec<ComponentDecomposition>,
}

#[derive(Debug, Clone)]
pub struct ComponentDecomposition {
    pub region: IopRegion,
    pub tree: Quadtree,
    pub sequence: CellSequence,
}

impl LayerDecomposition {
    pub fn root_size(&self) -> u32 {
        1 << self.root_exponent
    }

    /// All cells in visiting order, components concatenated.
    pub fn cells(&self) -> impl Iterator<Item = &SequencedCell> {
        self.components.iter().flat_map(|c| c.sequence.cells.iter())
    }
}

/// Splits the layer region into components, builds each component's quadtree
/// over the layer's root cell, orders its leaves along the curve, assigns
/// entry/exit pixels, and orders components by their first curve index.
pub fn decompose_layer(
    region: &IopRegion,
    delta: u64,
    entry: Corner,
    exit: Corner,
) -> Result<LayerDecomposition, DecompositionError> {
    let root_exponent = enclosing_exponent(region.width.max(region.height));
    let root_origin = region.origin;
    let mut components = Vec::new();
    for comp in connected_components(region) {
        let tree = build_quadtree_in(&comp, root_origin, root_exponent, delta);
        let sequence = assign_entry_exit(hilbert_order(&tree, entry, exit)?);
        components.push(ComponentDecomposition { region: comp, tree, sequence });
    }
    components.sort_by_key(|c| c.sequence.min_key());
    Ok(LayerDecomposition { root_origin, root_exponent, components })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_follow_curve_order() {
        // two blocks; the curve from SW to SE visits the north-west block
        // before the south-east one
        let r = IopRegion::from_ascii(
            GridPoint::new(0, 0),
            &["##..", "##..", "....", "..##"],
        )
        .unwrap();
        let d = decompose_layer(&r, 4, Corner::SW, Corner::SE).unwrap();
        assert_eq!(d.components.len(), 2);
        assert_eq!(d.components[0].region.origin, GridPoint::new(0, 2));
        assert_eq!(d.components[1].region.origin, GridPoint::new(2, 0));
        let keys: Vec<u64> = d.cells().map(|c| c.hilbert_key).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
