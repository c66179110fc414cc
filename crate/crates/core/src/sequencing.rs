//! Joining runs of edge-adjacent cells into larger subproblems and moving
//! entry/exit pixels to shorten the travel between them.
//!
//! Entry/exit updates keep each pixel's colour class and keep the entry in
//! the first member cell and the exit in the last one, which preserves the
//! existence of a Hamiltonian entry-exit path in every joined cell.

use serde::{Deserialize, Serialize};

use crate::decomposition::{CellSequence, QuadCell, SequencedCell};
use crate::geometry::{build_dual_graph, vertex_parity, DualGraph, GridPoint, IopRegion};

#[derive(Debug, thiserror::Error)]
pub enum SequencingError {
    #[error("max joined area {delta} is smaller than a cell of area {cell_area}")]
    DeltaTooSmall { delta: u64, cell_area: u64 },
    #[error("cell sequence has unassigned entry/exit pixels")]
    Unassigned,
}

pub fn rectilinear_gap(t_prev: GridPoint, s_next: GridPoint) -> u32 {
    t_prev.manhattan(s_next)
}

/// Consecutive run of cells solved as one subproblem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinedCell {
    pub members: Vec<SequencedCell>,
    pub region: IopRegion,
    pub s: GridPoint,
    pub t: GridPoint,
}

impl JoinedCell {
    fn from_members(members: Vec<SequencedCell>) -> Self {
        let region = IopRegion::from_pixels(members.iter().flat_map(|m| m.cell.pixels()).collect::<Vec<_>>())
            .expect("joined cell has pixels");
        let s = members[0].entry();
        let t = members[members.len() - 1].exit();
        Self { members, region, s, t }
    }

    pub fn area(&self) -> u64 {
        self.members.iter().map(|m| m.cell.area()).sum()
    }

    /// Per-member `(s_k, t_k)` as assigned from the curve.
    pub fn constituent_entries(&self) -> Vec<(GridPoint, GridPoint)> {
        self.members.iter().map(|m| (m.entry(), m.exit())).collect()
    }

    pub fn first(&self) -> &QuadCell {
        &self.members[0].cell
    }

    pub fn last(&self) -> &QuadCell {
        &self.members[self.members.len() - 1].cell
    }

    /// Dual graph of the joined region with unit weights and `s`, `t` set.
    pub fn dual_graph(&self) -> DualGraph {
        let mut g = build_dual_graph(&self.region);
        g.set_terminals(self.s, self.t).expect("entry and exit inside the joined region");
        g
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinedSequence {
    pub items: Vec<JoinedCell>,
}

impl JoinedSequence {
    /// Member cells in order.
    pub fn flatten(&self) -> impl Iterator<Item = &SequencedCell> {
        self.items.iter().flat_map(|j| j.members.iter())
    }

    pub fn gaps(&self) -> impl Iterator<Item = (GridPoint, GridPoint)> + '_ {
        self.items.windows(2).map(|w| (w[0].t, w[1].s))
    }

    /// Total of `gap - 1` over connections longer than one unit.
    pub fn idle_units(&self) -> u64 {
        self.gaps().map(|(a, b)| u64::from(rectilinear_gap(a, b).saturating_sub(1))).sum()
    }

    /// Straight-line travel length over connections longer than one unit.
    pub fn idle_length(&self) -> f64 {
        self.gaps()
            .filter(|(a, b)| rectilinear_gap(*a, *b) > 1)
            .map(|(a, b)| f64::from(a.x - b.x).hypot(f64::from(a.y - b.y)))
            .sum()
    }
}

/// Splits the sequence into runs whose consecutive exit/entry pixels are
/// unit distance apart, then cuts each run greedily into pieces of total
/// area at most `max_area`.
pub fn join_cells(seq: &CellSequence, max_area: u64) -> Result<JoinedSequence, SequencingError> {
    if seq.cells.iter().any(|c| c.s.is_none() || c.t.is_none()) {
        return Err(SequencingError::Unassigned);
    }
    if let Some(big) = seq.cells.iter().map(|c| c.cell.area()).max() {
        if big > max_area {
            return Err(SequencingError::DeltaTooSmall { delta: max_area, cell_area: big });
        }
    }
    let mut items = Vec::new();
    let mut current: Vec<SequencedCell> = Vec::new();
    let mut area = 0;
    for cell in &seq.cells {
        if let Some(prev) = current.last() {
            let adjacent = rectilinear_gap(prev.exit(), cell.entry()) == 1;
            if !adjacent || area + cell.cell.area() > max_area {
                items.push(JoinedCell::from_members(std::mem::take(&mut current)));
                area = 0;
            }
        }
        area += cell.cell.area();
        current.push(cell.clone());
    }
    if !current.is_empty() {
        items.push(JoinedCell::from_members(current));
    }
    Ok(JoinedSequence { items })
}

/// Corner pixels of a cell with the same colour class as `like`.
fn corner_candidates(cell: &QuadCell, like: GridPoint) -> Vec<GridPoint> {
    let last = cell.size as i32 - 1;
    let mut out: Vec<GridPoint> = [(0, 0), (last, 0), (0, last), (last, last)]
        .into_iter()
        .map(|(dx, dy)| cell.origin.offset(dx, dy))
        .filter(|p| vertex_parity(*p) == vertex_parity(like))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn squared(a: GridPoint, b: GridPoint) -> i64 {
    let dx = i64::from(a.x - b.x);
    let dy = i64::from(a.y - b.y);
    dx * dx + dy * dy
}

/// Re-picks each connection's exit pixel (in the previous joined cell's last
/// member) and entry pixel (in the next one's first member) among
/// colour-preserving corner pixels.
///
/// Connections are independent because each joined cell's entry and exit
/// live in different choice sets, so every connection is optimised on its
/// own: the pair with the smallest rectilinear gap, then the shortest
/// straight-line travel, then the lexicographically smallest points, among
/// pairs that are no worse than the current pair in either measure.
pub fn update_entry_exit(mut jseq: JoinedSequence) -> JoinedSequence {
    for i in 1..jseq.items.len() {
        let (t0, s0) = (jseq.items[i - 1].t, jseq.items[i].s);
        let base_gap = rectilinear_gap(t0, s0);
        let base_sq = squared(t0, s0);
        let exits = corner_candidates(jseq.items[i - 1].last(), t0);
        let entries = corner_candidates(jseq.items[i].first(), s0);
        let mut best = (base_gap, base_sq, t0, s0);
        for &t in &exits {
            for &s in &entries {
                let cand = (rectilinear_gap(t, s), squared(t, s), t, s);
                if cand.0 <= base_gap && cand.1 <= base_sq && cand < best {
                    best = cand;
                }
            }
        }
        jseq.items[i - 1].t = best.2;
        jseq.items[i].s = best.3;
    }
    jseq
}
