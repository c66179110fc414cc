//! Merging the cycles of a relaxed solution into one entry-exit path with
//! unit-square 2-opt exchanges.
//!
//! An exchange at a unit square whose two opposite sides belong to
//! different tours deletes those sides and inserts the other two, which
//! keeps every degree and fuses the two tours.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};

use petgraph::unionfind::UnionFind;

use super::model::is_turn;
use super::{CycleCover, PathSolution, SolveMethod, SolverError};
use crate::geometry::{DualGraph, GridPoint, VertexId};

#[derive(Debug, Clone, Copy)]
struct Exchange {
    corner: GridPoint,
    horizontal: bool,
    remove: [(VertexId, VertexId); 2],
    add: [(VertexId, VertexId); 2],
    cost: f64,
}

impl Exchange {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.corner.cmp(&other.corner))
            .then(self.horizontal.cmp(&other.horizontal))
    }
}

struct Work<'g> {
    graph: &'g DualGraph,
    alpha: f64,
    nbr: Vec<Vec<VertexId>>,
}

impl<'g> Work<'g> {
    fn new(cover: &CycleCover, graph: &'g DualGraph, alpha: f64) -> Self {
        let mut nbr = vec![Vec::new(); graph.vertex_count()];
        for (a, b) in cover.edges() {
            let (a, b) = (graph.id_of(a).expect("cover vertex in graph"), graph.id_of(b).expect("cover vertex in graph"));
            nbr[a].push(b);
            nbr[b].push(a);
        }
        Self { graph, alpha, nbr }
    }

    fn has(&self, a: VertexId, b: VertexId) -> bool {
        self.nbr[a].contains(&b)
    }

    fn remove(&mut self, a: VertexId, b: VertexId) {
        self.nbr[a].retain(|&x| x != b);
        self.nbr[b].retain(|&x| x != a);
    }

    fn add(&mut self, a: VertexId, b: VertexId) {
        self.nbr[a].push(b);
        self.nbr[b].push(a);
    }

    fn turn(&self, v: VertexId) -> u32 {
        let n = &self.nbr[v];
        let p = |x: VertexId| self.graph.point(x);
        u32::from(n.len() == 2 && is_turn(p(v), p(n[0]), p(n[1])))
    }

    fn weight(&self, a: VertexId, b: VertexId) -> f64 {
        self.graph.weight(self.graph.edge_between(a, b).expect("square side is a graph edge"))
    }

    /// Component label per vertex, numbered in order of smallest vertex id.
    fn labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.nbr.len()];
        let mut next = 0;
        for start in 0..self.nbr.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &u in &self.nbr[v] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        queue.push_back(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    fn apply(&mut self, x: &Exchange) {
        for (a, b) in x.remove {
            self.remove(a, b);
        }
        for (a, b) in x.add {
            self.add(a, b);
        }
    }

    fn revert(&mut self, x: &Exchange) {
        for (a, b) in x.add {
            self.remove(a, b);
        }
        for (a, b) in x.remove {
            self.add(a, b);
        }
    }

    /// Exchanges whose removed sides lie in two different components.
    fn candidates(&mut self, label: &[usize]) -> Vec<(usize, usize, Exchange)> {
        let g = self.graph;
        let mut out = Vec::new();
        for a in 0..g.vertex_count() {
            let pa = g.point(a);
            let (Some(b), Some(c), Some(d)) =
                (g.id_of(pa.offset(1, 0)), g.id_of(pa.offset(1, 1)), g.id_of(pa.offset(0, 1)))
            else {
                continue;
            };
            for horizontal in [false, true] {
                let (remove, add) = if horizontal {
                    ([(a, b), (d, c)], [(a, d), (b, c)])
                } else {
                    ([(a, d), (b, c)], [(a, b), (d, c)])
                };
                if !remove.iter().all(|&(p, q)| self.has(p, q)) {
                    continue;
                }
                let (l0, l1) = (label[remove[0].0], label[remove[1].0]);
                if l0 == l1 {
                    continue;
                }
                let mut x = Exchange { corner: pa, horizontal, remove, add, cost: 0.0 };
                let before: u32 = [a, b, c, d].iter().map(|&v| self.turn(v)).sum();
                self.apply(&x);
                let after: u32 = [a, b, c, d].iter().map(|&v| self.turn(v)).sum();
                self.revert(&x);
                let dw: f64 = add.iter().map(|&(p, q)| self.weight(p, q)).sum::<f64>()
                    - remove.iter().map(|&(p, q)| self.weight(p, q)).sum::<f64>();
                x.cost = self.alpha * dw + (1.0 - self.alpha) * (f64::from(after) - f64::from(before));
                out.push((l0, l1, x));
            }
        }
        out
    }

    fn to_cover(&self, optimal: bool) -> CycleCover {
        let edges: Vec<(VertexId, VertexId)> =
            (0..self.nbr.len()).flat_map(|a| self.nbr[a].iter().filter(move |&&b| a < b).map(move |&b| (a, b))).collect();
        let mut cover = CycleCover::from_edges(self.graph, &edges).expect("exchanges keep a valid cover");
        cover.optimal = optimal;
        cover
    }
}

/// Fuses cycles with one another along a minimum spanning forest of the
/// cycle adjacency graph, repeating until no two cycles share an exchange
/// square. The path is left alone.
pub fn join_cycles(cover: CycleCover, graph: &DualGraph, alpha: f64) -> CycleCover {
    if cover.cycles.len() < 2 {
        return cover;
    }
    let mut work = Work::new(&cover, graph, alpha);
    let s = graph.s.expect("entry set");
    loop {
        let label = work.labels();
        let path_label = label[s];
        // cheapest exchange per pair of cycles
        let mut best: BTreeMap<(usize, usize), Exchange> = BTreeMap::new();
        for (l0, l1, x) in work.candidates(&label) {
            if l0 == path_label || l1 == path_label {
                continue;
            }
            let key = (l0.min(l1), l0.max(l1));
            match best.get(&key) {
                Some(y) if y.cmp_key(&x) != Ordering::Greater => {}
                _ => {
                    best.insert(key, x);
                }
            }
        }
        if best.is_empty() {
            break;
        }
        let mut edges: Vec<((usize, usize), Exchange)> = best.into_iter().collect();
        edges.sort_by(|a, b| a.1.cmp_key(&b.1).then(a.0.cmp(&b.0)));
        let count = label.iter().max().map_or(0, |m| m + 1);
        let mut forest = UnionFind::<usize>::new(count);
        let mut merged = 0;
        for ((l0, l1), x) in edges {
            if forest.equiv(l0, l1) || !x.remove.iter().all(|&(p, q)| work.has(p, q)) {
                continue;
            }
            work.apply(&x);
            forest.union(l0, l1);
            merged += 1;
        }
        if merged == 0 {
            break;
        }
    }
    work.to_cover(false)
}

/// Folds the remaining cycles into the path one at a time, taking the
/// cycle with the fewest exchange squares against the path first and
/// merging it through its cheapest square.
pub fn join_cycles_with_path(cover: CycleCover, graph: &DualGraph, alpha: f64) -> Result<PathSolution, SolverError> {
    let optimal = cover.optimal && cover.cycles.is_empty();
    let mut work = Work::new(&cover, graph, alpha);
    let s = graph.s.expect("entry set");
    let mut cover = cover;
    loop {
        if cover.cycles.is_empty() {
            let mut sol = PathSolution::evaluate(graph, &cover.path, alpha, SolveMethod::Repair)?;
            sol.optimal = optimal;
            return Ok(sol);
        }
        let label = work.labels();
        let path_label = label[s];
        // per cycle: (square count, cheapest exchange)
        let mut per_cycle: BTreeMap<usize, (usize, Exchange)> = BTreeMap::new();
        for (l0, l1, x) in work.candidates(&label) {
            let other = match (l0 == path_label, l1 == path_label) {
                (true, false) => l1,
                (false, true) => l0,
                _ => continue,
            };
            per_cycle
                .entry(other)
                .and_modify(|(n, best)| {
                    *n += 1;
                    if x.cmp_key(best) == Ordering::Less {
                        *best = x;
                    }
                })
                .or_insert((1, x));
        }
        let Some((_, (_, pick))) = per_cycle
            .into_iter()
            .min_by(|a, b| a.1 .0.cmp(&b.1 .0).then(a.1 .1.cmp_key(&b.1 .1)).then(a.0.cmp(&b.0)))
        else {
            return Err(SolverError::NonHamiltonian { cycles: cover.cycles.len() });
        };
        work.apply(&pick);
        cover = work.to_cover(false);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_dual_graph, IopRegion};

    fn p(x: i32, y: i32) -> GridPoint {
        GridPoint::new(x, y)
    }

    fn square(x: i32, y: i32) -> Vec<GridPoint> {
        vec![p(x, y), p(x + 1, y), p(x + 1, y + 1), p(x, y + 1)]
    }

    fn graph(w: u32, h: u32, s: GridPoint, t: GridPoint) -> DualGraph {
        let mut g = build_dual_graph(&IopRegion::rectangle(p(0, 0), w, h));
        g.set_terminals(s, t).unwrap();
        g
    }

    /// Every single exchange applicable to `cover`, with the cover it yields.
    fn all_single_exchanges(cover: &CycleCover, g: &DualGraph) -> Vec<CycleCover> {
        let mut w = Work::new(cover, g, 0.5);
        let label = w.labels();
        w.candidates(&label)
            .into_iter()
            .map(|(_, _, x)| {
                w.apply(&x);
                let c = w.to_cover(false);
                w.revert(&x);
                c
            })
            .collect()
    }

    #[test]
    fn no_cycles_is_a_fixpoint() {
        let g = graph(2, 1, p(0, 0), p(1, 0));
        let cover = CycleCover { path: vec![p(0, 0), p(1, 0)], cycles: vec![], optimal: true };
        assert_eq!(join_cycles(cover.clone(), &g, 0.5), cover);
    }

    #[test]
    fn two_squares_merge() {
        // 2x4 region holding only two square cycles; terminals sit in a
        // separate 1x2 path column at x = 4
        let mut g = build_dual_graph(&IopRegion::from_ascii(p(0, 0), &["#####", "#####"]).unwrap());
        g.set_terminals(p(4, 0), p(4, 1)).unwrap();
        let cover = CycleCover { path: vec![p(4, 0), p(4, 1)], cycles: vec![square(0, 0), square(2, 0)], optimal: true };
        // enumeration oracle: exactly one square couples the two cycles
        let singles: Vec<_> =
            all_single_exchanges(&cover, &g).into_iter().filter(|c| c.cycles.len() == 1 && c.path.len() == 2).collect();
        assert_eq!(singles.len(), 1);
        let joined = join_cycles(cover, &g, 0.5);
        assert_eq!(joined.cycles.len(), 1);
        assert_eq!(joined.cycles[0].len(), 8);
        assert_eq!(joined, singles[0]);
    }

    #[test]
    fn three_squares_merge_in_one_pass() {
        let mut g = build_dual_graph(&IopRegion::from_ascii(p(0, 0), &["#######", "#######"]).unwrap());
        g.set_terminals(p(6, 0), p(6, 1)).unwrap();
        let cover = CycleCover {
            path: vec![p(6, 0), p(6, 1)],
            cycles: vec![square(0, 0), square(2, 0), square(4, 0)],
            optimal: true,
        };
        // the cycle graph is a chain of two edges, so its spanning tree is the
        // whole chain
        let pairs = all_single_exchanges(&cover, &g).into_iter().filter(|c| c.cycles.len() == 2 && c.path.len() == 2).count();
        assert_eq!(pairs, 2);
        let joined = join_cycles(cover, &g, 0.5);
        assert_eq!(joined.cycles.len(), 1);
        assert_eq!(joined.cycles[0].len(), 12);
    }

    #[test]
    fn path_absorbs_adjacent_square() {
        // 2x4: path along the bottom-left and top-left, square on the right
        let g = graph(4, 2, p(0, 0), p(0, 1));
        let cover = CycleCover { path: vec![p(0, 0), p(1, 0), p(1, 1), p(0, 1)], cycles: vec![square(2, 0)], optimal: true };
        let options: Vec<_> = all_single_exchanges(&cover, &g).into_iter().filter(|c| c.cycles.is_empty()).collect();
        assert!(!options.is_empty());
        let sol = join_cycles_with_path(cover, &g, 0.5).unwrap();
        assert_eq!(sol.vertices.len(), 8);
        assert!(options.iter().any(|c| c.path == sol.vertices));
    }

    #[test]
    fn diagonal_contact_cannot_be_merged() {
        // path and cycle in two 2x2 blocks that touch only at a corner
        let mut g = build_dual_graph(&IopRegion::from_ascii(p(0, 0), &["..##", "..##", "##..", "##.."]).unwrap());
        g.set_terminals(p(0, 0), p(1, 0)).unwrap();
        let cover = CycleCover { path: vec![p(0, 0), p(0, 1), p(1, 1), p(1, 0)], cycles: vec![square(2, 2)], optimal: true };
        assert!(matches!(join_cycles_with_path(cover, &g, 0.5), Err(SolverError::NonHamiltonian { cycles: 1 })));
    }

    #[test]
    fn single_path_returned_unchanged() {
        let g = graph(1, 4, p(0, 0), p(0, 3));
        let path = vec![p(0, 0), p(0, 1), p(0, 2), p(0, 3)];
        let sol = join_cycles_with_path(CycleCover { path: path.clone(), cycles: vec![], optimal: true }, &g, 1.0).unwrap();
        assert_eq!(sol.vertices, path);
        assert!(sol.optimal);
    }
}
