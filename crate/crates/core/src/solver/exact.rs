use crate::geometry::{DualGraph, GridPoint, VertexId};

use super::{PathSolution, SolveMethod, SolverError};

struct Dfs<'g> {
    graph: &'g DualGraph,
    alpha: f64,
    t: VertexId,
    visited: Vec<bool>,
    path: Vec<VertexId>,
    best: Option<(f64, Vec<VertexId>)>,
    nbrs: Vec<Vec<(usize, VertexId, f64)>>,
}

impl Dfs<'_> {
    fn go(&mut self, v: VertexId, cost: f64, dir_in: Option<usize>) {
        if self.path.len() == self.visited.len() {
            if v == self.t && self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, self.path.clone()));
            }
            return;
        }
        if v == self.t {
            return;
        }
        for i in 0..self.nbrs[v].len() {
            let (d, u, w) = self.nbrs[v][i];
            if self.visited[u] {
                continue;
            }
            let turn = dir_in.is_some_and(|di| (di + d) % 2 == 1);
            let next = cost + self.alpha * w + (1.0 - self.alpha) * f64::from(u8::from(turn));
            if self.best.as_ref().is_some_and(|(b, _)| next >= *b) {
                continue;
            }
            self.visited[u] = true;
            self.path.push(u);
            self.go(u, next, Some(d));
            self.path.pop();
            self.visited[u] = false;
        }
    }
}

/// Exhaustive search over all Hamiltonian entry-exit paths. Neighbours are
/// tried in vertex order, so among optimal paths the lexicographically
/// smallest vertex sequence wins.
pub fn exact_oracle(graph: &DualGraph, alpha: f64) -> Result<PathSolution, SolverError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SolverError::InvalidAlpha(alpha));
    }
    let (Some(s), Some(t)) = (graph.s, graph.t) else {
        return Err(SolverError::MissingTerminals);
    };
    let n = graph.vertex_count();
    if n == 1 {
        return PathSolution::evaluate(graph, &[graph.point(s)], alpha, SolveMethod::Trivial);
    }
    if s == t {
        return Err(SolverError::NoHamiltonianPath);
    }
    let nbrs = (0..n)
        .map(|v| {
            let mut l: Vec<(usize, VertexId, f64)> = graph.neighbors(v).map(|(d, u, e)| (d, u, graph.weight(e))).collect();
            l.sort_by_key(|&(_, u, _)| u);
            l
        })
        .collect();
    let mut dfs = Dfs { graph, alpha, t, visited: vec![false; n], path: vec![s], best: None, nbrs };
    dfs.visited[s] = true;
    dfs.go(s, 0.0, None);
    let Some((_, ids)) = dfs.best else {
        return Err(SolverError::NoHamiltonianPath);
    };
    let pts: Vec<GridPoint> = ids.iter().map(|&v| dfs.graph.point(v)).collect();
    PathSolution::evaluate(graph, &pts, alpha, SolveMethod::Exact)
}

/// Whether the `m x n` grid graph has a Hamiltonian path between `s` and
/// `t`, given in coordinates relative to the grid's lower-left pixel.
///
/// A path fails to exist exactly when one of these holds, with the grid
/// turned so that its shorter side has length `n`:
/// the colour classes of `s` and `t` are incompatible with the vertex
/// count; `n = 1` and either endpoint is not an end of the strip; `n = 2`
/// and `s`, `t` form a rung away from both short ends; `n = 3`, `m` even,
/// and up to symmetry `t` has the corner colour while `s` sits more than one
/// column before it, or one column before it on the middle row.
pub fn feasible_rectangular(m: u32, n: u32, s: GridPoint, t: GridPoint) -> bool {
    if s == t {
        return m * n == 1;
    }
    // one-based coordinates with the short side vertical
    let (m, n, s, t) = if n > m {
        (n as i32, m as i32, (s.y + 1, s.x + 1), (t.y + 1, t.x + 1))
    } else {
        (m as i32, n as i32, (s.x + 1, s.y + 1), (t.x + 1, t.y + 1))
    };
    let colour = |p: (i32, i32)| (p.0 + p.1).rem_euclid(2);
    if (m * n) % 2 == 0 {
        if colour(s) == colour(t) {
            return false;
        }
    } else if colour(s) != 0 || colour(t) != 0 {
        return false;
    }
    if n == 1 {
        let end = |p: (i32, i32)| p.0 == 1 || p.0 == m;
        return end(s) && end(t);
    }
    if n == 2 && s.0 == t.0 && 1 < s.0 && s.0 < m {
        return false;
    }
    if n == 3 && m % 2 == 0 {
        let blocked = |s: (i32, i32), t: (i32, i32)| {
            colour(s) != colour(t) && colour(t) == 0 && (s.0 < t.0 - 1 || (s.1 == 2 && s.0 < t.0))
        };
        for flip_x in [false, true] {
            for flip_y in [false, true] {
                let f = |p: (i32, i32)| {
                    (if flip_x { m + 1 - p.0 } else { p.0 }, if flip_y { n + 1 - p.1 } else { p.1 })
                };
                let (a, b) = (f(s), f(t));
                if blocked(a, b) || blocked(b, a) {
                    return false;
                }
            }
        }
    }
    true
}
