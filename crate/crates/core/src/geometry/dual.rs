use std::collections::{HashMap, VecDeque};

use super::{GridPoint, IopRegion};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Axis directions in counterclockwise order; two directions are
/// perpendicular iff their indices differ by an odd amount.
pub const DIRS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Grid graph over pixel centres. Vertex ids follow `GridPoint` order, so
/// comparing ids is comparing points lexicographically.
#[derive(Debug, Clone)]
pub struct DualGraph {
    vertices: Vec<GridPoint>,
    index: HashMap<GridPoint, VertexId>,
    edges: Vec<Edge>,
    adjacency: Vec<[Option<(VertexId, EdgeId)>; 4]>,
    pub s: Option<VertexId>,
    pub t: Option<VertexId>,
}

/// One vertex per pixel, one unit-weight edge per 4-adjacent pixel pair.
pub fn build_dual_graph(region: &IopRegion) -> DualGraph {
    DualGraph::from_points(region.pixels())
}

impl DualGraph {
    pub fn from_points<I: IntoIterator<Item = GridPoint>>(points: I) -> Self {
        let mut vertices: Vec<GridPoint> = points.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let index: HashMap<GridPoint, VertexId> =
            vertices.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut edges = Vec::new();
        let mut adjacency = vec![[None; 4]; vertices.len()];
        for (a, p) in vertices.iter().enumerate() {
            for dir in [0usize, 1] {
                let (dx, dy) = DIRS[dir];
                if let Some(&b) = index.get(&p.offset(dx, dy)) {
                    let e = edges.len();
                    edges.push(Edge { a, b, weight: 1.0 });
                    adjacency[a][dir] = Some((b, e));
                    adjacency[b][dir + 2] = Some((a, e));
                }
            }
        }
        Self { vertices, index, edges, adjacency, s: None, t: None }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[GridPoint] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn point(&self, v: VertexId) -> GridPoint {
        self.vertices[v]
    }

    pub fn id_of(&self, p: GridPoint) -> Option<VertexId> {
        self.index.get(&p).copied()
    }

    /// Neighbour of `v` in direction index `dir` (see [`DIRS`]).
    pub fn neighbor(&self, v: VertexId, dir: usize) -> Option<(VertexId, EdgeId)> {
        self.adjacency[v][dir]
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (usize, VertexId, EdgeId)> + '_ {
        self.adjacency[v]
            .iter()
            .enumerate()
            .filter_map(|(d, n)| n.map(|(u, e)| (d, u, e)))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].iter().flatten().count()
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.adjacency[u].iter().flatten().find(|(w, _)| *w == v).map(|(_, e)| *e)
    }

    /// Direction index of the step `u -> v`; they must be adjacent.
    pub fn direction(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.adjacency[u].iter().position(|n| matches!(n, Some((w, _)) if *w == v))
    }

    pub fn weight(&self, e: EdgeId) -> f64 {
        self.edges[e].weight
    }

    pub fn set_weight(&mut self, e: EdgeId, weight: f64) {
        assert!(weight >= 0.0 && weight.is_finite(), "edge weights must be nonnegative");
        self.edges[e].weight = weight;
    }

    /// Unordered endpoint pair of an edge, smaller point first.
    pub fn edge_key(&self, e: EdgeId) -> (GridPoint, GridPoint) {
        let (p, q) = (self.vertices[self.edges[e].a], self.vertices[self.edges[e].b]);
        if p <= q {
            (p, q)
        } else {
            (q, p)
        }
    }

    pub fn set_terminals(&mut self, s: GridPoint, t: GridPoint) -> Option<()> {
        self.s = Some(self.id_of(s)?);
        self.t = Some(self.id_of(t)?);
        Some(())
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for (_, u, _) in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.vertices.len()
    }

    /// `(min_x, min_y, max_x, max_y)` over vertex points.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        self.vertices.iter().fold((i32::MAX, i32::MAX, i32::MIN, i32::MIN), |(a, b, c, d), p| {
            (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y))
        })
    }
}
