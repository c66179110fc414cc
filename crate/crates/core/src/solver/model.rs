use std::collections::HashMap;
use std::fmt::Write as _;

use crate::geometry::{DualGraph, GridPoint, DIRS};

use super::SolverError;

/// Directed edge variable `x_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Turn indicator for the consecutive arcs `(i, j)`, `(j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnTriple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// 0 when the two arcs are collinear, 1 when perpendicular.
    pub indicator: u8,
}

/// Integer program for one cell: minimise
/// `alpha * sum(w_ij x_ij) + (1 - alpha) * sum(c_j)` over directed edge
/// choices with exact unit in/out degree at non-terminals, turn variables
/// bounded below by the turn indicators, and optional order variables that
/// forbid subtours.
///
/// Pairs of pixels that are not 4-adjacent have no variable at all.
#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub points: Vec<GridPoint>,
    pub s: usize,
    pub t: usize,
    pub arcs: Vec<Arc>,
    pub triples: Vec<TurnTriple>,
    pub alpha: f64,
    pub subtours: bool,
    weights: HashMap<(usize, usize), f64>,
}

pub fn build_mip(graph: &DualGraph, alpha: f64, subtours: bool) -> Result<MipModel, SolverError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SolverError::InvalidAlpha(alpha));
    }
    let (s, t) = match (graph.s, graph.t) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(SolverError::MissingTerminals),
    };
    if !graph.is_connected() {
        return Err(SolverError::Disconnected);
    }
    let mut arcs = Vec::with_capacity(2 * graph.edge_count());
    let mut weights = HashMap::with_capacity(2 * graph.edge_count());
    for v in 0..graph.vertex_count() {
        for (_, u, e) in graph.neighbors(v) {
            let w = graph.weight(e);
            arcs.push(Arc { from: v, to: u, weight: w });
            weights.insert((v, u), w);
        }
    }
    let mut triples = Vec::new();
    for j in 0..graph.vertex_count() {
        for (d_in, i, _) in graph.neighbors(j) {
            // arc i -> j travels opposite to the direction j -> i
            let into = (d_in + 2) % 4;
            for (d_out, k, _) in graph.neighbors(j) {
                if k == i {
                    continue;
                }
                let indicator = u8::from((into + d_out) % 2 == 1);
                triples.push(TurnTriple { i, j, k, indicator });
            }
        }
    }
    Ok(MipModel { points: graph.vertices().to_vec(), s, t, arcs, triples, alpha, subtours, weights })
}

impl MipModel {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Turn variables that can be nonzero; `c_s` and `c_t` are fixed at 0.
    pub fn active_turn_vars(&self) -> usize {
        if self.points.len() <= 2 {
            return 0;
        }
        (0..self.points.len()).filter(|&v| v != self.s && v != self.t).count()
    }

    pub fn order_var_count(&self) -> usize {
        if self.subtours {
            self.points.len()
        } else {
            0
        }
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.weights.get(&(a, b)).copied()
    }

    pub fn turn_indicator(&self, i: usize, j: usize, k: usize) -> Option<u8> {
        self.triples.iter().find(|x| x.i == i && x.j == j && x.k == k).map(|x| x.indicator)
    }

    /// Objective of an undirected edge selection in which every vertex has
    /// degree at most two.
    pub fn objective_of_edges(&self, edges: &[(usize, usize)]) -> f64 {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.points.len()];
        let mut weight = 0.0;
        for &(a, b) in edges {
            weight += self.weight(a, b).expect("edge in model");
            adj[a].push(b);
            adj[b].push(a);
        }
        let turns = adj
            .iter()
            .enumerate()
            .filter(|(v, n)| n.len() == 2 && is_turn(self.points[*v], self.points[n[0]], self.points[n[1]]))
            .count();
        self.alpha * weight + (1.0 - self.alpha) * turns as f64
    }

    /// CPLEX LP text for cross-checking with an external solver.
    pub fn to_lp(&self) -> String {
        let n = self.points.len();
        let x = |a: usize, b: usize| format!("x_{a}_{b}");
        let mut out = String::from("\\ cell routing model\nMinimize\n obj:");
        let mut first = true;
        let mut term = |out: &mut String, coef: f64, var: &str| {
            if coef == 0.0 {
                return;
            }
            let sep = if first { " " } else { " + " };
            first = false;
            let _ = write!(out, "{sep}{coef} {var}");
        };
        for a in &self.arcs {
            term(&mut out, self.alpha * a.weight, &x(a.from, a.to));
        }
        for v in 0..n {
            if v != self.s && v != self.t {
                term(&mut out, 1.0 - self.alpha, &format!("c_{v}"));
            }
        }
        if first {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for v in 0..n {
            let outs: Vec<String> = self.arcs.iter().filter(|a| a.from == v).map(|a| x(a.from, a.to)).collect();
            let ins: Vec<String> = self.arcs.iter().filter(|a| a.to == v).map(|a| x(a.from, a.to)).collect();
            let (want_out, want_in) = if n == 1 {
                (0, 0)
            } else if v == self.s {
                (1, 0)
            } else if v == self.t {
                (0, 1)
            } else {
                (1, 1)
            };
            if !outs.is_empty() {
                let _ = writeln!(out, " out_{v}: {} = {want_out}", outs.join(" + "));
            }
            if !ins.is_empty() {
                let _ = writeln!(out, " in_{v}: {} = {want_in}", ins.join(" + "));
            }
        }
        for tr in self.triples.iter().filter(|t| t.indicator == 1) {
            if tr.j == self.s || tr.j == self.t {
                continue;
            }
            let _ = writeln!(
                out,
                " turn_{}_{}_{}: c_{} - {} - {} >= -1",
                tr.i,
                tr.j,
                tr.k,
                tr.j,
                x(tr.i, tr.j),
                x(tr.j, tr.k)
            );
        }
        if self.subtours {
            for a in self.arcs.iter().filter(|a| a.to != self.s) {
                let _ = writeln!(out, " mtz_{}_{}: u_{} - u_{} + {n} {} <= {}", a.from, a.to, a.from, a.to, x(a.from, a.to), n - 1);
            }
        }
        out.push_str("Bounds\n");
        for v in 0..n {
            if v == self.s || v == self.t {
                let _ = writeln!(out, " c_{v} = 0");
            } else {
                let _ = writeln!(out, " c_{v} >= 0");
            }
        }
        if self.subtours {
            for v in 0..n {
                if v == self.s {
                    let _ = writeln!(out, " u_{v} = 1");
                } else {
                    let _ = writeln!(out, " 2 <= u_{v} <= {n}");
                }
            }
        }
        out.push_str("Binaries\n");
        for a in &self.arcs {
            let _ = writeln!(out, " {}", x(a.from, a.to));
        }
        out.push_str("End\n");
        out
    }
}

/// Whether the path `a - v - b` bends at `v`.
pub(crate) fn is_turn(v: GridPoint, a: GridPoint, b: GridPoint) -> bool {
    let horizontal = |p: GridPoint| p.y == v.y;
    horizontal(a) != horizontal(b)
}

/// Direction index of the unit step `from -> to`.
pub(crate) fn step_dir(from: GridPoint, to: GridPoint) -> Option<usize> {
    DIRS.iter().position(|&(dx, dy)| from.offset(dx, dy) == to)
}
