//! Depth-first branch and bound over undirected edge choices, vertex by
//! vertex in id order. Meant for small cells and for cross-checking the
//! dynamic program.

use std::time::Instant;

use super::model::{is_turn, MipModel};
use super::{EdgeSelection, SolverError};

struct Search<'a> {
    model: &'a MipModel,
    hamiltonian: bool,
    deadline: Option<Instant>,
    later: Vec<Vec<(usize, f64)>>,
    required: Vec<u8>,
    degree: Vec<u8>,
    nbrs: Vec<Vec<usize>>,
    parent: Vec<usize>,
    chosen: Vec<(usize, usize)>,
    best: Option<(f64, Vec<(usize, usize)>)>,
    timed_out: bool,
    nodes: u64,
}

impl Search<'_> {
    fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    fn run(&mut self, v: usize, cost: f64) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        if v == self.required.len() {
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, self.chosen.clone()));
            }
            return;
        }
        let need = self.required[v].saturating_sub(self.degree[v]);
        let later = self.later[v].clone();
        for mask in 0u32..(1 << later.len()) {
            if mask.count_ones() != u32::from(need) {
                continue;
            }
            let picks: Vec<(usize, f64)> =
                later.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &p)| p).collect();
            if picks.iter().any(|&(u, _)| self.degree[u] >= self.required[u]) {
                continue;
            }
            let mut undo = Vec::new();
            let mut ok = true;
            for &(u, _) in &picks {
                if self.hamiltonian {
                    let (ru, rv) = (self.find(u), self.find(v));
                    if ru == rv {
                        ok = false;
                        break;
                    }
                    self.parent[ru] = rv;
                    undo.push(ru);
                }
            }
            if ok {
                for &(u, _) in &picks {
                    self.degree[u] += 1;
                    self.degree[v] += 1;
                    self.nbrs[u].push(v);
                    self.nbrs[v].push(u);
                    self.chosen.push((v, u));
                }
                let n = &self.nbrs[v];
                let p = &self.model.points;
                let turn = n.len() == 2 && is_turn(p[v], p[n[0]], p[n[1]]);
                let edge_w: f64 = picks.iter().map(|&(_, w)| w).sum();
                let next = cost + self.model.alpha * edge_w + (1.0 - self.model.alpha) * f64::from(u8::from(turn));
                if self.best.as_ref().is_none_or(|(b, _)| next < *b) {
                    self.run(v + 1, next);
                }
                for &(u, _) in picks.iter().rev() {
                    self.degree[u] -= 1;
                    self.degree[v] -= 1;
                    self.nbrs[u].pop();
                    self.nbrs[v].pop();
                    self.chosen.pop();
                }
            }
            for r in undo.into_iter().rev() {
                self.parent[r] = r;
            }
        }
    }
}

pub(crate) fn solve(model: &MipModel, hamiltonian: bool, deadline: Option<Instant>) -> Result<EdgeSelection, SolverError> {
    let n = model.vertex_count();
    if n == 1 {
        return Ok(EdgeSelection { edges: Vec::new(), cost: 0.0, optimal: true });
    }
    let mut later = vec![Vec::new(); n];
    for a in &model.arcs {
        if a.to > a.from {
            later[a.from].push((a.to, a.weight));
        }
    }
    for l in &mut later {
        l.sort_by_key(|&(u, _)| u);
    }
    let required = (0..n).map(|v| if v == model.s || v == model.t { 1 } else { 2 }).collect();
    let mut search = Search {
        model,
        hamiltonian,
        deadline,
        later,
        required,
        degree: vec![0; n],
        nbrs: vec![Vec::new(); n],
        parent: (0..n).collect(),
        chosen: Vec::new(),
        best: None,
        timed_out: false,
        nodes: 0,
    };
    search.run(0, 0.0);
    match search.best {
        Some((cost, edges)) => Ok(EdgeSelection { edges, cost, optimal: !search.timed_out }),
        None if search.timed_out => Err(SolverError::TimeLimit),
        None => Err(SolverError::Infeasible),
    }
}
