//! Per-cell routing: the integer model, its relaxed and full solvers, the
//! cycle repair heuristic and an exhaustive oracle.

mod branch_bound;
mod exact;
mod frontier;
mod model;
mod repair;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use exact::{exact_oracle, feasible_rectangular};
pub use model::{build_mip, Arc as MipArc, MipModel, TurnTriple};
pub use repair::{join_cycles, join_cycles_with_path};

use crate::config::SolverConfig;
use crate::geometry::{DualGraph, GridPoint, VertexId};
use model::step_dir;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SolverError {
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("entry and exit vertices are not set")]
    MissingTerminals,
    #[error("cell graph is disconnected")]
    Disconnected,
    #[error("no Hamiltonian path between entry and exit")]
    NoHamiltonianPath,
    #[error("{cycles} cycle(s) share no exchange square with the path")]
    NonHamiltonian { cycles: usize },
    #[error("model is infeasible")]
    Infeasible,
    #[error("time limit reached without a solution")]
    TimeLimit,
    #[error("cell is {width} pixels across its narrow side; at most {max} supported")]
    TooWide { width: usize, max: usize },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("unknown cell solver `{0}`")]
    UnknownSolver(String),
    #[error("unknown backend `{0}`")]
    UnknownBackend(String),
}

/// Undirected edge choice returned by a backend, as vertex id pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSelection {
    pub edges: Vec<(VertexId, VertexId)>,
    pub cost: f64,
    /// False when a time limit or beam cut the search short.
    pub optimal: bool,
}

/// An entry-exit path plus vertex-disjoint cycles, together covering every
/// vertex once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCover {
    pub path: Vec<GridPoint>,
    pub cycles: Vec<Vec<GridPoint>>,
    pub optimal: bool,
}

impl CycleCover {
    /// Splits an edge set with degree 1 at the terminals and 2 elsewhere.
    /// Each cycle starts at its smallest vertex and heads to the smaller of
    /// that vertex's two neighbours.
    pub fn from_edges(graph: &DualGraph, edges: &[(VertexId, VertexId)]) -> Result<Self, SolverError> {
        let (Some(s), Some(t)) = (graph.s, graph.t) else {
            return Err(SolverError::MissingTerminals);
        };
        let n = graph.vertex_count();
        let mut nbr: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            nbr[a].push(b);
            nbr[b].push(a);
        }
        for (v, l) in nbr.iter_mut().enumerate() {
            l.sort_unstable();
            let want = if n == 1 { 0 } else if v == s || v == t { 1 } else { 2 };
            if l.len() != want {
                return Err(SolverError::InvalidPath(format!("vertex {:?} has degree {}", graph.point(v), l.len())));
            }
        }
        let mut seen = vec![false; n];
        let walk = |start: VertexId, first: Option<VertexId>, seen: &mut Vec<bool>| {
            let mut out = vec![start];
            seen[start] = true;
            let (mut prev, mut cur) = (start, first);
            while let Some(c) = cur {
                if seen[c] {
                    break;
                }
                seen[c] = true;
                out.push(c);
                let next = nbr[c].iter().copied().find(|&x| x != prev);
                prev = c;
                cur = next;
            }
            out
        };
        let path = walk(s, nbr[s].first().copied(), &mut seen);
        if n > 1 && path.last() != Some(&t) {
            return Err(SolverError::InvalidPath("path does not end at the exit".into()));
        }
        let mut cycles = Vec::new();
        for v in 0..n {
            if !seen[v] {
                cycles.push(walk(v, Some(nbr[v][0]), &mut seen));
            }
        }
        let pts = |ids: Vec<VertexId>| ids.into_iter().map(|v| graph.point(v)).collect::<Vec<_>>();
        Ok(Self { path: pts(path), cycles: cycles.into_iter().map(pts).collect(), optimal: true })
    }

    pub fn edges(&self) -> Vec<(GridPoint, GridPoint)> {
        let mut out: Vec<(GridPoint, GridPoint)> = self.path.windows(2).map(|w| (w[0], w[1])).collect();
        for c in &self.cycles {
            out.extend(c.windows(2).map(|w| (w[0], w[1])));
            if c.len() > 1 {
                out.push((c[c.len() - 1], c[0]));
            }
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.path.len() + self.cycles.iter().map(Vec::len).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Trivial,
    Exact,
    Repair,
    FullModel,
}

/// A Hamiltonian entry-exit path with its cost breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolution {
    pub vertices: Vec<GridPoint>,
    pub edge_cost: f64,
    pub turn_count: u32,
    pub straight_count: u32,
    pub objective: f64,
    pub method: SolveMethod,
    /// Proven optimal for the cell's objective.
    pub optimal: bool,
    /// The repair heuristic could not fold every cycle into the path.
    pub repair_failed: bool,
}

impl PathSolution {
    /// Checks that `vertices` is a Hamiltonian path of `graph` from `s` to
    /// `t` and tallies its cost.
    pub fn evaluate(graph: &DualGraph, vertices: &[GridPoint], alpha: f64, method: SolveMethod) -> Result<Self, SolverError> {
        if vertices.len() != graph.vertex_count() {
            return Err(SolverError::InvalidPath(format!(
                "visits {} of {} vertices",
                vertices.len(),
                graph.vertex_count()
            )));
        }
        let ids: Vec<VertexId> = vertices
            .iter()
            .map(|&p| graph.id_of(p).ok_or_else(|| SolverError::InvalidPath(format!("{p:?} not in cell"))))
            .collect::<Result<_, _>>()?;
        let mut seen = vec![false; ids.len()];
        for &v in &ids {
            if std::mem::replace(&mut seen[v], true) {
                return Err(SolverError::InvalidPath(format!("{:?} visited twice", graph.point(v))));
            }
        }
        if graph.s != ids.first().copied() || graph.t != ids.last().copied() {
            return Err(SolverError::InvalidPath("endpoints differ from entry/exit".into()));
        }
        let mut edge_cost = 0.0;
        for w in ids.windows(2) {
            let e = graph
                .edge_between(w[0], w[1])
                .ok_or_else(|| SolverError::InvalidPath(format!("{:?} and {:?} not adjacent", graph.point(w[0]), graph.point(w[1]))))?;
            edge_cost += graph.weight(e);
        }
        let (turn_count, straight_count) = count_turns(vertices);
        let objective = alpha * edge_cost + (1.0 - alpha) * f64::from(turn_count);
        Ok(Self {
            vertices: vertices.to_vec(),
            edge_cost,
            turn_count,
            straight_count,
            objective,
            method,
            optimal: matches!(method, SolveMethod::Trivial | SolveMethod::Exact),
            repair_failed: false,
        })
    }
}

/// 90 and 180 degree events at the interior vertices of a unit-step path.
pub fn count_turns(vertices: &[GridPoint]) -> (u32, u32) {
    let mut turns = 0;
    let mut straight = 0;
    for w in vertices.windows(3) {
        match (step_dir(w[0], w[1]), step_dir(w[1], w[2])) {
            (Some(a), Some(b)) if a == b => straight += 1,
            (Some(a), Some(b)) if (a + b) % 2 == 1 => turns += 1,
            _ => {}
        }
    }
    (turns, straight)
}

/// Exact solver for the integer model, relaxed or full depending on
/// `model.subtours`.
pub trait MipBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &MipModel, deadline: Option<Instant>) -> Result<EdgeSelection, SolverError>;
}

/// Row-by-row dynamic program over plug states.
pub struct FrontierDp {
    pub beam: usize,
}

impl Default for FrontierDp {
    fn default() -> Self {
        Self { beam: 1 << 20 }
    }
}

impl MipBackend for FrontierDp {
    fn name(&self) -> &'static str {
        "frontier-dp"
    }

    fn solve(&self, model: &MipModel, deadline: Option<Instant>) -> Result<EdgeSelection, SolverError> {
        frontier::solve(model, model.subtours, deadline, self.beam)
    }
}

/// Depth-first branch and bound; practical only for small cells.
pub struct BranchBound;

impl MipBackend for BranchBound {
    fn name(&self) -> &'static str {
        "branch-bound"
    }

    fn solve(&self, model: &MipModel, deadline: Option<Instant>) -> Result<EdgeSelection, SolverError> {
        branch_bound::solve(model, model.subtours, deadline)
    }
}

/// Strategy that turns a cell graph into a path.
pub trait CellSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, graph: &DualGraph, alpha: f64, config: &SolverConfig) -> Result<PathSolution, SolverError>;
}

/// Exhaustive search below the size threshold, relax-and-repair above it.
pub struct AutoSolver;

/// Exhaustive search at any size.
pub struct ExactSolver;

/// Relax-and-repair at any size, with the full model as fallback.
pub struct RepairSolver;

/// Full model only.
pub struct FullModelSolver;

impl CellSolver for AutoSolver {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn solve(&self, graph: &DualGraph, alpha: f64, config: &SolverConfig) -> Result<PathSolution, SolverError> {
        solve_cell(graph, alpha, config)
    }
}

impl CellSolver for ExactSolver {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn solve(&self, graph: &DualGraph, alpha: f64, _config: &SolverConfig) -> Result<PathSolution, SolverError> {
        exact_oracle(graph, alpha)
    }
}

impl CellSolver for RepairSolver {
    fn name(&self) -> &'static str {
        "repair"
    }

    fn solve(&self, graph: &DualGraph, alpha: f64, config: &SolverConfig) -> Result<PathSolution, SolverError> {
        if graph.vertex_count() == 1 {
            return exact_oracle(graph, alpha);
        }
        relax_and_repair(graph, alpha, config, backend(&config.backend)?.as_ref())
    }
}

impl CellSolver for FullModelSolver {
    fn name(&self) -> &'static str {
        "full-model"
    }

    fn solve(&self, graph: &DualGraph, alpha: f64, config: &SolverConfig) -> Result<PathSolution, SolverError> {
        if graph.vertex_count() == 1 {
            return exact_oracle(graph, alpha);
        }
        solve_full(graph, alpha, backend(&config.backend)?.as_ref(), config.full_time_limit())
    }
}

/// Named strategies, looked up at run time from config or command line.
pub struct Registry<T: ?Sized> {
    entries: Vec<(&'static str, Arc<T>)>,
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T: ?Sized> Registry<T> {
    /// Adds or replaces the entry under `name`.
    pub fn register(&mut self, name: &'static str, item: Arc<T>) {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
    }

    pub fn get(&self, name: &str) -> Option<Arc<T>> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, x)| Arc::clone(x))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}

pub type SolverRegistry = Registry<dyn CellSolver>;
pub type BackendRegistry = Registry<dyn MipBackend>;

impl Registry<dyn CellSolver> {
    pub fn with_defaults() -> Self {
        let mut r = Self::default();
        for s in [Arc::new(AutoSolver) as Arc<dyn CellSolver>, Arc::new(ExactSolver), Arc::new(RepairSolver), Arc::new(FullModelSolver)] {
            r.register(s.name(), s);
        }
        r
    }
}

impl Registry<dyn MipBackend> {
    pub fn with_defaults() -> Self {
        let mut r = Self::default();
        for b in [Arc::new(FrontierDp::default()) as Arc<dyn MipBackend>, Arc::new(BranchBound)] {
            r.register(b.name(), b);
        }
        r
    }
}

fn default_solvers() -> &'static SolverRegistry {
    static R: OnceLock<SolverRegistry> = OnceLock::new();
    R.get_or_init(SolverRegistry::with_defaults)
}

fn default_backends() -> &'static BackendRegistry {
    static R: OnceLock<BackendRegistry> = OnceLock::new();
    R.get_or_init(BackendRegistry::with_defaults)
}

pub fn cell_solver(name: &str) -> Result<Arc<dyn CellSolver>, SolverError> {
    default_solvers().get(name).ok_or_else(|| SolverError::UnknownSolver(name.to_string()))
}

pub fn backend(name: &str) -> Result<Arc<dyn MipBackend>, SolverError> {
    default_backends().get(name).ok_or_else(|| SolverError::UnknownBackend(name.to_string()))
}

/// Optimal degree-feasible cover for a model built without subtour
/// constraints, split into the path and its cycles.
pub fn solve_relaxed(model: &MipModel, graph: &DualGraph, backend: &dyn MipBackend, time_limit: Duration) -> Result<CycleCover, SolverError> {
    let sel = backend.solve(model, Some(Instant::now() + time_limit))?;
    if !sel.optimal {
        log::warn!("relaxed solve stopped early; using best cover found");
    }
    let mut cover = CycleCover::from_edges(graph, &sel.edges)?;
    cover.optimal = sel.optimal;
    Ok(cover)
}

fn solve_full(graph: &DualGraph, alpha: f64, backend: &dyn MipBackend, time_limit: Duration) -> Result<PathSolution, SolverError> {
    let model = build_mip(graph, alpha, true)?;
    let sel = backend.solve(&model, Some(Instant::now() + time_limit))?;
    let cover = CycleCover::from_edges(graph, &sel.edges)?;
    if !cover.cycles.is_empty() {
        return Err(SolverError::Infeasible);
    }
    let mut sol = PathSolution::evaluate(graph, &cover.path, alpha, SolveMethod::FullModel)?;
    sol.optimal = sel.optimal;
    Ok(sol)
}

fn relax_and_repair(graph: &DualGraph, alpha: f64, config: &SolverConfig, backend: &dyn MipBackend) -> Result<PathSolution, SolverError> {
    let model = build_mip(graph, alpha, false)?;
    let cover = solve_relaxed(&model, graph, backend, config.relaxed_time_limit())?;
    let cover = join_cycles(cover, graph, alpha);
    match join_cycles_with_path(cover, graph, alpha) {
        Err(SolverError::NonHamiltonian { cycles }) => {
            log::info!("repair left {cycles} cycle(s); solving the full model");
            let mut sol = solve_full(graph, alpha, backend, config.full_time_limit())?;
            sol.repair_failed = true;
            Ok(sol)
        }
        other => other,
    }
}

/// Routes one cell: exhaustive search for small cells, otherwise the relaxed
/// model, cycle merging and path folding, with the full model as fallback.
pub fn solve_cell(graph: &DualGraph, alpha: f64, config: &SolverConfig) -> Result<PathSolution, SolverError> {
    if graph.vertex_count() <= config.exact_threshold.max(1) {
        return exact_oracle(graph, alpha);
    }
    relax_and_repair(graph, alpha, config, backend(&config.backend)?.as_ref())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    shape: Vec<(i32, i32)>,
    s: (i32, i32),
    t: (i32, i32),
    weights: Vec<u64>,
    alpha: u64,
    solver: String,
}

/// Shared cache of cell solutions keyed by translated shape, terminals,
/// weights and alpha.
#[derive(Debug, Default)]
pub struct SolutionMemo {
    map: Mutex<HashMap<MemoKey, PathSolution>>,
    hits: AtomicU64,
}

impl SolutionMemo {
    fn key(graph: &DualGraph, alpha: f64, solver: &str) -> (MemoKey, GridPoint) {
        let (x0, y0, _, _) = graph.bounds();
        let rel = |p: GridPoint| (p.x - x0, p.y - y0);
        let key = MemoKey {
            shape: graph.vertices().iter().map(|&p| rel(p)).collect(),
            s: rel(graph.point(graph.s.expect("entry set"))),
            t: rel(graph.point(graph.t.expect("exit set"))),
            weights: graph.edges().iter().map(|e| e.weight.to_bits()).collect(),
            alpha: alpha.to_bits(),
            solver: solver.to_string(),
        };
        (key, GridPoint::new(x0, y0))
    }

    pub fn get_or_solve<F>(&self, graph: &DualGraph, alpha: f64, solver: &str, solve: F) -> Result<PathSolution, SolverError>
    where
        F: FnOnce() -> Result<PathSolution, SolverError>,
    {
        let (key, origin) = Self::key(graph, alpha, solver);
        let shift = |sol: &PathSolution, dx: i32, dy: i32| {
            let mut out = sol.clone();
            out.vertices.iter_mut().for_each(|p| *p = p.offset(dx, dy));
            out
        };
        if let Some(hit) = self.map.lock().expect("memo lock").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(shift(hit, origin.x, origin.y));
        }
        let sol = solve()?;
        self.map.lock().expect("memo lock").insert(key, shift(&sol, -origin.x, -origin.y));
        Ok(sol)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
