//! Layer and stack planning: decomposition, sequencing, cross-layer edge
//! weighting, per-cell solving, toolpath assembly and metrics.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::config::{ConfigError, OverlapMode, SolverConfig, WeightSource};
use crate::boundary::{project_to_boundary, BoundaryExtension};
use crate::decomposition::{decompose_layer, CellSequence, Corner, DecompositionError, QuadCell};
use crate::geometry::{rasterize, DualGraph, GeneralPolygon, GeometryError, GridPoint, IopRegion, Layer, LayerStack, Point2};
use crate::sequencing::{join_cells, update_entry_exit, JoinedCell, SequencingError};
use crate::solver::{cell_solver, CellSolver, PathSolution, SolutionMemo, SolverError};

/// Undirected unit edge between pixel centres, smaller point first.
pub type UnitEdge = (GridPoint, GridPoint);

pub fn unit_edge(a: GridPoint, b: GridPoint) -> UnitEdge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sequencing(#[from] SequencingError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Print,
    Idle,
}

/// One straight extruder motion, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub from: Point2,
    pub to: Point2,
    pub z: f64,
}

impl Move {
    pub fn length(&self) -> f64 {
        self.from.distance(self.to)
    }
}

/// A joined cell's routing result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPlan {
    pub members: Vec<QuadCell>,
    pub s: GridPoint,
    pub t: GridPoint,
    /// Visiting order actually emitted.
    pub path: Vec<GridPoint>,
    pub solution: Option<PathSolution>,
    /// Why the solver gave up; the path is then a plain row sweep.
    pub flagged: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerMetrics {
    /// Share of print edges also printed one layer down; absent on the
    /// first layer.
    pub overlap_ratio: Option<f64>,
    pub turn_ratio: Option<f64>,
    /// Idle travel in pixel units.
    pub idle_length_units: f64,
    pub cell_count: usize,
    pub flagged_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPlan {
    pub layer_index: usize,
    pub z_index: i64,
    pub z_mm: f64,
    pub pixel_size_mm: f64,
    pub cells: Vec<CellPlan>,
    pub moves: Vec<Move>,
    pub metrics: LayerMetrics,
    pub boundary: Option<BoundaryExtension>,
    pub warnings: Vec<String>,
}

impl LayerPlan {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Every pixel in visiting order.
    pub fn visit_sequence(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.cells.iter().flat_map(|c| c.path.iter().copied())
    }

    fn grid_point(&self, p: Point2) -> Option<GridPoint> {
        let fx = p.x / self.pixel_size_mm - 0.5;
        let fy = p.y / self.pixel_size_mm - 0.5;
        let (rx, ry) = (fx.round(), fy.round());
        ((fx - rx).abs() < 1e-6 && (fy - ry).abs() < 1e-6).then(|| GridPoint::new(rx as i32, ry as i32))
    }

    /// Print moves joining two 4-adjacent pixel centres, in move order.
    pub fn unit_print_edges(&self) -> Vec<(GridPoint, GridPoint)> {
        self.moves
            .iter()
            .filter(|m| m.kind == MoveKind::Print)
            .filter_map(|m| {
                let (a, b) = (self.grid_point(m.from)?, self.grid_point(m.to)?);
                (a.manhattan(b) == 1).then_some((a, b))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StackSummary {
    pub mean_overlap_ratio: Option<f64>,
    pub mean_turn_ratio: Option<f64>,
    pub total_idle_length_units: f64,
    pub cell_count: usize,
    pub flagged_cells: usize,
    pub skipped_layers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackPlan {
    pub config: SolverConfig,
    pub pixel_size_mm: f64,
    pub layer_height_mm: f64,
    pub layers: Vec<LayerPlan>,
    pub summary: StackSummary,
}

/// Reweights edges that coincide with an edge printed one layer down.
/// Topology and terminals are untouched.
pub fn apply_overlap_weights(mut graph: DualGraph, previous: &HashSet<UnitEdge>, mode: OverlapMode, config: &SolverConfig) -> DualGraph {
    let weight = match mode {
        OverlapMode::Maximize => config.overlap_weight_max,
        OverlapMode::Minimize => config.overlap_weight_min,
        OverlapMode::Neutral => return graph,
    };
    for e in 0..graph.edge_count() {
        if previous.contains(&graph.edge_key(e)) {
            graph.set_weight(e, weight);
        }
    }
    graph
}

/// Share of `current`'s unit print edges that `previous` also prints.
pub fn overlap_ratio(current: &LayerPlan, previous: &LayerPlan) -> Option<f64> {
    let edges = current.unit_print_edges();
    if edges.is_empty() {
        return None;
    }
    let below: HashSet<UnitEdge> = previous.unit_print_edges().into_iter().map(|(a, b)| unit_edge(a, b)).collect();
    let shared = edges.iter().filter(|&&(a, b)| below.contains(&unit_edge(a, b))).count();
    Some(shared as f64 / edges.len() as f64)
}

/// 90 degree turns over all 90 and 180 degree events where two unit print
/// moves meet. Boundary extensions between them are skipped over.
pub fn turn_ratio(plan: &LayerPlan) -> Option<f64> {
    let edges = plan.unit_print_edges();
    let (mut turns, mut straight) = (0u32, 0u32);
    for w in edges.windows(2) {
        let ((a, b), (c, d)) = (w[0], w[1]);
        if b != c {
            continue;
        }
        let u = (b.x - a.x, b.y - a.y);
        let v = (d.x - c.x, d.y - c.y);
        if u == v {
            straight += 1;
        } else if u.0 * v.0 + u.1 * v.1 == 0 {
            turns += 1;
        }
    }
    let events = turns + straight;
    (events > 0).then(|| f64::from(turns) / f64::from(events))
}

/// Exit corner of the curve for a layer.
pub fn layer_corners(config: &SolverConfig, layer_index: usize) -> (Corner, Corner) {
    if config.alternate_corners && layer_index % 2 == 1 {
        (Corner::SW, Corner::NW)
    } else {
        (Corner::SW, Corner::SE)
    }
}

/// Row sweep over a cell's pixels, used when the solver fails.
fn sweep(cell: &JoinedCell) -> Vec<GridPoint> {
    let mut px: Vec<GridPoint> = cell.region.pixels().collect();
    px.sort_by_key(|p| (p.y, if p.y % 2 == 0 { p.x } else { -p.x }));
    px
}

fn base_graph(cell: &JoinedCell, config: &SolverConfig, layer_index: usize, cell_index: usize) -> DualGraph {
    let mut g = cell.dual_graph();
    if config.weight_source == WeightSource::Random {
        let seed = config.weight_seed ^ ((layer_index as u64) << 32) ^ cell_index as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for e in 0..g.edge_count() {
            g.set_weight(e, rng.gen_range(0.5..=1.5));
        }
    }
    g
}

fn assemble_moves(cells: &[CellPlan], p: f64, z: f64) -> Vec<Move> {
    let mut moves = Vec::new();
    let mut last: Option<GridPoint> = None;
    for c in cells {
        for &v in &c.path {
            if let Some(u) = last {
                let kind = if u.manhattan(v) == 1 { MoveKind::Print } else { MoveKind::Idle };
                moves.push(Move { kind, from: u.center_mm(p), to: v.center_mm(p), z });
            }
            last = Some(v);
        }
    }
    moves
}

fn empty_plan(layer_index: usize, z_index: i64, z_mm: f64, pixel_size_mm: f64) -> LayerPlan {
    LayerPlan {
        layer_index,
        z_index,
        z_mm,
        pixel_size_mm,
        cells: Vec::new(),
        moves: Vec::new(),
        metrics: LayerMetrics::default(),
        boundary: None,
        warnings: Vec::new(),
    }
}

/// Runs the pipeline for stacks of layers with one solver, memo and pool.
pub struct Planner {
    pub config: SolverConfig,
    solver: Arc<dyn CellSolver>,
    memo: SolutionMemo,
    pool: rayon::ThreadPool,
}

impl Planner {
    pub fn new(config: SolverConfig) -> Result<Self, PlanError> {
        config.validate()?;
        let solver = cell_solver(&config.cell_solver)?;
        crate::solver::backend(&config.backend)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.worker_count)
            .build()
            .map_err(|e| PlanError::Pool(e.to_string()))?;
        Ok(Self { config, solver, memo: SolutionMemo::default(), pool })
    }

    pub fn memo_hits(&self) -> u64 {
        self.memo.hits()
    }

    /// Pixels of all polygons in a layer; polygons too thin to cover any
    /// pixel are dropped with a warning.
    fn layer_region(polygons: &[GeneralPolygon], p: f64, warnings: &mut Vec<String>) -> Result<Option<IopRegion>, PlanError> {
        let mut region: Option<IopRegion> = None;
        for (i, poly) in polygons.iter().enumerate() {
            match rasterize(poly, p) {
                Ok(r) => region = Some(region.map_or(r.clone(), |acc| acc.union(&r))),
                Err(GeometryError::EmptyRaster { .. }) => warnings.push(format!("polygon {i} covers no pixel")),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(region)
    }

    /// Joined cells with final entry/exit pixels for a layer region.
    pub fn sequence(&self, region: &IopRegion, layer_index: usize) -> Result<Vec<JoinedCell>, PlanError> {
        let (entry, exit) = layer_corners(&self.config, layer_index);
        let dec = decompose_layer(region, self.config.delta, entry, exit)?;
        let seq = CellSequence { cells: dec.cells().cloned().collect() };
        Ok(update_entry_exit(join_cells(&seq, self.config.max_area)?).items)
    }

    pub fn plan_layer(
        &self,
        layer: &Layer,
        layer_index: usize,
        stack: &LayerStack,
        previous: Option<&LayerPlan>,
    ) -> Result<LayerPlan, PlanError> {
        let p = stack.pixel_size_mm;
        let z_mm = (layer.z_index + 1) as f64 * stack.layer_height_mm;
        let mut warnings = Vec::new();
        let region = Self::layer_region(&layer.polygons, p, &mut warnings)?;
        let mut plan = match region {
            Some(region) => self.plan_region(&region, layer_index, layer.z_index, z_mm, p, previous)?,
            None => {
                warnings.push("layer has no printable pixels; skipped".into());
                log::warn!("layer {layer_index}: no printable pixels");
                empty_plan(layer_index, layer.z_index, z_mm, p)
            }
        };
        warnings.append(&mut plan.warnings);
        plan.warnings = warnings;
        if self.config.project_boundary && !plan.is_empty() {
            plan = project_to_boundary(plan, &layer.polygons);
            plan.metrics = self.metrics(&plan, previous);
        }
        Ok(plan)
    }

    /// Plans an already rasterized region without boundary extensions.
    pub fn plan_region(
        &self,
        region: &IopRegion,
        layer_index: usize,
        z_index: i64,
        z_mm: f64,
        pixel_size_mm: f64,
        previous: Option<&LayerPlan>,
    ) -> Result<LayerPlan, PlanError> {
        let mut plan = empty_plan(layer_index, z_index, z_mm, pixel_size_mm);
        let joined = self.sequence(region, layer_index)?;
        let below: HashSet<UnitEdge> = previous
            .map(|prev| prev.unit_print_edges().into_iter().map(|(a, b)| unit_edge(a, b)).collect())
            .unwrap_or_default();
        let mode = if previous.is_some() { self.config.overlap_mode } else { OverlapMode::Neutral };
        let alpha = self.config.alpha;
        let cells: Vec<CellPlan> = self.pool.install(|| {
            joined
                .par_iter()
                .enumerate()
                .map(|(i, cell)| {
                    let graph = apply_overlap_weights(base_graph(cell, &self.config, layer_index, i), &below, mode, &self.config);
                    let solve = || self.solver.solve(&graph, alpha, &self.config);
                    let result = if self.config.memoize {
                        self.memo.get_or_solve(&graph, alpha, self.solver.name(), solve)
                    } else {
                        solve()
                    };
                    let members = cell.members.iter().map(|m| m.cell).collect();
                    match result {
                        Ok(sol) => CellPlan { members, s: cell.s, t: cell.t, path: sol.vertices.clone(), solution: Some(sol), flagged: None },
                        Err(e) => {
                            log::warn!("layer {layer_index} cell {i}: {e}");
                            CellPlan { members, s: cell.s, t: cell.t, path: sweep(cell), solution: None, flagged: Some(e.to_string()) }
                        }
                    }
                })
                .collect()
        });
        for (i, c) in cells.iter().enumerate() {
            if let Some(reason) = &c.flagged {
                plan.warnings.push(format!("cell {i} flagged: {reason}"));
            }
        }
        plan.moves = assemble_moves(&cells, pixel_size_mm, z_mm);
        plan.cells = cells;
        plan.metrics = self.metrics(&plan, previous);
        Ok(plan)
    }

    fn metrics(&self, plan: &LayerPlan, previous: Option<&LayerPlan>) -> LayerMetrics {
        LayerMetrics {
            overlap_ratio: previous.and_then(|prev| overlap_ratio(plan, prev)),
            turn_ratio: turn_ratio(plan),
            idle_length_units: plan.moves.iter().filter(|m| m.kind == MoveKind::Idle).map(Move::length).sum::<f64>() / plan.pixel_size_mm,
            cell_count: plan.cells.len(),
            flagged_cells: plan.cells.iter().filter(|c| c.flagged.is_some()).count(),
        }
    }

    pub fn plan_stack(&self, stack: &LayerStack) -> Result<StackPlan, PlanError> {
        let mut layers: Vec<LayerPlan> = Vec::with_capacity(stack.layers.len());
        for (i, layer) in stack.layers.iter().enumerate() {
            let previous = layers.last().filter(|l| !l.is_empty());
            let plan = self.plan_layer(layer, i, stack, previous)?;
            log::info!("layer {i}: {} cells, {} moves", plan.cells.len(), plan.moves.len());
            layers.push(plan);
        }
        let summary = summarize(&layers);
        Ok(StackPlan {
            config: self.config.clone(),
            pixel_size_mm: stack.pixel_size_mm,
            layer_height_mm: stack.layer_height_mm,
            layers,
            summary,
        })
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize(layers: &[LayerPlan]) -> StackSummary {
    StackSummary {
        mean_overlap_ratio: mean(layers.iter().filter_map(|l| l.metrics.overlap_ratio)),
        mean_turn_ratio: mean(layers.iter().filter_map(|l| l.metrics.turn_ratio)),
        total_idle_length_units: layers.iter().map(|l| l.metrics.idle_length_units).sum(),
        cell_count: layers.iter().map(|l| l.metrics.cell_count).sum(),
        flagged_cells: layers.iter().map(|l| l.metrics.flagged_cells).sum(),
        skipped_layers: layers.iter().filter(|l| l.is_empty()).count(),
    }
}

pub fn plan_layer(
    layer: &Layer,
    layer_index: usize,
    stack: &LayerStack,
    previous: Option<&LayerPlan>,
    config: &SolverConfig,
) -> Result<LayerPlan, PlanError> {
    Planner::new(config.clone())?.plan_layer(layer, layer_index, stack, previous)
}

pub fn plan_stack(stack: &LayerStack, config: &SolverConfig) -> Result<StackPlan, PlanError> {
    Planner::new(config.clone())?.plan_stack(stack)
}
