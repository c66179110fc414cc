#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use dense_infill::config::SolverConfig;
use dense_infill::geometry::{DualGraph, GridPoint, IopRegion, Point2};
use dense_infill::multilayer::{LayerPlan, MoveKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Union of a few random rectangles with a few rectangles carved out, inside
/// a square of side at most `max_side`.
pub fn random_iop(rng: &mut ChaCha8Rng, max_side: i32) -> IopRegion {
    let side = rng.gen_range(4..=max_side);
    let mut px = HashSet::new();
    for _ in 0..rng.gen_range(1..=5) {
        let (w, h) = (rng.gen_range(1..=side), rng.gen_range(1..=side));
        let (x, y) = (rng.gen_range(0..=side - w), rng.gen_range(0..=side - h));
        for i in x..x + w {
            for j in y..y + h {
                px.insert(GridPoint::new(i, j));
            }
        }
    }
    for _ in 0..rng.gen_range(0..=3) {
        let (w, h) = (rng.gen_range(1..=side / 2 + 1), rng.gen_range(1..=side / 2 + 1));
        let (x, y) = (rng.gen_range(0..=side - w), rng.gen_range(0..=side - h));
        for i in x..x + w {
            for j in y..y + h {
                px.remove(&GridPoint::new(i, j));
            }
        }
    }
    if px.is_empty() {
        px.insert(GridPoint::new(0, 0));
    }
    IopRegion::from_pixels(px).unwrap()
}

pub fn corpus(seed: u64, count: usize, max_side: i32) -> Vec<IopRegion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_iop(&mut rng, max_side)).collect()
}

/// (delta, max_area) pairs of the sweep grid that satisfy max_area >= delta.
pub fn sweep_configs() -> Vec<SolverConfig> {
    let mut out = Vec::new();
    for delta in [4, 16, 64] {
        for max_area in [16, 64, 120] {
            if max_area >= delta {
                out.push(SolverConfig { delta, max_area, ..Default::default() });
            }
        }
    }
    out
}

pub fn rect_graph(w: u32, h: u32, s: GridPoint, t: GridPoint) -> DualGraph {
    let mut g = DualGraph::from_points((0..h as i32).flat_map(|y| (0..w as i32).map(move |x| GridPoint::new(x, y))));
    g.set_terminals(s, t).unwrap();
    g
}

pub fn grid_of(q: Point2, p: f64) -> GridPoint {
    GridPoint::new((q.x / p - 0.5).round() as i32, (q.y / p - 0.5).round() as i32)
}

fn close(a: Point2, b: Point2) -> bool {
    (a.x - b.x).abs() <= 1e-9 && (a.y - b.y).abs() <= 1e-9
}

/// Every pixel of `region` is visited exactly once, print moves are unit
/// axis steps between pixel centres, and moves chain.
pub fn check_coverage(plan: &LayerPlan, region: &IopRegion) -> Result<(), String> {
    let p = plan.pixel_size_mm;
    let mut seen: HashMap<GridPoint, usize> = HashMap::new();
    for v in plan.visit_sequence() {
        *seen.entry(v).or_default() += 1;
    }
    if let Some((v, n)) = seen.iter().find(|(_, &n)| n != 1) {
        return Err(format!("{v} visited {n} times"));
    }
    let want: HashSet<GridPoint> = region.pixels().collect();
    let got: HashSet<GridPoint> = seen.keys().copied().collect();
    if want != got {
        return Err(format!("visited {} pixels, region has {}", got.len(), want.len()));
    }
    for m in &plan.moves {
        if m.kind == MoveKind::Print {
            let (a, b) = (grid_of(m.from, p), grid_of(m.to, p));
            if a.manhattan(b) != 1 || !close(a.center_mm(p), m.from) || !close(b.center_mm(p), m.to) {
                return Err(format!("print move {:?} -> {:?} is not a unit edge", m.from, m.to));
            }
            if !region.contains(a) || !region.contains(b) {
                return Err("print move leaves the region".into());
            }
        }
    }
    if plan.moves.windows(2).any(|w| !close(w[0].to, w[1].from)) {
        return Err("moves do not chain".into());
    }
    Ok(())
}

/// Each idle move runs from the exit of one joined cell to the entry of the
/// next.
pub fn check_idle_locality(plan: &LayerPlan) -> Result<(), String> {
    let p = plan.pixel_size_mm;
    let links: HashSet<(GridPoint, GridPoint)> = plan.cells.windows(2).map(|w| (w[0].t, w[1].s)).collect();
    for m in plan.moves.iter().filter(|m| m.kind == MoveKind::Idle) {
        let link = (grid_of(m.from, p), grid_of(m.to, p));
        if !links.contains(&link) {
            return Err(format!("idle move {} -> {} is not a cell-to-cell link", link.0, link.1));
        }
    }
    Ok(())
}
