//! Extending the pixel toolpath out to the true outline of a general
//! polygon.
//!
//! A visited pixel is exposed on a side when the neighbouring pixel is not
//! printed but the polygon still continues past that side along the axis
//! through the pixel centre. Exposed pixels get at most one extension each:
//! - an edge whose two ends are exposed on the same side perpendicular to
//!   it gets an out-and-back spike at each end;
//! - any other exposed pixel borrows one of its path links: the link turns
//!   into travel to the boundary point and the pixel is reached by printing
//!   back in from there.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::geometry::{segments_intersect, GeneralPolygon, GridPoint, Point2, DIRS};
use crate::multilayer::{LayerPlan, Move, MoveKind};

/// Farthest a projection may reach from the pixel centre, in pixels.
const REACH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionKind {
    OutAndBack,
    ConvertedLink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub source: GridPoint,
    pub target: Point2,
    /// Index into the four axis directions.
    pub direction: usize,
    pub kind: ProjectionKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryExtension {
    pub projections: Vec<Projection>,
    /// Unit print edges turned into travel moves.
    pub converted_idle_edges: Vec<(GridPoint, GridPoint)>,
    /// Exposed pixels left without an extension.
    pub skipped: Vec<GridPoint>,
}

/// Exposed sides per pixel: direction and distance from the pixel centre to
/// the outline, within reach or `None` beyond it.
pub fn exposed_sides(
    region: &HashSet<GridPoint>,
    polygons: &[GeneralPolygon],
    pixel_size: f64,
) -> BTreeMap<GridPoint, Vec<(usize, Option<f64>)>> {
    let eps = 1e-7 * pixel_size;
    let mut out = BTreeMap::new();
    for &v in region {
        let c = v.center_mm(pixel_size);
        let mut sides = Vec::new();
        for (d, &(dx, dy)) in DIRS.iter().enumerate() {
            if region.contains(&v.offset(dx, dy)) {
                continue;
            }
            let hit = polygons
                .iter()
                .filter_map(|poly| poly.ray_hit(c, (f64::from(dx), f64::from(dy)), eps))
                .fold(f64::INFINITY, f64::min);
            if hit > 0.5 * pixel_size + eps {
                sides.push((d, (hit <= REACH * pixel_size + eps).then_some(hit)));
            }
        }
        if !sides.is_empty() {
            out.insert(v, sides);
        }
    }
    out
}

/// Visited pixels with at least one exposed side.
pub fn boundary_vertices(plan: &LayerPlan, polygons: &[GeneralPolygon]) -> BTreeSet<GridPoint> {
    let region: HashSet<GridPoint> = plan.visit_sequence().collect();
    exposed_sides(&region, polygons, plan.pixel_size_mm).into_keys().collect()
}

#[derive(Debug, Clone, Copy)]
struct Step {
    kind: MoveKind,
    from: Point2,
    to: Point2,
    extension: bool,
}

fn near(a: Point2, b: Point2, tol: f64) -> bool {
    (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
}

struct Projector {
    p: f64,
    accepted: Vec<(Point2, Point2)>,
    result: BoundaryExtension,
    warnings: Vec<String>,
}

impl Projector {
    fn target(&self, v: GridPoint, d: usize, dist: f64) -> Point2 {
        let c = v.center_mm(self.p);
        Point2::new(c.x + f64::from(DIRS[d].0) * dist, c.y + f64::from(DIRS[d].1) * dist)
    }

    fn crosses(&self, v: GridPoint, target: Point2) -> bool {
        let c = v.center_mm(self.p);
        self.accepted.iter().any(|&(a, b)| segments_intersect(a, b, c, target))
    }

    /// Records a new extension segment unless it meets an earlier one.
    fn admit(&mut self, v: GridPoint, d: usize, target: Point2, kind: ProjectionKind) -> bool {
        if self.crosses(v, target) {
            return false;
        }
        self.accepted.push((v.center_mm(self.p), target));
        self.result.projections.push(Projection { source: v, target, direction: d, kind });
        true
    }
}

/// Adds boundary extensions to a planned layer. Returns the plan unchanged
/// when no visited pixel is exposed.
pub fn project_to_boundary(mut plan: LayerPlan, polygons: &[GeneralPolygon]) -> LayerPlan {
    let p = plan.pixel_size_mm;
    let order: Vec<GridPoint> = plan.visit_sequence().collect();
    let region: HashSet<GridPoint> = order.iter().copied().collect();
    let exposed = exposed_sides(&region, polygons, p);
    if exposed.is_empty() {
        return plan;
    }
    let tol = 1e-9 * p.max(1.0);
    let reach = |v: &GridPoint, d: usize| exposed.get(v).and_then(|s| s.iter().find(|x| x.0 == d)).and_then(|x| x.1);
    let mut pr = Projector { p, accepted: Vec::new(), result: BoundaryExtension::default(), warnings: Vec::new() };
    let mut done: HashSet<GridPoint> = HashSet::new();
    let z = plan.z_mm;

    // edges with both ends exposed on the same perpendicular side
    let unit: Vec<Option<(GridPoint, GridPoint)>> = {
        let grid = |q: Point2| {
            let (fx, fy) = (q.x / p - 0.5, q.y / p - 0.5);
            let (rx, ry) = (fx.round(), fy.round());
            ((fx - rx).abs() < 1e-6 && (fy - ry).abs() < 1e-6).then(|| GridPoint::new(rx as i32, ry as i32))
        };
        plan.moves
            .iter()
            .map(|m| {
                let (a, b) = (grid(m.from)?, grid(m.to)?);
                (m.kind == MoveKind::Print && a.manhattan(b) == 1).then_some((a, b))
            })
            .collect()
    };
    let mut steps: Vec<Step> = Vec::with_capacity(plan.moves.len());
    for (m, e) in plan.moves.iter().zip(&unit) {
        let base = Step { kind: m.kind, from: m.from, to: m.to, extension: false };
        let Some((a, b)) = *e else {
            steps.push(base);
            continue;
        };
        let horizontal = a.y == b.y;
        let mut best: Option<(f64, usize, f64, f64)> = None;
        if !done.contains(&a) && !done.contains(&b) {
            for d in 0..4 {
                if (DIRS[d].1 == 0) == horizontal {
                    continue;
                }
                if let (Some(ha), Some(hb)) = (reach(&a, d), reach(&b, d)) {
                    if best.is_none_or(|x| ha + hb < x.0) {
                        best = Some((ha + hb, d, ha, hb));
                    }
                }
            }
        }
        let Some((_, d, ha, hb)) = best else {
            steps.push(base);
            continue;
        };
        let (ta, tb) = (pr.target(a, d, ha), pr.target(b, d, hb));
        let (ca, cb) = (a.center_mm(p), b.center_mm(p));
        if pr.admit(a, d, ta, ProjectionKind::OutAndBack) {
            steps.push(Step { kind: MoveKind::Print, from: ca, to: ta, extension: true });
            steps.push(Step { kind: MoveKind::Print, from: ta, to: ca, extension: true });
            done.insert(a);
        }
        steps.push(base);
        if pr.admit(b, d, tb, ProjectionKind::OutAndBack) {
            steps.push(Step { kind: MoveKind::Print, from: cb, to: tb, extension: true });
            steps.push(Step { kind: MoveKind::Print, from: tb, to: cb, extension: true });
            done.insert(b);
        }
    }

    // remaining exposed pixels borrow a link
    for &v in &order {
        let Some(sides) = exposed.get(&v) else { continue };
        if done.contains(&v) {
            continue;
        }
        let mut dirs: Vec<(f64, usize)> = sides.iter().filter_map(|&(d, h)| h.map(|h| (h, d))).collect();
        if dirs.is_empty() {
            pr.warnings.push(format!("outline beyond reach of {v}; not extended"));
            pr.result.skipped.push(v);
            continue;
        }
        dirs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let c = v.center_mm(p);
        let incoming = steps.iter().position(|s| !s.extension && near(s.to, c, tol));
        let outgoing = steps.iter().position(|s| !s.extension && near(s.from, c, tol));
        let perpendicular = |i: usize, d: usize| {
            let s = steps[i];
            let (dx, dy) = (s.to.x - s.from.x, s.to.y - s.from.y);
            (dx * f64::from(DIRS[d].0) + dy * f64::from(DIRS[d].1)).abs() <= tol
        };
        let mut applied = false;
        'dirs: for &(h, d) in &dirs {
            let target = pr.target(v, d, h);
            if pr.crosses(v, target) {
                continue;
            }
            let choices = [
                (incoming, true, MoveKind::Idle),
                (outgoing, false, MoveKind::Idle),
                (incoming, true, MoveKind::Print),
                (outgoing, false, MoveKind::Print),
            ];
            for (link, is_in, kind) in choices {
                let Some(i) = link else { continue };
                if steps[i].kind != kind || (kind == MoveKind::Print && !perpendicular(i, d)) {
                    continue;
                }
                pr.admit(v, d, target, ProjectionKind::ConvertedLink);
                let old = steps[i];
                if old.kind == MoveKind::Print {
                    let other = if is_in { old.from } else { old.to };
                    let u = GridPoint::new((other.x / p - 0.5).round() as i32, (other.y / p - 0.5).round() as i32);
                    pr.result.converted_idle_edges.push((u, v));
                }
                let replacement = if is_in {
                    [
                        Step { kind: MoveKind::Idle, from: old.from, to: target, extension: false },
                        Step { kind: MoveKind::Print, from: target, to: c, extension: true },
                    ]
                } else {
                    [
                        Step { kind: MoveKind::Print, from: c, to: target, extension: true },
                        Step { kind: MoveKind::Idle, from: target, to: old.to, extension: false },
                    ]
                };
                steps.splice(i..=i, replacement);
                applied = true;
                break 'dirs;
            }
            // no link to borrow: spike out and back
            pr.admit(v, d, target, ProjectionKind::OutAndBack);
            let at = incoming.map_or(outgoing.unwrap_or(steps.len()), |i| i + 1);
            steps.splice(
                at..at,
                [
                    Step { kind: MoveKind::Print, from: c, to: target, extension: true },
                    Step { kind: MoveKind::Print, from: target, to: c, extension: true },
                ],
            );
            applied = true;
            break;
        }
        if applied {
            done.insert(v);
        } else {
            pr.warnings.push(format!("every extension at {v} would cross another; not extended"));
            pr.result.skipped.push(v);
        }
    }

    plan.moves = steps.into_iter().map(|s| Move { kind: s.kind, from: s.from, to: s.to, z }).collect();
    for w in &pr.warnings {
        log::info!("layer {}: {w}", plan.layer_index);
    }
    plan.warnings.extend(pr.warnings);
    plan.boundary = Some(pr.result);
    plan
}
