mod common;

use std::collections::HashSet;

use dense_infill::boundary::{boundary_vertices, project_to_boundary, ProjectionKind};
use dense_infill::config::{OverlapMode, SolverConfig};
use dense_infill::geometry::{GeneralPolygon, Layer, LayerStack, Point2};
use dense_infill::multilayer::{plan_stack, MoveKind, Planner};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{check_coverage, check_idle_locality, random_iop};

fn config_strategy() -> impl Strategy<Value = SolverConfig> {
    (prop::sample::select(vec![4u64, 16, 64]), prop::sample::select(vec![16u64, 64, 120]), prop::sample::select(vec![0.0, 0.5, 1.0]))
        .prop_filter("max_area >= delta", |(d, m, _)| m >= d)
        .prop_map(|(delta, max_area, alpha)| SolverConfig { delta, max_area, alpha, ..Default::default() })
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let orient = |p: Point2, q: Point2, r: Point2| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planned_regions_are_covered_once(seed in any::<u64>(), cfg in config_strategy()) {
        let region = random_iop(&mut ChaCha8Rng::seed_from_u64(seed), 24);
        let plan = Planner::new(cfg).unwrap().plan_region(&region, 0, 0, 0.2, 1.0, None).unwrap();
        prop_assert_eq!(plan.metrics.flagged_cells, 0);
        check_coverage(&plan, &region).map_err(TestCaseError::fail)?;
        check_idle_locality(&plan).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn projections_reach_the_outline_without_crossing(
        cx in 4.0f64..8.0, cy in 4.0f64..8.0, r in 1.5f64..4.0, sides in 3usize..12, turn in 0.0f64..1.0,
    ) {
        let pts: Vec<Point2> = (0..sides)
            .map(|k| {
                let a = std::f64::consts::TAU * (k as f64 + turn) / sides as f64;
                Point2::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        let poly = GeneralPolygon::new(pts, vec![]).unwrap();
        let stack = LayerStack { pixel_size_mm: 0.5, layer_height_mm: 0.2, layers: vec![Layer { z_index: 0, polygons: vec![poly.clone()] }] };
        let cfg = SolverConfig { delta: 16, max_area: 64, project_boundary: false, ..Default::default() };
        let plan = plan_stack(&stack, &cfg).unwrap();
        let bare = plan.layers[0].clone();
        prop_assume!(!bare.is_empty());
        let exposed = boundary_vertices(&bare, std::slice::from_ref(&poly));
        let out = project_to_boundary(bare.clone(), std::slice::from_ref(&poly));
        let ext = out.boundary.clone().unwrap_or_default();

        let mut sources = HashSet::new();
        for p in &ext.projections {
            prop_assert!(sources.insert(p.source), "{} projected twice", p.source);
            prop_assert!(exposed.contains(&p.source));
            prop_assert!(poly.distance_to_boundary(p.target) < 1e-9);
        }
        let segs: Vec<(Point2, Point2)> = ext.projections.iter().map(|p| (p.source.center_mm(0.5), p.target)).collect();
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                prop_assert!(!segments_cross(segs[i].0, segs[i].1, segs[j].0, segs[j].1));
            }
        }
        prop_assert_eq!(ext.projections.len() + ext.skipped.len(), exposed.len());
        prop_assert!(out.moves.windows(2).all(|w| (w[0].to.x - w[1].from.x).abs() < 1e-9 && (w[0].to.y - w[1].from.y).abs() < 1e-9));
        prop_assert!(out.moves.iter().all(|m| m.kind == MoveKind::Idle || m.length() > 0.0));
        prop_assert_eq!(out.visit_sequence().collect::<Vec<_>>(), bare.visit_sequence().collect::<Vec<_>>());
        let converted = ext.projections.iter().filter(|p| p.kind == ProjectionKind::ConvertedLink).count();
        prop_assert!(ext.converted_idle_edges.len() <= converted);
    }
}

#[test]
fn worker_count_does_not_change_the_plan() {
    let stack = LayerStack {
        pixel_size_mm: 0.5,
        layer_height_mm: 0.2,
        layers: (0..3).map(|i| Layer { z_index: i, polygons: vec![GeneralPolygon::regular(Point2::new(6.0, 6.0), 5.5, 9)] }).collect(),
    };
    let run = |workers| {
        let cfg = SolverConfig { delta: 16, max_area: 64, overlap_mode: OverlapMode::Minimize, worker_count: workers, ..Default::default() };
        plan_stack(&stack, &cfg).unwrap()
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.layers, b.layers);
    assert_eq!(a.summary, b.summary);
}

#[test]
fn empty_layers_are_skipped_not_fatal() {
    let tiny = GeneralPolygon::rectangle(0.0, 0.0, 0.3, 0.3);
    let stack = LayerStack {
        pixel_size_mm: 1.0,
        layer_height_mm: 0.2,
        layers: vec![
            Layer { z_index: 0, polygons: vec![GeneralPolygon::rectangle(0.0, 0.0, 4.0, 4.0)] },
            Layer { z_index: 1, polygons: vec![tiny] },
            Layer { z_index: 2, polygons: vec![GeneralPolygon::rectangle(0.0, 0.0, 4.0, 4.0)] },
        ],
    };
    let plan = plan_stack(&stack, &SolverConfig { delta: 4, max_area: 16, ..Default::default() }).unwrap();
    assert_eq!(plan.summary.skipped_layers, 1);
    assert!(plan.layers[1].is_empty() && !plan.layers[1].warnings.is_empty());
    // the layer above an empty one has nothing to overlap with
    assert_eq!(plan.layers[2].metrics.overlap_ratio, None);
}

#[test]
fn random_weights_keep_coverage() {
    let region = random_iop(&mut ChaCha8Rng::seed_from_u64(3), 20);
    let cfg = SolverConfig { delta: 16, max_area: 64, weight_source: dense_infill::config::WeightSource::Random, weight_seed: 9, ..Default::default() };
    let plan = Planner::new(cfg).unwrap().plan_region(&region, 0, 0, 0.2, 1.0, None).unwrap();
    check_coverage(&plan, &region).unwrap();
}
