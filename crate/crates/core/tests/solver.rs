mod common;

use std::collections::{BTreeSet, HashSet};

use dense_infill::config::{OverlapMode, SolverConfig};
use dense_infill::geometry::{DualGraph, GridPoint};
use dense_infill::multilayer::{apply_overlap_weights, unit_edge};
use dense_infill::solver::{cell_solver, count_turns, exact_oracle, feasible_rectangular, solve_cell, PathSolution};
use proptest::prelude::*;

use common::rect_graph;

/// Connected pixel set grown from the origin by random steps.
fn blob() -> impl Strategy<Value = Vec<GridPoint>> {
    prop::collection::vec((0usize..64, 0usize..4), 1..14).prop_map(|steps| {
        let mut cells = vec![GridPoint::new(0, 0)];
        let mut seen: BTreeSet<GridPoint> = cells.iter().copied().collect();
        for (pick, dir) in steps {
            let base = cells[pick % cells.len()];
            let (dx, dy) = [(1, 0), (0, 1), (-1, 0), (0, -1)][dir];
            let next = base.offset(dx, dy);
            if seen.insert(next) {
                cells.push(next);
            }
        }
        cells
    })
}

fn weighted_case() -> impl Strategy<Value = (DualGraph, f64)> {
    (blob(), any::<prop::sample::Index>(), any::<prop::sample::Index>(), prop::collection::vec(0usize..3, 40), prop::sample::select(vec![0.0, 0.25, 0.5, 1.0]))
        .prop_map(|(cells, si, ti, ws, alpha)| {
            let mut g = DualGraph::from_points(cells.iter().copied());
            let (s, t) = (cells[si.index(cells.len())], cells[ti.index(cells.len())]);
            g.set_terminals(s, t).unwrap();
            for e in 0..g.edge_count() {
                g.set_weight(e, [0.5, 1.0, 1.5][ws[e % ws.len()]]);
            }
            (g, alpha)
        })
}

/// Starts at s, ends at t, visits every vertex once, steps between
/// neighbours, and reports the cost it claims.
fn check_path(g: &DualGraph, sol: &PathSolution, alpha: f64) -> Result<(), TestCaseError> {
    let v = &sol.vertices;
    prop_assert_eq!(v.len(), g.vertex_count());
    prop_assert_eq!(v.iter().collect::<HashSet<_>>().len(), v.len());
    prop_assert_eq!(Some(v[0]), g.s.map(|s| g.point(s)));
    prop_assert_eq!(Some(*v.last().unwrap()), g.t.map(|t| g.point(t)));
    let mut cost = 0.0;
    for w in v.windows(2) {
        let (a, b) = (g.id_of(w[0]).unwrap(), g.id_of(w[1]).unwrap());
        let e = g.edge_between(a, b).ok_or_else(|| TestCaseError::fail("step between non-neighbours"))?;
        cost += g.weight(e);
    }
    prop_assert_eq!(sol.turn_count, count_turns(v).0);
    let objective = alpha * cost + (1.0 - alpha) * sol.turn_count as f64;
    prop_assert!((objective - sol.objective).abs() < 1e-9);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn full_model_backends_match_the_oracle((g, alpha) in weighted_case()) {
        let oracle = exact_oracle(&g, alpha);
        let full = cell_solver("full-model").unwrap();
        for backend in ["frontier-dp", "branch-bound"] {
            let cfg = SolverConfig { backend: backend.into(), ..Default::default() };
            match (&oracle, full.solve(&g, alpha, &cfg)) {
                (Ok(o), Ok(got)) => {
                    check_path(&g, &got, alpha)?;
                    prop_assert!((got.objective - o.objective).abs() < 1e-9, "{} {} vs {}", backend, got.objective, o.objective);
                }
                (Err(_), Err(_)) => {}
                (o, got) => prop_assert!(false, "{}: oracle {:?}, solver {:?}", backend, o.is_ok(), got.is_ok()),
            }
        }
    }

    #[test]
    fn heuristic_paths_are_valid_and_never_beat_the_oracle((g, alpha) in weighted_case()) {
        // threshold 0 sends every cell through relax-and-repair
        let cfg = SolverConfig { exact_threshold: 0, ..Default::default() };
        let oracle = exact_oracle(&g, alpha);
        match (&oracle, solve_cell(&g, alpha, &cfg)) {
            (Ok(o), Ok(got)) => {
                check_path(&g, &got, alpha)?;
                prop_assert!(got.objective >= o.objective - 1e-9);
                if got.optimal {
                    prop_assert!((got.objective - o.objective).abs() < 1e-9);
                }
            }
            (Err(_), Err(_)) => {}
            (o, got) => prop_assert!(false, "oracle {:?}, heuristic {:?}", o.is_ok(), got.is_ok()),
        }
    }

    #[test]
    fn rectangle_predicate_matches_search(m in 1u32..=4, n in 1u32..=4, si in any::<prop::sample::Index>(), ti in any::<prop::sample::Index>()) {
        let pts: Vec<GridPoint> = (0..n as i32).flat_map(|y| (0..m as i32).map(move |x| GridPoint::new(x, y))).collect();
        let (s, t) = (pts[si.index(pts.len())], pts[ti.index(pts.len())]);
        prop_assume!(s != t);
        prop_assert_eq!(feasible_rectangular(m, n, s, t), exact_oracle(&rect_graph(m, n, s, t), 1.0).is_ok());
    }

    #[test]
    fn overlap_weights_touch_only_weights(cells in blob(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..8), max in any::<bool>()) {
        let mut g = DualGraph::from_points(cells.iter().copied());
        g.set_terminals(cells[0], *cells.last().unwrap()).unwrap();
        let below: HashSet<_> = picks
            .iter()
            .filter(|_| g.edge_count() > 0)
            .map(|i| {
                let (a, b) = g.edge_key(i.index(g.edge_count()));
                unit_edge(a, b)
            })
            .collect();
        let mode = if max { OverlapMode::Maximize } else { OverlapMode::Minimize };
        let cfg = SolverConfig::default();
        let out = apply_overlap_weights(g.clone(), &below, mode, &cfg);
        prop_assert_eq!(out.vertices(), g.vertices());
        prop_assert_eq!((out.s, out.t), (g.s, g.t));
        prop_assert_eq!(out.edge_count(), g.edge_count());
        let want = if max { 0.5 } else { 1.5 };
        for e in 0..g.edge_count() {
            prop_assert_eq!(out.edge_key(e), g.edge_key(e));
            let expected = if below.contains(&g.edge_key(e)) { want } else { 1.0 };
            prop_assert_eq!(out.weight(e), expected);
        }
        let neutral = apply_overlap_weights(g.clone(), &below, OverlapMode::Neutral, &cfg);
        prop_assert!((0..g.edge_count()).all(|e| neutral.weight(e) == 1.0));
    }
}
