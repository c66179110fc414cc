use dense_infill::config::SolverConfig;
use dense_infill::geometry::{GeneralPolygon, Layer, LayerStack, Point2};
use dense_infill::io::{read_toolpath_json, render_layer, write_gcode, write_metrics_csv, write_toolpath_json, GcodeParams, SvgOptions};
use dense_infill::multilayer::{plan_stack, MoveKind, StackPlan};
use proptest::prelude::*;

fn stack_strategy() -> impl Strategy<Value = StackPlan> {
    (1usize..4, 3usize..10, 2.0f64..4.0, 0.0f64..1.0, any::<bool>()).prop_map(|(layers, sides, r, turn, project)| {
        let stack = LayerStack {
            pixel_size_mm: 0.5,
            layer_height_mm: 0.2,
            layers: (0..layers)
                .map(|i| {
                    let pts = (0..sides)
                        .map(|k| {
                            let a = std::f64::consts::TAU * (k as f64 + turn + 0.1 * i as f64) / sides as f64;
                            Point2::new(5.0 + r * a.cos(), 5.0 + r * a.sin())
                        })
                        .collect();
                    Layer { z_index: i as i64, polygons: vec![GeneralPolygon::new(pts, vec![]).unwrap()] }
                })
                .collect(),
        };
        plan_stack(&stack, &SolverConfig { delta: 16, max_area: 64, project_boundary: project, ..Default::default() }).unwrap()
    })
}

/// Sum of E words over G1 lines.
fn total_e(gcode: &str) -> f64 {
    gcode
        .lines()
        .filter(|l| l.starts_with("G1 "))
        .flat_map(|l| l.split_whitespace())
        .filter_map(|w| w.strip_prefix('E'))
        .map(|v| v.parse::<f64>().unwrap())
        .sum()
}

fn print_length(plan: &StackPlan) -> f64 {
    plan.layers.iter().flat_map(|l| &l.moves).filter(|m| m.kind == MoveKind::Print).map(|m| m.length()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn toolpath_json_round_trips(plan in stack_strategy()) {
        let mut buf = Vec::new();
        write_toolpath_json(&plan, &mut buf).unwrap();
        let back = read_toolpath_json(buf.as_slice()).unwrap();
        prop_assert_eq!(back, plan);
    }

    #[test]
    fn filament_matches_bead_volume(plan in stack_strategy(), mult in 1.0f64..1.5, span in 0.0f64..2.0) {
        let flat = GcodeParams { extrusion_multiplier_at_turns: 1.0, turn_span_mm: span, ..Default::default() };
        let mut out = Vec::new();
        write_gcode(&plan, &flat, &mut out).unwrap();
        let e = total_e(std::str::from_utf8(&out).unwrap());
        let area = std::f64::consts::PI * (flat.filament_diameter_mm / 2.0).powi(2);
        let want = print_length(&plan) * flat.extrusion_width_mm * plan.layer_height_mm / area;
        prop_assert!((e - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", e, want);

        // extra material lands only on part of the path, and never exceeds the factor
        let boosted = GcodeParams { extrusion_multiplier_at_turns: mult, ..flat };
        let mut out = Vec::new();
        write_gcode(&plan, &boosted, &mut out).unwrap();
        let eb = total_e(std::str::from_utf8(&out).unwrap());
        prop_assert!(eb >= e - 1e-9 && eb <= mult * e + 1e-9);
    }
}

#[test]
fn svg_and_csv_are_deterministic() {
    let stack = LayerStack {
        pixel_size_mm: 0.5,
        layer_height_mm: 0.2,
        layers: (0..2).map(|i| Layer { z_index: i, polygons: vec![GeneralPolygon::regular(Point2::new(4.0, 4.0), 3.5, 7)] }).collect(),
    };
    let cfg = SolverConfig { delta: 16, max_area: 64, ..Default::default() };
    let (a, b) = (plan_stack(&stack, &cfg).unwrap(), plan_stack(&stack, &cfg).unwrap());
    let opts = SvgOptions::default();
    assert_eq!(render_layer(&a.layers[1], &opts), render_layer(&b.layers[1], &opts));

    let mut csv = Vec::new();
    write_metrics_csv(&a, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let width = lines[0].split(',').count();
    assert!(lines.iter().all(|l| l.split(',').count() == width));
}
