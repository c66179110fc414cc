use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::IoError;
use crate::multilayer::StackPlan;

#[derive(Serialize)]
struct Row {
    layer_index: usize,
    overlap_ratio: Option<f64>,
    turn_ratio: Option<f64>,
    idle_length_units: f64,
    cell_count: usize,
    flagged_cells: usize,
}

/// One row per layer; undefined ratios are left empty.
pub fn write_metrics_csv<W: Write>(plan: &StackPlan, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for l in &plan.layers {
        let m = &l.metrics;
        w.serialize(Row {
            layer_index: l.layer_index,
            overlap_ratio: m.overlap_ratio,
            turn_ratio: m.turn_ratio,
            idle_length_units: m.idle_length_units,
            cell_count: m.cell_count,
            flagged_cells: m.flagged_cells,
        })?;
    }
    if plan.layers.is_empty() {
        w.write_record(["layer_index", "overlap_ratio", "turn_ratio", "idle_length_units", "cell_count", "flagged_cells"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_metrics_csv(plan: &StackPlan, path: &Path) -> Result<(), IoError> {
    write_metrics_csv(plan, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::geometry::{GeneralPolygon, Layer, LayerStack};
    use crate::multilayer::plan_stack;

    #[test]
    fn header_and_absent_overlap_on_first_layer() {
        let stack = LayerStack {
            pixel_size_mm: 1.0,
            layer_height_mm: 0.2,
            layers: (0..2).map(|i| Layer { z_index: i, polygons: vec![GeneralPolygon::rectangle(0.0, 0.0, 4.0, 4.0)] }).collect(),
        };
        let plan = plan_stack(&stack, &SolverConfig { delta: 4, max_area: 16, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&plan, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "layer_index,overlap_ratio,turn_ratio,idle_length_units,cell_count,flagged_cells");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,,"));
        assert!(lines[2].starts_with("1,1.0,"));
    }
}
