use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::multilayer::StackPlan;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    plan: &'a StackPlan,
}

#[derive(Deserialize)]
struct Versioned {
    schema_version: u32,
}

#[derive(Deserialize)]
struct OwnedEnvelope {
    plan: StackPlan,
}

pub fn write_toolpath_json<W: Write>(plan: &StackPlan, out: W) -> Result<(), IoError> {
    serde_json::to_writer_pretty(out, &Envelope { schema_version: SCHEMA_VERSION, plan })?;
    Ok(())
}

pub fn read_toolpath_json<R: Read>(mut input: R) -> Result<StackPlan, IoError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let v: Versioned = serde_json::from_str(&text)?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(IoError::Schema { found: v.schema_version, expected: SCHEMA_VERSION });
    }
    Ok(serde_json::from_str::<OwnedEnvelope>(&text)?.plan)
}

pub fn emit_toolpath_json(plan: &StackPlan, path: &Path) -> Result<(), IoError> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_toolpath_json(plan, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn load_toolpath_json(path: &Path) -> Result<StackPlan, IoError> {
    read_toolpath_json(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::geometry::{GeneralPolygon, Layer, LayerStack};
    use crate::multilayer::{plan_stack, summarize};

    fn round_trip(plan: &StackPlan) -> StackPlan {
        let mut buf = Vec::new();
        write_toolpath_json(plan, &mut buf).unwrap();
        read_toolpath_json(buf.as_slice()).unwrap()
    }

    #[test]
    fn empty_stack_round_trips() {
        let plan = StackPlan {
            config: SolverConfig::default(),
            pixel_size_mm: 0.4,
            layer_height_mm: 0.2,
            layers: vec![],
            summary: summarize(&[]),
        };
        assert_eq!(round_trip(&plan), plan);
    }

    #[test]
    fn planned_layer_round_trips_with_flags() {
        let stack = LayerStack {
            pixel_size_mm: 0.4,
            layer_height_mm: 0.2,
            layers: vec![Layer { z_index: 0, polygons: vec![GeneralPolygon::regular(crate::geometry::Point2::new(2.0, 2.0), 1.9, 7)] }],
        };
        let mut plan = plan_stack(&stack, &SolverConfig { delta: 4, max_area: 16, ..Default::default() }).unwrap();
        plan.layers[0].cells[0].flagged = Some("time limit".into());
        let back = round_trip(&plan);
        assert_eq!(back, plan);
        assert_eq!(back.layers[0].cells[0].flagged.as_deref(), Some("time limit"));
    }

    #[test]
    fn other_schema_versions_are_rejected() {
        let text = r#"{"schema_version": 99, "plan": null}"#;
        assert!(matches!(read_toolpath_json(text.as_bytes()), Err(IoError::Schema { found: 99, .. })));
    }
}
