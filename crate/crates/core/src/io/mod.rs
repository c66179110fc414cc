//! File formats: toolpath JSON, metrics CSV, G-code and SVG renders, plus the
//! key=value configuration file.

mod config_file;
mod gcode;
mod json;
mod metrics;
mod svg;

pub use config_file::{load_config, parse_config};
pub use gcode::{emit_gcode, extrusion_spans, write_gcode, ExtrusionSpan, GcodeParams};
pub use json::{emit_toolpath_json, load_toolpath_json, read_toolpath_json, write_toolpath_json, SCHEMA_VERSION};
pub use metrics::{emit_metrics_csv, write_metrics_csv};
pub use svg::{emit_svg, render_decomposition, render_layer, SvgOptions};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("toolpath json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported toolpath schema version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config file line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid g-code parameters: {0}")]
    Params(String),
    #[error("plan has no moves to emit")]
    EmptyPlan,
    #[error("layer {layer}: move {index} does not start where the previous one ended")]
    Broken { layer: usize, index: usize },
}
