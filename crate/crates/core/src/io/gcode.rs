use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::geometry::Point2;
use crate::multilayer::{Move, MoveKind, StackPlan};

const CHAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcodeParams {
    /// Extra material factor on path near a 90 degree turn.
    pub extrusion_multiplier_at_turns: f64,
    /// Path length on each side of a turn that gets the extra material.
    pub turn_span_mm: f64,
    pub print_feedrate_mm_s: f64,
    pub travel_feedrate_mm_s: f64,
    pub extrusion_width_mm: f64,
    pub filament_diameter_mm: f64,
    pub hotend_temp_c: f64,
    pub bed_temp_c: f64,
}

impl Default for GcodeParams {
    fn default() -> Self {
        Self {
            extrusion_multiplier_at_turns: 1.10,
            turn_span_mm: 1.0,
            print_feedrate_mm_s: 30.0,
            travel_feedrate_mm_s: 60.0,
            extrusion_width_mm: 0.4,
            filament_diameter_mm: 1.75,
            hotend_temp_c: 200.0,
            bed_temp_c: 45.0,
        }
    }
}

impl GcodeParams {
    pub fn validate(&self) -> Result<(), IoError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(self.extrusion_multiplier_at_turns >= 1.0 && self.extrusion_multiplier_at_turns.is_finite()) {
            return Err(IoError::Params(format!("turn multiplier must be at least 1, got {}", self.extrusion_multiplier_at_turns)));
        }
        if !(self.turn_span_mm >= 0.0 && self.turn_span_mm.is_finite()) {
            return Err(IoError::Params("turn span must be non-negative".into()));
        }
        let all = [self.print_feedrate_mm_s, self.travel_feedrate_mm_s, self.extrusion_width_mm, self.filament_diameter_mm];
        if !all.into_iter().all(pos) {
            return Err(IoError::Params("feedrates, width and filament diameter must be positive".into()));
        }
        Ok(())
    }

    fn filament_area(&self) -> f64 {
        let r = self.filament_diameter_mm / 2.0;
        std::f64::consts::PI * r * r
    }

    /// Filament length for a bead of the given length.
    pub fn extrusion(&self, length: f64, layer_height: f64, multiplier: f64) -> f64 {
        length * self.extrusion_width_mm * layer_height * multiplier / self.filament_area()
    }
}

/// A stretch of print move emitted as one G1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrusionSpan {
    pub layer: usize,
    /// Index of the print move within its layer.
    pub move_index: usize,
    pub from: Point2,
    pub to: Point2,
    pub length: f64,
    pub multiplier: f64,
    pub e: f64,
}

fn lerp(a: Point2, b: Point2, f: f64) -> Point2 {
    Point2::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f)
}

fn is_right_angle(a: &Move, b: &Move) -> bool {
    let (ux, uy) = (a.to.x - a.from.x, a.to.y - a.from.y);
    let (vx, vy) = (b.to.x - b.from.x, b.to.y - b.from.y);
    let (lu, lv) = (ux.hypot(uy), vx.hypot(vy));
    lu > 0.0 && lv > 0.0 && (ux * vx + uy * vy).abs() <= 1e-9 * lu * lv
}

/// Splits one run of chained print moves at the edges of the turn windows.
fn run_spans(run: &[Move], first: usize, layer: usize, layer_height: f64, params: &GcodeParams, out: &mut Vec<ExtrusionSpan>) {
    let mut starts = Vec::with_capacity(run.len());
    let mut acc = 0.0;
    for m in run {
        starts.push(acc);
        acc += m.length();
    }
    let windows: Vec<(f64, f64)> = (1..run.len())
        .filter(|&k| is_right_angle(&run[k - 1], &run[k]))
        .map(|k| (starts[k] - params.turn_span_mm, starts[k] + params.turn_span_mm))
        .collect();
    for (k, (m, &a)) in run.iter().zip(&starts).enumerate() {
        let len = m.length();
        let b = a + len;
        let mut cuts = vec![a, b];
        for &(lo, hi) in &windows {
            cuts.extend([lo, hi].into_iter().filter(|&c| c > a && c < b));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (c0, c1) = (w[0], w[1]);
            let mid = (c0 + c1) / 2.0;
            let near_turn = windows.iter().any(|&(lo, hi)| lo <= mid && mid <= hi);
            let multiplier = if near_turn { params.extrusion_multiplier_at_turns } else { 1.0 };
            let (from, to) = (lerp(m.from, m.to, (c0 - a) / len), lerp(m.from, m.to, (c1 - a) / len));
            let length = if cuts.len() == 2 { len } else { c1 - c0 };
            out.push(ExtrusionSpan { layer, move_index: first + k, from, to, length, multiplier, e: params.extrusion(length, layer_height, multiplier) });
        }
    }
}

fn check_chain(moves: &[Move], layer: usize) -> Result<(), IoError> {
    for (i, w) in moves.windows(2).enumerate() {
        if (w[0].to.x - w[1].from.x).abs() > CHAIN_TOL || (w[0].to.y - w[1].from.y).abs() > CHAIN_TOL {
            return Err(IoError::Broken { layer, index: i + 1 });
        }
    }
    Ok(())
}

/// Every extruding span of the plan in emission order.
pub fn extrusion_spans(plan: &StackPlan, params: &GcodeParams) -> Result<Vec<ExtrusionSpan>, IoError> {
    params.validate()?;
    let mut spans = Vec::new();
    for l in &plan.layers {
        check_chain(&l.moves, l.layer_index)?;
        let mut first = 0;
        for run in l.moves.chunk_by(|a, b| a.kind == b.kind) {
            if run[0].kind == MoveKind::Print {
                run_spans(run, first, l.layer_index, plan.layer_height_mm, params, &mut spans);
            }
            first += run.len();
        }
    }
    Ok(spans)
}

pub fn write_gcode<W: Write>(plan: &StackPlan, params: &GcodeParams, mut out: W) -> Result<(), IoError> {
    if plan.layers.iter().all(|l| l.moves.is_empty()) {
        return Err(IoError::EmptyPlan);
    }
    let spans = extrusion_spans(plan, params)?;
    let print_f = params.print_feedrate_mm_s * 60.0;
    let travel_f = params.travel_feedrate_mm_s * 60.0;
    let mut s = String::new();
    writeln!(s, "; dense-infill toolpath").unwrap();
    writeln!(s, "M140 S{}", params.bed_temp_c).unwrap();
    writeln!(s, "M104 S{}", params.hotend_temp_c).unwrap();
    writeln!(s, "G92 E0").unwrap();
    writeln!(s, "M83").unwrap();
    let mut next_span = spans.iter().peekable();
    for l in plan.layers.iter().filter(|l| !l.moves.is_empty()) {
        writeln!(s, "; layer {}", l.layer_index).unwrap();
        writeln!(s, "G0 Z{:.4} F{travel_f}", l.z_mm).unwrap();
        let start = l.moves[0].from;
        writeln!(s, "G0 X{:.4} Y{:.4}", start.x, start.y).unwrap();
        let mut feed = travel_f;
        for (k, m) in l.moves.iter().enumerate() {
            match m.kind {
                MoveKind::Idle => {
                    write!(s, "G0 X{:.4} Y{:.4}", m.to.x, m.to.y).unwrap();
                    if feed != travel_f {
                        feed = travel_f;
                        write!(s, " F{feed}").unwrap();
                    }
                    s.push('\n');
                }
                MoveKind::Print => {
                    while let Some(sp) = next_span.next_if(|sp| sp.layer == l.layer_index && sp.move_index == k) {
                        write!(s, "G1 X{:.4} Y{:.4} E{}", sp.to.x, sp.to.y, sp.e).unwrap();
                        if feed != print_f {
                            feed = print_f;
                            write!(s, " F{feed}").unwrap();
                        }
                        s.push('\n');
                    }
                }
            }
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn emit_gcode(plan: &StackPlan, params: &GcodeParams, path: &Path) -> Result<(), IoError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_gcode(plan, params, &mut f)?;
    f.flush()?;
    Ok(())
}
