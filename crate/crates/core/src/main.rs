use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dense_infill::config::{OverlapMode, SolverConfig, WeightSource};
use dense_infill::decomposition::{decompose_layer, CellSequence};
use dense_infill::geometry::{load_layer_stack, rasterize, IopRegion, LayerStack};
use dense_infill::io::{self as fmt, GcodeParams, SvgOptions};
use dense_infill::multilayer::{layer_corners, summarize, PlanError, Planner, StackPlan};
use dense_infill::solver::{BackendRegistry, SolverError, SolverRegistry};

#[derive(Parser)]
#[command(name = "dense-infill", version, about = "Dense infill toolpaths from sliced layer polygons")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadtree decomposition and Hilbert order of one layer, as SVG.
    Decompose {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        layer: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// SVG output; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the ordered cells as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Plan a single layer.
    Plan {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        layer: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Toolpath JSON output; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also render the layer as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Plan every layer of a stack, bottom-up.
    PlanStack {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Toolpath JSON output; defaults to <input>.plan.json.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-layer metrics CSV; defaults to <input>.metrics.csv.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Per-layer metrics CSV from a toolpath JSON.
    Metrics {
        plan: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// SVG of one planned layer.
    Render {
        plan: PathBuf,
        #[arg(long, default_value_t = 0)]
        layer: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Leave out cell outlines and entry/exit dots.
        #[arg(long)]
        path_only: bool,
        /// Output pixels per millimetre.
        #[arg(long, default_value_t = 20.0)]
        scale: f64,
    },
    /// G-code from a toolpath JSON.
    Gcode {
        plan: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        params: GcodeArgs,
    },
    /// Registered cell solvers and MIP backends.
    Solvers,
}

#[derive(Args)]
struct SolverArgs {
    /// key = value settings file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge cost against turn cost, in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest quadtree leaf area in pixels.
    #[arg(long)]
    delta: Option<u64>,
    /// Largest joined-cell area in pixels.
    #[arg(long)]
    max_area: Option<u64>,
    /// Edge overlap with the layer below: max, min or neutral.
    #[arg(long)]
    overlap_mode: Option<OverlapMode>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Per-cell time limit in seconds for both solver stages.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Flip the curve's exit corner on odd layers.
    #[arg(long)]
    alternate_corners: bool,
    /// Cell solver by registered name.
    #[arg(long)]
    solver: Option<String>,
    /// MIP backend by registered name.
    #[arg(long)]
    backend: Option<String>,
    /// Random edge weights with this seed.
    #[arg(long)]
    random_weights: Option<u64>,
    /// Keep the pixel toolpath inside the raster.
    #[arg(long)]
    no_boundary: bool,
}

#[derive(Args)]
struct GcodeArgs {
    #[arg(long)]
    turn_multiplier: Option<f64>,
    /// Millimetres of path on each side of a turn that get extra material.
    #[arg(long)]
    turn_span: Option<f64>,
    /// Print speed in mm/s.
    #[arg(long)]
    feedrate: Option<f64>,
    /// Travel speed in mm/s.
    #[arg(long)]
    travel_feedrate: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    filament: Option<f64>,
    #[arg(long)]
    hotend: Option<f64>,
    #[arg(long)]
    bed: Option<f64>,
}

enum Failure {
    Usage(String),
    Planning(String),
}

impl From<fmt::IoError> for Failure {
    fn from(e: fmt::IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Config(_) | PlanError::Solver(SolverError::UnknownSolver(_) | SolverError::UnknownBackend(_)) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Planning(e.to_string()),
        }
    }
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => fmt::load_config(path)?,
            None => SolverConfig::default(),
        };
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.delta {
            c.delta = v;
        }
        if let Some(v) = self.max_area {
            c.max_area = v;
        }
        if let Some(v) = self.overlap_mode {
            c.overlap_mode = v;
        }
        if let Some(v) = self.workers {
            c.worker_count = v;
        }
        if let Some(v) = self.time_limit {
            c.relaxed_time_limit_s = v;
            c.full_time_limit_s = v;
        }
        if let Some(v) = &self.solver {
            c.cell_solver = v.clone();
        }
        if let Some(v) = &self.backend {
            c.backend = v.clone();
        }
        if let Some(seed) = self.random_weights {
            c.weight_source = WeightSource::Random;
            c.weight_seed = seed;
        }
        c.alternate_corners |= self.alternate_corners;
        c.project_boundary &= !self.no_boundary;
        c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(c)
    }
}

impl GcodeArgs {
    fn params(&self) -> Result<GcodeParams, Failure> {
        let mut p = GcodeParams::default();
        let fields = [
            (self.turn_multiplier, &mut p.extrusion_multiplier_at_turns),
            (self.turn_span, &mut p.turn_span_mm),
            (self.feedrate, &mut p.print_feedrate_mm_s),
            (self.travel_feedrate, &mut p.travel_feedrate_mm_s),
            (self.width, &mut p.extrusion_width_mm),
            (self.filament, &mut p.filament_diameter_mm),
            (self.hotend, &mut p.hotend_temp_c),
            (self.bed, &mut p.bed_temp_c),
        ];
        for (flag, field) in fields {
            if let Some(v) = flag {
                *field = v;
            }
        }
        p.validate()?;
        Ok(p)
    }
}

fn load_stack(path: &Path) -> Result<LayerStack, Failure> {
    load_layer_stack(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_plan(path: &Path) -> Result<StackPlan, Failure> {
    fmt::load_toolpath_json(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_out(output: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn sibling(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    input.with_file_name(format!("{stem}{suffix}"))
}

fn pick<T>(items: &[T], index: usize, what: &str) -> Result<usize, Failure> {
    if index < items.len() {
        Ok(index)
    } else {
        Err(Failure::Usage(format!("{what} {index} out of range ({} available)", items.len())))
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Decompose { input, layer, solver, output, json } => {
            let config = solver.config()?;
            let stack = load_stack(&input)?;
            let i = pick(&stack.layers, layer, "layer")?;
            let mut region: Option<IopRegion> = None;
            for poly in &stack.layers[i].polygons {
                if let Ok(r) = rasterize(poly, stack.pixel_size_mm) {
                    region = Some(region.map_or(r.clone(), |acc| acc.union(&r)));
                }
            }
            let region = region.ok_or_else(|| Failure::Planning(format!("layer {layer} has no printable pixels")))?;
            let (entry, exit) = layer_corners(&config, i);
            let dec = decompose_layer(&region, config.delta, entry, exit).map_err(|e| Failure::Planning(e.to_string()))?;
            if let Some(path) = json {
                let seqs: Vec<&CellSequence> = dec.components.iter().map(|c| &c.sequence).collect();
                fs::write(path, serde_json::to_vec_pretty(&seqs).map_err(fmt::IoError::from)?)?;
            }
            let svg = fmt::render_decomposition(&dec, stack.pixel_size_mm, &SvgOptions::default());
            write_out(output.as_deref(), svg.as_bytes())
        }
        Command::Plan { input, layer, solver, output, svg } => {
            let config = solver.config()?;
            let stack = load_stack(&input)?;
            let i = pick(&stack.layers, layer, "layer")?;
            let planner = Planner::new(config.clone())?;
            let plan = planner.plan_layer(&stack.layers[i], i, &stack, None)?;
            if let Some(path) = svg {
                fmt::emit_svg(&plan, &SvgOptions::default(), &path)?;
            }
            let layers = vec![plan];
            let stack_plan = StackPlan {
                config,
                pixel_size_mm: stack.pixel_size_mm,
                layer_height_mm: stack.layer_height_mm,
                summary: summarize(&layers),
                layers,
            };
            let mut buf = Vec::new();
            fmt::write_toolpath_json(&stack_plan, &mut buf)?;
            write_out(output.as_deref(), &buf)
        }
        Command::PlanStack { input, solver, output, metrics } => {
            let config = solver.config()?;
            let stack = load_stack(&input)?;
            let plan = Planner::new(config)?.plan_stack(&stack)?;
            let output = output.unwrap_or_else(|| sibling(&input, ".plan.json"));
            let metrics = metrics.unwrap_or_else(|| sibling(&input, ".metrics.csv"));
            fmt::emit_toolpath_json(&plan, &output)?;
            fmt::emit_metrics_csv(&plan, &metrics)?;
            let s = &plan.summary;
            eprintln!(
                "{} layers, {} cells, {} flagged; wrote {} and {}",
                plan.layers.len(),
                s.cell_count,
                s.flagged_cells,
                output.display(),
                metrics.display()
            );
            if s.flagged_cells > 0 {
                eprintln!("warning: {} cell(s) fell back to a sweep path", s.flagged_cells);
            }
            Ok(())
        }
        Command::Metrics { plan, output } => {
            let plan = load_plan(&plan)?;
            let mut buf = Vec::new();
            fmt::write_metrics_csv(&plan, &mut buf)?;
            write_out(output.as_deref(), &buf)
        }
        Command::Render { plan, layer, output, path_only, scale } => {
            let plan = load_plan(&plan)?;
            let i = pick(&plan.layers, layer, "layer")?;
            let opts = SvgOptions { scale, show_cells: !path_only, show_terminals: !path_only, ..Default::default() };
            write_out(output.as_deref(), fmt::render_layer(&plan.layers[i], &opts).as_bytes())
        }
        Command::Gcode { plan, output, params } => {
            let params = params.params()?;
            let plan = load_plan(&plan)?;
            let mut buf = Vec::new();
            fmt::write_gcode(&plan, &params, &mut buf).map_err(|e| match e {
                fmt::IoError::Broken { .. } | fmt::IoError::EmptyPlan => Failure::Planning(e.to_string()),
                other => Failure::Usage(other.to_string()),
            })?;
            write_out(output.as_deref(), &buf)
        }
        Command::Solvers => {
            println!("cell solvers: {}", SolverRegistry::with_defaults().names().join(", "));
            println!("backends: {}", BackendRegistry::with_defaults().names().join(", "));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Planning(msg)) => {
            eprintln!("planning failed: {msg}");
            ExitCode::from(2)
        }
    }
}
