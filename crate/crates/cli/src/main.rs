//! `moldgate`: size and place the injection gate of an STL part.
//!
//! Exit codes: 0 on success, 2 when no grid node is feasible (the report is
//! still written), 1 on any input or validation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use moldgate_core::gateplan::{parse_polyline, plan_gate, DepthCheck, Direction, PlanConfig, DEFAULT_RING_SAMPLES};
use moldgate_core::mesh::{parse_stl, Vector};
use moldgate_core::parallel::Parallelism;
use moldgate_core::report::{export_marked_geometry, render_report, PlanOutcome, ReportMetadata};
use moldgate_core::rheology::{MaterialDatabase, MaterialParams};

const MATERIALS_ENV: &str = "MOLDGATE_MATERIALS";

#[derive(Debug, Parser)]
#[command(
    name = "moldgate",
    version,
    about = "Injection gate sizing and placement for STL parts"
)]
#[command(allow_negative_numbers = true)]
struct CliArgs {
    /// Part surface, binary or ASCII STL, millimetres.
    input: PathBuf,

    /// Material name from the database, optionally NAME:CASE (e.g. ABS:4).
    #[arg(long, short)]
    material: Option<String>,
    /// Power-law index.
    #[arg(long)]
    n: Option<f64>,
    /// Melt temperature, °C.
    #[arg(long)]
    t_melt: Option<f64>,
    /// Mould wall temperature, °C.
    #[arg(long)]
    t_wall: Option<f64>,
    /// Optimal shear rate, 1/s.
    #[arg(long)]
    gamma_opt: Option<f64>,
    /// Optimal viscosity, Pa·s.
    #[arg(long)]
    mu_opt: Option<f64>,
    /// Thermal conductivity, W/(m·°C).
    #[arg(long)]
    kappa: Option<f64>,

    /// Demolding direction; normalized internally.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], default_values_t = [0.0, 0.0, 1.0])]
    direction: Vec<f64>,
    /// Grid spacing, mm. Defaults to max(bbox diagonal / 200, 5th percentile edge length).
    #[arg(long)]
    spacing: Option<f64>,
    /// Part wall thickness H, mm.
    #[arg(long)]
    thickness: f64,
    /// Place the gate on the parting line instead of the visible surface.
    #[arg(long)]
    aesthetic: bool,
    /// Ring rays per node.
    #[arg(long, default_value_t = DEFAULT_RING_SAMPLES)]
    ring_samples: usize,
    /// Also size an equivalent rectangular gate with this width/height ratio.
    #[arg(long, num_args = 0..=1, default_missing_value = "4")]
    rect_aspect: Option<f64>,
    /// Parting-line polyline (one `x y z` per line) for aesthetic mode.
    #[arg(long)]
    parting_line: Option<PathBuf>,
    /// Report path; defaults to the input path with extension `gate.json`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the part with a gate marker as vertex-coloured PLY.
    #[arg(long)]
    ply: Option<PathBuf>,
    /// Upper bound on worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Disable the ring depth-coherence check.
    #[arg(long)]
    strict_paper: bool,
}

fn load_database() -> Result<MaterialDatabase> {
    match std::env::var_os(MATERIALS_ENV) {
        Some(path) => MaterialDatabase::load(Path::new(&path)).with_context(|| format!("loading {MATERIALS_ENV}")),
        None => Ok(MaterialDatabase::default()),
    }
}

fn resolve_material(args: &CliArgs) -> Result<MaterialParams> {
    let overrides = [
        args.n,
        args.t_melt,
        args.t_wall,
        args.gamma_opt,
        args.mu_opt,
        args.kappa,
    ];
    let mut mat = match &args.material {
        Some(name) => load_database()?.get(name)?.clone(),
        None => {
            if overrides.iter().any(Option::is_none) {
                bail!(
                    "no material given: pass --material NAME or all of --n, --t-melt, --t-wall, --gamma-opt, --mu-opt, --kappa"
                );
            }
            MaterialParams {
                name: "custom".into(),
                case_study: None,
                n: 0.0,
                t_melt: 0.0,
                t_wall: 0.0,
                gamma_opt: 0.0,
                mu_opt: 0.0,
                kappa: 0.0,
            }
        }
    };
    let fields = [
        &mut mat.n,
        &mut mat.t_melt,
        &mut mat.t_wall,
        &mut mat.gamma_opt,
        &mut mat.mu_opt,
        &mut mat.kappa,
    ];
    for (field, value) in fields.into_iter().zip(overrides) {
        if let Some(v) = value {
            *field = v;
        }
    }
    mat.validate()?;
    Ok(mat)
}

fn build_config(args: &CliArgs) -> Result<PlanConfig> {
    let d = Vector::new(args.direction[0], args.direction[1], args.direction[2]);
    if !d.iter().all(|c| c.is_finite()) || d.norm() == 0.0 {
        bail!(
            "invalid demolding direction {:?}: must be three finite numbers, not all zero",
            args.direction
        );
    }
    if !args.thickness.is_finite() || args.thickness <= 0.0 {
        bail!(
            "invalid thickness {}: H must be a positive number of millimetres",
            args.thickness
        );
    }
    if args.parting_line.is_some() && !args.aesthetic {
        bail!("--parting-line requires --aesthetic");
    }
    let parting_line = match &args.parting_line {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read parting-line file '{}'", path.display()))?;
            Some(parse_polyline(&text).with_context(|| format!("in '{}'", path.display()))?)
        }
        None => None,
    };
    let config = PlanConfig {
        demold_dir: Direction::new_normalize(d),
        grid_spacing: args.spacing,
        ring_samples: args.ring_samples,
        thickness: args.thickness,
        aesthetic: args.aesthetic,
        depth_check: if args.strict_paper {
            DepthCheck::Off
        } else {
            DepthCheck::Thickness
        },
        rect_aspect: args.rect_aspect,
        parting_line,
        parallelism: Parallelism::from_threads(args.threads),
    };
    config.validate()?;
    Ok(config)
}

fn report_path(args: &CliArgs) -> PathBuf {
    args.report
        .clone()
        .unwrap_or_else(|| args.input.with_extension("gate.json"))
}

fn run(args: &CliArgs) -> Result<ExitCode> {
    let config = build_config(args)?;
    let material = resolve_material(args)?;
    let bytes =
        std::fs::read(&args.input).with_context(|| format!("cannot read input file '{}'", args.input.display()))?;

    let start = Instant::now();
    let mesh = parse_stl(&bytes).with_context(|| format!("invalid STL '{}'", args.input.display()))?;
    let outcome = PlanOutcome::from_result(plan_gate(&mesh, &material, &config))?;
    let mut meta = ReportMetadata::new(args.input.display().to_string(), &bytes, &mesh, &material, &config);
    meta.duration_s = start.elapsed().as_secs_f64();

    let out = report_path(args);
    std::fs::write(&out, render_report(&outcome, &meta))
        .with_context(|| format!("cannot write report '{}'", out.display()))?;
    println!("{}", out.display());

    match &outcome {
        PlanOutcome::Planned(plan) => {
            if let Some(ply) = &args.ply {
                let data = export_marked_geometry(&mesh, &outcome)?;
                std::fs::write(ply, data).with_context(|| format!("cannot write PLY '{}'", ply.display()))?;
            }
            let g = plan.gate_point;
            eprintln!(
                "gate at ({:.4}, {:.4}, {:.4}) mm, R_gate {:.4} mm",
                g.x, g.y, g.z, plan.sizing.r_gate
            );
            Ok(ExitCode::SUCCESS)
        }
        PlanOutcome::Infeasible { total_nodes, .. } => {
            eprintln!("no valid gate location: all {total_nodes} nodes rejected; see the report histogram");
            if args.ply.is_some() {
                eprintln!("PLY export skipped: plan is infeasible");
            }
            Ok(ExitCode::from(2))
        }
    }
}

fn main() -> ExitCode {
    let args = match CliArgs::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
