//! Batch driver for the interface-flow solver: runs single experiments from
//! TOML specs, runs the annulus convergence ladder, and queries the exact
//! concentric-circles reference solution.

mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::ExperimentSpec;
use mstrack::convergence::{run_annulus_level, ConvergenceRow, MAX_LEVEL};
use mstrack::reference::AnnulusExact;
use mstrack::stepper::{run_simulation, Integration, Scheme};
use output::SnapshotSink;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mstrack",
    version,
    about = "Batch driver for the volume-conserving interface-flow solver"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a TOML spec and write its outputs.
    Simulate {
        /// Path of the TOML experiment spec.
        spec: PathBuf,
    },
    /// Run levels of the annulus convergence ladder and tabulate errors.
    Converge {
        /// Path of the TOML experiment spec (supplies name, output dir, and
        /// default levels via its [converge] section).
        spec: PathBuf,
        /// Ladder levels to run, overriding the spec (e.g. --levels 0,1,2).
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<u32>>,
        /// Time discretization.
        #[arg(long, value_enum, default_value = "sp-fixed-point")]
        scheme: SchemeArg,
        /// Bulk-surface integration of the coupling terms.
        #[arg(long, value_enum, default_value = "true")]
        integration: IntegrationArg,
    },
    /// Print the exact concentric-circles solution at a time.
    Exact {
        /// Evaluation time.
        #[arg(long)]
        t: f64,
        /// Initial inner radius.
        #[arg(long)]
        r1: f64,
        /// Initial outer radius.
        #[arg(long)]
        r2: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    #[value(name = "bgn-linear")]
    BgnLinear,
    #[value(name = "sp-fixed-point")]
    SpFixedPoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegrationArg {
    #[value(name = "lumped")]
    Lumped,
    #[value(name = "true")]
    True,
}

impl From<SchemeArg> for Scheme {
    fn from(arg: SchemeArg) -> Scheme {
        match arg {
            SchemeArg::BgnLinear => Scheme::BgnLinear,
            SchemeArg::SpFixedPoint => Scheme::SpFixedPoint,
        }
    }
}

impl From<IntegrationArg> for Integration {
    fn from(arg: IntegrationArg) -> Integration {
        match arg {
            IntegrationArg::Lumped => Integration::Lumped,
            IntegrationArg::True => Integration::TrueIntegration,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    apply_thread_cap()?;
    match cli.cmd {
        Cmd::Simulate { spec } => cmd_simulate(&spec),
        Cmd::Converge {
            spec,
            levels,
            scheme,
            integration,
        } => cmd_converge(&spec, levels, scheme.into(), integration.into()),
        Cmd::Exact { t, r1, r2 } => cmd_exact(t, r1, r2),
    }
}

/// Applies the MSTRACK_THREADS cap. The solver backend in this build is
/// sequential (which keeps outputs bit-reproducible), so the effective
/// parallelism is 1; larger requested caps are honored as caps and noted.
fn apply_thread_cap() -> Result<()> {
    let requested = match std::env::var("MSTRACK_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .with_context(|| format!("MSTRACK_THREADS must be a positive integer, got {s:?}"))?,
        Err(_) => 1,
    };
    let effective = mstrack::linsolve::configure_parallelism(requested);
    if requested > effective {
        eprintln!(
            "note: sequential solver build; MSTRACK_THREADS={requested} runs on {effective} thread"
        );
    }
    Ok(())
}

fn cmd_simulate(spec_path: &std::path::Path) -> Result<()> {
    let spec = ExperimentSpec::load(spec_path)?;
    let curve = spec.build_shape()?;
    let scheme = spec.build_scheme()?;
    let times = spec.snapshot_times(scheme.t_end);
    let mut sink = SnapshotSink::new(&curve, &times, scheme.dt);
    let summary = run_simulation(&curve, &scheme, &mut sink)
        .with_context(|| format!("experiment {:?} failed", spec.name))?;

    // Render every artifact in memory, then flush; a failed run writes nothing.
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    let mut csv = Vec::new();
    mstrack::io::write_diagnostics_csv(&mut csv, &summary.steps)?;
    files.push((PathBuf::from("diagnostics.csv"), csv));
    for (t, curve) in &sink.snapshots {
        let mut body = Vec::new();
        mstrack::io::write_polylines(&mut body, curve)?;
        files.push((
            PathBuf::from(format!("snapshot_t{}.txt", output::time_tag(*t))),
            body,
        ));
    }
    files.push((
        PathBuf::from("curves.svg"),
        output::curves_svg(&sink.snapshots).into_bytes(),
    ));
    files.push((
        PathBuf::from("energy.svg"),
        output::energy_chart(&summary.steps, scheme.anisotropy.is_some()).into_bytes(),
    ));
    files.push((
        PathBuf::from("volume.svg"),
        output::volume_chart(&summary.steps).into_bytes(),
    ));
    output::flush(&spec.output.dir, &files)?;

    let last = summary.steps.last().context("run produced no steps")?;
    println!("experiment: {}", spec.name);
    println!("steps: {}", summary.steps.len());
    println!("final time: {:e}", last.t);
    println!("final energy: {:e}", last.energy);
    println!("final relative volume error: {:e}", last.v_rel);
    let max_drift = summary
        .steps
        .iter()
        .map(|s| s.v_rel.abs())
        .fold(0.0, f64::max);
    println!("max relative volume error: {max_drift:e}");
    let max_iters = summary.steps.iter().map(|s| s.fp_iters).max().unwrap_or(0);
    println!("max fixed-point iterations: {max_iters}");
    println!("wall seconds: {:e}", summary.wall_secs);
    if !summary.self_intersection_steps.is_empty() {
        eprintln!(
            "warning: interface self-intersects at steps {:?}",
            summary.self_intersection_steps
        );
    }
    println!("outputs in {}", spec.output.dir.display());
    Ok(())
}

fn cmd_converge(
    spec_path: &std::path::Path,
    levels_flag: Option<Vec<u32>>,
    scheme: Scheme,
    integration: Integration,
) -> Result<()> {
    let spec = ExperimentSpec::load(spec_path)?;
    let levels = match levels_flag {
        Some(levels) => levels,
        None => spec
            .converge
            .as_ref()
            .context("spec has no [converge] section and no --levels given")?
            .levels
            .clone(),
    };
    for &level in &levels {
        if level > MAX_LEVEL {
            anyhow::bail!("ladder level {level} exceeds maximum {MAX_LEVEL}");
        }
    }
    std::fs::create_dir_all(&spec.output.dir).with_context(|| {
        format!("cannot create output directory {}", spec.output.dir.display())
    })?;

    println!("experiment: {}", spec.name);
    println!("h_f,h_gamma_M,err_u,err_gamma,K_Omega_M,K,v_delta_M,wall_secs");
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut failures: Vec<(u32, String)> = Vec::new();
    for &level in &levels {
        if level >= 3 {
            eprintln!("note: level {level} is long-running (CI covers levels 0-1)");
        }
        match run_annulus_level(level, scheme, integration) {
            Ok(row) => {
                println!(
                    "{:e},{:e},{:e},{:e},{},{},{:e},{:e}",
                    row.h_fine,
                    row.h_curve_final,
                    row.err_bulk,
                    row.err_curve,
                    row.k_omega_final,
                    row.k,
                    row.volume_loss_final.abs(),
                    row.wall_secs
                );
                rows.push(row);
                // Rewrite the table atomically after every completed level.
                let mut csv = Vec::new();
                mstrack::io::write_convergence_csv(&mut csv, &rows)?;
                output::write_atomic(&spec.output.dir.join("convergence.csv"), &csv)?;
            }
            Err(err) => {
                eprintln!("level {level} failed: {err}");
                failures.push((level, err.to_string()));
            }
        }
    }
    if !failures.is_empty() {
        anyhow::bail!(
            "{} of {} levels failed: {:?}",
            failures.len(),
            levels.len(),
            failures.iter().map(|(l, _)| *l).collect::<Vec<_>>()
        );
    }
    println!(
        "table in {}",
        spec.output.dir.join("convergence.csv").display()
    );
    Ok(())
}

fn cmd_exact(t: f64, r1: f64, r2: f64) -> Result<()> {
    let exact = AnnulusExact::planar(r1, r2)?;
    let t0 = exact.extinction_time();
    let (r1_t, r2_t) = if t == 0.0 {
        (r1, r2)
    } else {
        exact.radii_at(t)?
    };
    println!("r1({t:e}) = {r1_t:e}");
    println!("r2({t:e}) = {r2_t:e}");
    let width = 1e-9 * t0.max(1.0);
    println!("extinction time in [{:e}, {:e}]", t0 - width, t0 + width);
    Ok(())
}
