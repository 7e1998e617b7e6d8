//! Plain-text outputs: polyline curve snapshots, per-step diagnostics CSV,
//! and the convergence table CSV. All floats use scientific notation that
//! parses back to the identical value.

use crate::convergence::ConvergenceRow;
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geom::{vec2, Vec2};
use crate::stepper::StepDiagnostics;
use std::io::{BufRead, Write};

/// Writes one block per curve component: a header line with the component
/// index, vertex count and kind, then one `x y` line per vertex in stored
/// (normalized-winding) order.
pub fn write_polylines(w: &mut dyn Write, curve: &Curve) -> Result<()> {
    for (c, lp) in curve.loops().iter().enumerate() {
        let kind = if lp.hole { "hole" } else { "outer" };
        writeln!(w, "# component {c}, {} vertices, {kind}", lp.count)?;
        for i in lp.first..lp.first + lp.count {
            let p = curve.vertex(i);
            writeln!(w, "{:e} {:e}", p.x, p.y)?;
        }
    }
    Ok(())
}

/// Reads a curve written by `write_polylines`.
pub fn read_polylines(r: &mut dyn BufRead) -> Result<Curve> {
    let mut loops: Vec<(Vec<Vec2>, bool)> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| {
            Error::Config(format!("snapshot line {}: {what}: {line}", lineno + 1))
        };
        if let Some(rest) = line.strip_prefix('#') {
            let hole = match rest.rsplit(',').next().map(str::trim) {
                Some("hole") => true,
                Some("outer") => false,
                _ => return Err(bad("header must end in `outer` or `hole`")),
            };
            loops.push((Vec::new(), hole));
        } else {
            let mut nums = line.split_whitespace().map(str::parse::<f64>);
            let (x, y) = match (nums.next(), nums.next(), nums.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => (x, y),
                _ => return Err(bad("expected two floats")),
            };
            loops
                .last_mut()
                .ok_or_else(|| bad("vertex before any component header"))?
                .0
                .push(vec2(x, y));
        }
    }
    Curve::from_loops(loops)
}

/// Writes the per-step diagnostics table.
pub fn write_diagnostics_csv(w: &mut dyn Write, steps: &[StepDiagnostics]) -> Result<()> {
    writeln!(
        w,
        "m,t,energy,energy_aniso,volume,v_rel,dirichlet_energy,stability_residual,fp_iters,equi_ratio"
    )?;
    for d in steps {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e}",
            d.step,
            d.t,
            d.energy,
            d.energy_aniso,
            d.volume,
            d.v_rel,
            d.dirichlet_energy,
            d.stability_residual,
            d.fp_iters,
            d.equi_ratio
        )?;
    }
    Ok(())
}

/// Writes the convergence table: the seven study columns plus wall time.
pub fn write_convergence_csv(w: &mut dyn Write, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "h_f,h_gamma_M,err_u,err_gamma,K_Omega_M,K,v_delta_M,wall_secs")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{},{},{:e},{:e}",
            r.h_fine,
            r.h_curve_final,
            r.err_bulk,
            r.err_curve,
            r.k_omega_final,
            r.k,
            r.volume_loss_final.abs(),
            r.wall_secs
        )?;
    }
    Ok(())
}
