//! Convergence study on the shrinking concentric-circles problem.
//!
//! A refinement ladder couples the curve resolution, the bulk mesh, and the
//! time step so that one level index controls the whole discretization. Each
//! level runs the full simulation against the exact annulus solution and
//! reports the worst-case curve and bulk errors over all steps.

use crate::bulk::MeshParams;
use crate::curve::ShapeSpec;
use crate::error::{Error, Result};
use crate::reference::{bulk_error_at, curve_error_at, AnnulusExact};
use crate::stepper::{
    run_simulation, Integration, Scheme, SchemeConfig, SimulationSink, StepRecord,
};

/// Highest supported ladder level.
pub const MAX_LEVEL: u32 = 4;

/// Discretization parameters of one refinement level: the bulk grids double
/// and quadruple, the step size quarters, the curve doubles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LadderLevel {
    pub level: u32,
    pub n_fine: u32,
    pub n_coarse: u32,
    pub k: usize,
}

impl LadderLevel {
    pub fn new(level: u32) -> Result<LadderLevel> {
        if level > MAX_LEVEL {
            return Err(Error::Config(format!(
                "ladder level {level} exceeds maximum {MAX_LEVEL}"
            )));
        }
        Ok(LadderLevel {
            level,
            n_fine: 1 << (7 + level),
            n_coarse: 4u32.pow(level),
            k: 1 << (8 + level),
        })
    }

    pub fn dt(&self) -> f64 {
        4f64.powi(3 - self.level as i32) * 1e-3
    }

    pub fn mesh_params(&self, half_width: f64) -> MeshParams {
        MeshParams {
            half_width,
            n_fine: self.n_fine,
            n_coarse: self.n_coarse,
        }
    }
}

/// The annulus test problem: two concentric circles shrinking toward
/// extinction of the inner one, solved on a square box.
#[derive(Clone, Copy, Debug)]
pub struct AnnulusProblem {
    pub r1_0: f64,
    pub r2_0: f64,
    pub half_width: f64,
    pub t_end: f64,
}

impl Default for AnnulusProblem {
    fn default() -> Self {
        AnnulusProblem {
            r1_0: 2.5,
            r2_0: 3.0,
            half_width: 4.0,
            t_end: 0.5,
        }
    }
}

/// One row of the convergence table.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub level: u32,
    /// Fine bulk mesh size 2H / N_f.
    pub h_fine: f64,
    /// Max element diameter of the final curve.
    pub h_curve_final: f64,
    /// max_m ‖U^m − I u(·, t_m)‖_∞ over the bulk mesh nodes.
    pub err_bulk: f64,
    /// max_m max_k dist(q^m_k, exact interface at t_m).
    pub err_curve: f64,
    /// Bulk unknowns of the final step's mesh.
    pub k_omega_final: usize,
    /// Curve vertex count.
    pub k: usize,
    /// Signed relative volume loss at the final time.
    pub volume_loss_final: f64,
    pub wall_secs: f64,
}

/// Accumulates the over-all-steps error maxima during a run.
struct ErrorAccumulator<'a> {
    exact: &'a AnnulusExact,
    err_curve: f64,
    err_bulk: f64,
    k_omega_last: usize,
}

impl SimulationSink for ErrorAccumulator<'_> {
    fn on_step(&mut self, rec: &StepRecord) -> Result<()> {
        let (r1, r2) = self.exact.radii_at(rec.diagnostics.t)?;
        self.err_curve = self.err_curve.max(curve_error_at(rec.new_curve, r1, r2));
        self.err_bulk = self
            .err_bulk
            .max(bulk_error_at(rec.mesh, &rec.result.u, self.exact, r1, r2));
        self.k_omega_last = rec.mesh.vertex_count();
        Ok(())
    }
}

/// Runs the annulus problem once and measures it against the exact solution.
pub fn run_annulus(
    problem: &AnnulusProblem,
    k: usize,
    mesh: MeshParams,
    scheme: Scheme,
    integration: Integration,
    dt: f64,
) -> Result<ConvergenceRow> {
    let exact = AnnulusExact::planar(problem.r1_0, problem.r2_0)?;
    let curve = ShapeSpec::ConcentricPair {
        r_inner: problem.r1_0,
        r_outer: problem.r2_0,
        k,
    }
    .build(problem.half_width)?;
    let config = SchemeConfig::new(scheme, integration, dt, problem.t_end, mesh);
    let mut acc = ErrorAccumulator {
        exact: &exact,
        err_curve: 0.0,
        err_bulk: 0.0,
        k_omega_last: 0,
    };
    let summary = run_simulation(&curve, &config, &mut acc)?;
    let last = summary
        .steps
        .last()
        .ok_or_else(|| Error::Config("run produced no steps".into()))?;
    Ok(ConvergenceRow {
        level: 0,
        h_fine: config.mesh.h_fine(),
        h_curve_final: summary.final_curve.max_element_length(),
        err_bulk: acc.err_bulk,
        err_curve: acc.err_curve,
        k_omega_final: acc.k_omega_last,
        k,
        volume_loss_final: last.v_rel,
        wall_secs: summary.wall_secs,
    })
}

/// Runs one ladder level of the standard study.
pub fn run_annulus_level(
    level: u32,
    scheme: Scheme,
    integration: Integration,
) -> Result<ConvergenceRow> {
    let problem = AnnulusProblem::default();
    let ladder = LadderLevel::new(level)?;
    let mut row = run_annulus(
        &problem,
        ladder.k,
        ladder.mesh_params(problem.half_width),
        scheme,
        integration,
        ladder.dt(),
    )?;
    row.level = level;
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_scaling_rules() {
        let expected = [
            (0u32, 128u32, 1u32, 64e-3, 256usize),
            (1, 256, 4, 16e-3, 512),
            (2, 512, 16, 4e-3, 1024),
            (3, 1024, 64, 1e-3, 2048),
            (4, 2048, 256, 0.25e-3, 4096),
        ];
        for (level, n_fine, n_coarse, dt, k) in expected {
            let l = LadderLevel::new(level).unwrap();
            assert_eq!(l.n_fine, n_fine);
            assert_eq!(l.n_coarse, n_coarse);
            assert_eq!(l.k, k);
            assert!((l.dt() - dt).abs() < 1e-18);
            let params = l.mesh_params(4.0);
            assert!(params.validate().is_ok());
            assert_eq!(params.h_fine(), 8.0 / n_fine as f64);
        }
        assert!(LadderLevel::new(5).is_err());
    }

    #[test]
    fn short_conserving_run_fills_row() {
        let problem = AnnulusProblem {
            t_end: 0.02,
            ..AnnulusProblem::default()
        };
        let mesh = MeshParams {
            half_width: 4.0,
            n_fine: 64,
            n_coarse: 8,
        };
        let row = run_annulus(
            &problem,
            64,
            mesh,
            Scheme::SpFixedPoint,
            Integration::Lumped,
            4e-3,
        )
        .unwrap();
        assert_eq!(row.k, 64);
        assert_eq!(row.h_fine, 0.125);
        assert!(row.k_omega_final > 65 * 65 / 16, "suspiciously coarse mesh");
        assert!(row.err_curve > 0.0 && row.err_curve < 5e-2, "{}", row.err_curve);
        assert!(row.err_bulk > 0.0 && row.err_bulk < 0.5, "{}", row.err_bulk);
        assert!(row.volume_loss_final.abs() < 1e-9, "{}", row.volume_loss_final);
        assert!(row.h_curve_final > 0.0);
        assert!(row.wall_secs > 0.0);
    }

    #[test]
    fn short_linear_run_drifts_more_than_conserving() {
        let problem = AnnulusProblem {
            t_end: 0.02,
            ..AnnulusProblem::default()
        };
        let mesh = MeshParams {
            half_width: 4.0,
            n_fine: 64,
            n_coarse: 8,
        };
        let linear = run_annulus(
            &problem,
            64,
            mesh,
            Scheme::BgnLinear,
            Integration::Lumped,
            4e-3,
        )
        .unwrap();
        assert!(
            linear.volume_loss_final.abs() > 1e-6,
            "linear drift {}",
            linear.volume_loss_final
        );
    }
}
