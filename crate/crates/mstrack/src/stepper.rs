//! Time stepping for the coupled bulk–surface flow.
//!
//! Each step solves one block linear system in the bulk potential U, the
//! curve curvature κ, and the vertex displacement δ = X − q^m. The linear
//! scheme solves it once with the old vertex normals; the volume-conserving
//! scheme repeats the solve with normals averaged between the old curve and
//! the latest iterate until the positions settle, which makes the enclosed
//! volume exactly conserved up to the iteration tolerance. Anisotropic
//! energies replace the surface stiffness block by the weighted form.

use crate::anisotropy::{anisotropic_form, AnisotropyDef, SurfaceForm};
use crate::bulk::{BulkMesh, MeshParams};
use crate::coupling::{assemble_coupling, CouplingMatrices, CouplingVariant};
use crate::curve::{Curve, CurvePair};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::linsolve::{BlockSolver, SparseMat};

/// Which time discretization advances the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// One linear solve per step with the old normals; small volume drift.
    BgnLinear,
    /// Lagged fixed point on the averaged normals; volume-exact.
    SpFixedPoint,
}

/// How bulk–surface pairings are integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integration {
    Lumped,
    TrueIntegration,
}

impl Integration {
    fn variant(self) -> CouplingVariant {
        match self {
            Integration::Lumped => CouplingVariant::Lumped,
            Integration::TrueIntegration => CouplingVariant::TrueIntegration,
        }
    }
}

/// Full step/run configuration.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub integration: Integration,
    pub anisotropy: Option<AnisotropyDef>,
    pub dt: f64,
    pub t_end: f64,
    /// Fixed-point stopping tolerance on ‖X^{i+1} − X^i‖_∞.
    pub tol: f64,
    pub max_fixed_point_iters: usize,
    pub mesh: MeshParams,
}

impl SchemeConfig {
    /// Baseline configuration; callers override fields as needed.
    pub fn new(scheme: Scheme, integration: Integration, dt: f64, t_end: f64, mesh: MeshParams) -> SchemeConfig {
        SchemeConfig {
            scheme,
            integration,
            anisotropy: None,
            dt,
            t_end,
            tol: 1e-10,
            max_fixed_point_iters: 100,
            mesh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol = {} must be positive", self.tol)));
        }
        if self.t_end < self.dt {
            return Err(Error::Config(format!(
                "t_end = {} shorter than one step {}",
                self.t_end, self.dt
            )));
        }
        if self.max_fixed_point_iters == 0 {
            return Err(Error::Config("max_fixed_point_iters must be >= 1".into()));
        }
        self.mesh.validate()
    }

    fn density(&self) -> AnisotropyDef {
        self.anisotropy.clone().unwrap_or_else(AnisotropyDef::isotropic)
    }
}

/// Outcome of one time step.
pub struct StepResult {
    /// Bulk potential U^{m+1} on the mesh nodes.
    pub u: Vec<f64>,
    /// Curvature unknown κ^{m+1} on the curve vertices.
    pub kappa: Vec<f64>,
    /// New vertex positions X^{m+1}.
    pub positions: Vec<Vec2>,
    /// Fixed-point iterations used (1 for the linear scheme).
    pub iterations: usize,
    /// U' A U, the discrete Dirichlet energy of the new potential.
    pub dirichlet_energy: f64,
    /// Σ_k m_k ω_k · δ_k at the last solve; the volume constraint the
    /// system enforces, reported as an audit value.
    pub volume_constraint_residual: f64,
}

/// Per-step diagnostics row.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    /// Step index m (the step maps t_m to t_{m+1}).
    pub step: usize,
    /// Time t_{m+1} after the step.
    pub t: f64,
    /// Length |Γ^{m+1}|.
    pub energy: f64,
    /// Anisotropic energy |Γ^{m+1}|_γ (equals length when isotropic).
    pub energy_aniso: f64,
    /// Enclosed volume of the new curve.
    pub volume: f64,
    /// Relative volume loss (vol_0 − vol_{m+1}) / vol_0.
    pub v_rel: f64,
    /// ‖∇U^{m+1}‖² via the stiffness quadratic form.
    pub dirichlet_energy: f64,
    /// E(Γ^{m+1}) + Δt_m ‖∇U^{m+1}‖² − E(Γ^m) with E the governing energy;
    /// nonpositive for a stable step.
    pub stability_residual: f64,
    pub fp_iters: usize,
    /// max |σ_j| / min |σ_j| of the new curve.
    pub equi_ratio: f64,
}

/// Receives each completed step of a simulation run.
pub trait SimulationSink {
    fn on_step(&mut self, record: &StepRecord) -> Result<()>;
}

/// No-op sink.
impl SimulationSink for () {
    fn on_step(&mut self, _record: &StepRecord) -> Result<()> {
        Ok(())
    }
}

/// Borrowed view of one completed step.
pub struct StepRecord<'a> {
    pub old_curve: &'a Curve,
    pub new_curve: &'a Curve,
    pub mesh: &'a BulkMesh,
    pub result: &'a StepResult,
    pub diagnostics: &'a StepDiagnostics,
}

/// Whole-run result.
pub struct SimulationSummary {
    pub final_curve: Curve,
    pub steps: Vec<StepDiagnostics>,
    /// Step indices after which the curve was no longer simple.
    pub self_intersection_steps: Vec<usize>,
    pub wall_secs: f64,
}

/// Matrices that stay fixed over the fixed-point iterations of one step.
struct StepOperators<'a> {
    curve: &'a Curve,
    mesh: &'a BulkMesh,
    coupling: CouplingMatrices,
    bulk_stiffness: SparseMat,
    density: AnisotropyDef,
    /// Assembled surface form when it does not depend on the iterate
    /// (exponent r = 1, including the isotropic case).
    fixed_form: Option<SurfaceForm>,
    /// Pattern-reusing factorization; the block pattern is identical for
    /// every iterate of a step, only values change.
    solver: Option<BlockSolver>,
}

impl<'a> StepOperators<'a> {
    fn assemble(curve: &'a Curve, mesh: &'a BulkMesh, config: &SchemeConfig) -> Result<Self> {
        let coupling = assemble_coupling(curve, mesh, config.integration.variant())?;
        let bulk_stiffness = mesh.stiffness_matrix();
        let density = config.density();
        let fixed_form = if density.exponent() == 1.0 {
            Some(anisotropic_form(&density, curve, None)?)
        } else {
            None
        };
        Ok(StepOperators {
            curve,
            mesh,
            coupling,
            bulk_stiffness,
            density,
            fixed_form,
            solver: None,
        })
    }

    /// Solves the block system for the given vertex weights ω and (when the
    /// form depends on the iterate) element normals of the current iterate.
    fn solve(
        &mut self,
        omega: &[Vec2],
        iterate_normals: Option<&[Vec2]>,
        dt: f64,
    ) -> Result<StepResult> {
        let k_omega = self.mesh.vertex_count();
        let k = self.curve.vertex_count();
        let (off_kappa, off_dx, off_dy) = (k_omega, k_omega + k, k_omega + 2 * k);
        let n_total = k_omega + 3 * k;
        let masses = &self.coupling.masses;

        let form_store;
        let form = match &self.fixed_form {
            Some(f) => f,
            None => {
                form_store = anisotropic_form(&self.density, self.curve, iterate_normals)?;
                &form_store
            }
        };

        let mut trips: Vec<(usize, usize, f64)> = Vec::with_capacity(
            self.bulk_stiffness.nnz() + 5 * self.coupling.n.nnz() + 16 * k,
        );
        // Bulk rows: A U − (1/Δt) N (ω·δ) = 0.
        trips.extend(self.bulk_stiffness.entries());
        let inv_dt = 1.0 / dt;
        for (a, kv, v) in self.coupling.n.entries() {
            trips.push((a, off_dx + kv, -inv_dt * v * omega[kv].x));
            trips.push((a, off_dy + kv, -inv_dt * v * omega[kv].y));
        }
        // Trace rows: Nᵀ U − M_Γ κ = 0.
        for (a, kv, v) in self.coupling.n.entries() {
            trips.push((off_kappa + kv, a, v));
        }
        for kv in 0..k {
            trips.push((off_kappa + kv, off_kappa + kv, -masses[kv]));
        }
        // Curvature rows: m_k ω_k κ_k + (form applied to δ) = −(form · q^m).
        for kv in 0..k {
            trips.push((off_dx + kv, off_kappa + kv, masses[kv] * omega[kv].x));
            trips.push((off_dy + kv, off_kappa + kv, masses[kv] * omega[kv].y));
        }
        for (r, c, v) in form.triplets_stacked() {
            trips.push((off_dx + r, off_dx + c, v));
        }

        let positions = self.curve.positions();
        let f_q = form.apply(positions);
        let mut rhs = vec![0.0; n_total];
        for kv in 0..k {
            rhs[off_dx + kv] = -f_q[kv].x;
            rhs[off_dy + kv] = -f_q[kv].y;
        }

        let sol = match &mut self.solver {
            Some(s) => s.refactor_solve(&trips, &rhs)?,
            None => {
                let mut s = BlockSolver::new(n_total, &trips)?;
                let sol = s.refactor_solve(&trips, &rhs)?;
                self.solver = Some(s);
                sol
            }
        };
        let u = sol[..k_omega].to_vec();
        let kappa = sol[off_kappa..off_dx].to_vec();
        let mut new_positions = Vec::with_capacity(k);
        let mut constraint = 0.0;
        for kv in 0..k {
            let delta = Vec2 {
                x: sol[off_dx + kv],
                y: sol[off_dy + kv],
            };
            constraint += masses[kv] * omega[kv].dot(delta);
            new_positions.push(positions[kv] + delta);
        }
        let dirichlet = self.bulk_stiffness.quadratic_form(&u, &u);
        Ok(StepResult {
            u,
            kappa,
            positions: new_positions,
            iterations: 1,
            dirichlet_energy: dirichlet,
            volume_constraint_residual: constraint,
        })
    }
}

/// One linear step with the old vertex normals.
pub fn linear_step(
    curve: &Curve,
    mesh: &BulkMesh,
    config: &SchemeConfig,
    dt: f64,
) -> Result<StepResult> {
    let mut ops = StepOperators::assemble(curve, mesh, config)?;
    let omega = curve.vertex_normals();
    let iterate_normals = curve.element_normals();
    ops.solve(&omega, Some(&iterate_normals), dt)
}

/// One volume-conserving step: lagged iteration on the averaged normals,
/// stopped when successive position iterates agree within `config.tol`.
pub fn fixed_point_step(
    curve: &Curve,
    mesh: &BulkMesh,
    config: &SchemeConfig,
    dt: f64,
) -> Result<StepResult> {
    let mut ops = StepOperators::assemble(curve, mesh, config)?;
    let mut prev = curve.positions().to_vec();
    let mut iterate = curve.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=config.max_fixed_point_iters {
        let pair = CurvePair {
            old: curve,
            new: &iterate,
        };
        let omega = pair.averaged_vertex_normals();
        let iterate_normals = iterate.element_normals();
        let mut result = ops.solve(&omega, Some(&iterate_normals), dt)?;
        residual = result
            .positions
            .iter()
            .zip(&prev)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max);
        prev.clone_from(&result.positions);
        iterate = curve.with_positions(result.positions.clone())?;
        if residual <= config.tol {
            result.iterations = it;
            return Ok(result);
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_fixed_point_iters,
        residual,
    })
}

/// Runs the time loop: rebuild the mesh around Γ^m, step, hand the result to
/// the sink, repeat until t = T (final step clipped, zero-length skipped).
pub fn run_simulation(
    initial: &Curve,
    config: &SchemeConfig,
    sink: &mut dyn SimulationSink,
) -> Result<SimulationSummary> {
    config.validate()?;
    let started = std::time::Instant::now();
    let density = config.density();
    let vol0 = initial.enclosed_volume();
    if vol0 <= 0.0 {
        return Err(Error::Geometry(format!(
            "initial curve encloses volume {vol0}"
        )));
    }
    let mut curve = initial.clone();
    let mut energy_old = match config.anisotropy {
        Some(_) => density.energy(&curve)?,
        None => curve.length(),
    };
    let mut steps = Vec::new();
    let mut self_intersections = Vec::new();
    let mut m = 0usize;
    loop {
        let t_m = m as f64 * config.dt;
        let remaining = config.t_end - t_m;
        if remaining <= config.dt * 1e-9 {
            break;
        }
        let clipped = remaining <= config.dt * (1.0 + 1e-9);
        let dt_m = if clipped { remaining } else { config.dt };
        let t_next = if clipped {
            config.t_end
        } else {
            (m + 1) as f64 * config.dt
        };

        let mesh = BulkMesh::build_adaptive(&curve, &config.mesh)?;
        let result = match config.scheme {
            Scheme::BgnLinear => linear_step(&curve, &mesh, config, dt_m)?,
            Scheme::SpFixedPoint => fixed_point_step(&curve, &mesh, config, dt_m)?,
        };
        let new_curve = curve.with_positions(result.positions.clone())?;
        if !new_curve.is_simple() {
            self_intersections.push(m);
        }
        let energy_new = match config.anisotropy {
            Some(_) => density.energy(&new_curve)?,
            None => new_curve.length(),
        };
        let volume = new_curve.enclosed_volume();
        let diagnostics = StepDiagnostics {
            step: m,
            t: t_next,
            energy: new_curve.length(),
            energy_aniso: density.energy(&new_curve)?,
            volume,
            v_rel: (vol0 - volume) / vol0,
            dirichlet_energy: result.dirichlet_energy,
            stability_residual: energy_new + dt_m * result.dirichlet_energy - energy_old,
            fp_iters: result.iterations,
            equi_ratio: new_curve.equidistribution_ratio(),
        };
        sink.on_step(&StepRecord {
            old_curve: &curve,
            new_curve: &new_curve,
            mesh: &mesh,
            result: &result,
            diagnostics: &diagnostics,
        })?;
        steps.push(diagnostics);
        energy_old = energy_new;
        curve = new_curve;
        m += 1;
    }
    Ok(SimulationSummary {
        final_curve: curve,
        steps,
        self_intersection_steps: self_intersections,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ShapeSpec;

    fn mesh_params(n_fine: u32, n_coarse: u32) -> MeshParams {
        MeshParams {
            half_width: 4.0,
            n_fine,
            n_coarse,
        }
    }

    fn annulus_config(scheme: Scheme, integration: Integration) -> SchemeConfig {
        SchemeConfig::new(scheme, integration, 8e-3, 0.5, mesh_params(128, 16))
    }

    #[test]
    fn config_validation() {
        let mut c = annulus_config(Scheme::BgnLinear, Integration::Lumped);
        assert!(c.validate().is_ok());
        c.dt = 0.0;
        assert!(c.validate().is_err());
        c.dt = 1.0;
        assert!(c.validate().is_err(), "t_end < dt must be rejected");
    }

    #[test]
    fn curvature_unknown_matches_polygon_curvature() {
        // A barely-moving circle: the returned κ is the discrete curvature
        // of a regular K-gon, within 2 (π/K)² of −1/r relatively.
        let (r, k) = (2.0, 64usize);
        let curve = ShapeSpec::Circle { radius: r, k }.build(4.0).unwrap();
        let mut config = annulus_config(Scheme::BgnLinear, Integration::Lumped);
        config.dt = 1e-5;
        let mesh = BulkMesh::build_adaptive(&curve, &config.mesh).unwrap();
        let result = linear_step(&curve, &mesh, &config, config.dt).unwrap();
        let bound = 2.0 * (std::f64::consts::PI / k as f64).powi(2);
        for (kv, kap) in result.kappa.iter().enumerate() {
            let rel = (kap * r + 1.0).abs();
            assert!(
                rel < bound,
                "vertex {kv}: κ r = {} off by {rel} > {bound}",
                kap * r
            );
        }
    }

    #[test]
    fn far_field_potential_approaches_outer_branch() {
        let curve = ShapeSpec::ConcentricPair {
            r_inner: 2.5,
            r_outer: 3.0,
            k: 256,
        }
        .build(4.0)
        .unwrap();
        let config = annulus_config(Scheme::BgnLinear, Integration::TrueIntegration);
        let mesh = BulkMesh::build_adaptive(&curve, &config.mesh).unwrap();
        let result = linear_step(&curve, &mesh, &config, config.dt).unwrap();
        // Corner node: far from both interfaces.
        let corner = mesh
            .vertices()
            .iter()
            .position(|p| p.x == -4.0 && p.y == -4.0)
            .unwrap();
        let got = result.u[corner];
        assert!(
            (got + 1.0 / 3.0).abs() < 0.02,
            "far-field potential {got} vs -1/3"
        );
    }

    #[test]
    fn fixed_point_first_iterate_reduces_to_linear_step() {
        let curve = ShapeSpec::Stadium {
            length: 3.0,
            width: 1.0,
            k: 128,
        }
        .build(4.0)
        .unwrap();
        let mut config = annulus_config(Scheme::SpFixedPoint, Integration::Lumped);
        config.dt = 1e-3;
        let mesh = BulkMesh::build_adaptive(&curve, &config.mesh).unwrap();
        let linear = linear_step(&curve, &mesh, &config, config.dt).unwrap();
        // With an infinite tolerance the iteration accepts the first
        // iterate, whose weights are bitwise the old vertex normals.
        config.tol = f64::INFINITY;
        config.max_fixed_point_iters = 1;
        let fp = fixed_point_step(&curve, &mesh, &config, config.dt).unwrap();
        assert_eq!(fp.iterations, 1);
        assert_eq!(linear.u, fp.u);
        assert_eq!(linear.kappa, fp.kappa);
        for (a, b) in linear.positions.iter().zip(&fp.positions) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
    }

    #[test]
    fn nonconvergence_surfaces_as_error() {
        let curve = ShapeSpec::Stadium {
            length: 3.0,
            width: 1.0,
            k: 64,
        }
        .build(4.0)
        .unwrap();
        let mut config = annulus_config(Scheme::SpFixedPoint, Integration::Lumped);
        config.dt = 1e-3;
        config.tol = 1e-16;
        config.max_fixed_point_iters = 2;
        let mesh = BulkMesh::build_adaptive(&curve, &config.mesh).unwrap();
        match fixed_point_step(&curve, &mesh, &config, config.dt) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("expected nonconvergence, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn near_stationary_circle_converges_immediately() {
        let curve = ShapeSpec::Circle { radius: 2.0, k: 128 }.build(4.0).unwrap();
        let mut config = annulus_config(Scheme::SpFixedPoint, Integration::Lumped);
        config.dt = 1e-3;
        let mesh = BulkMesh::build_adaptive(&curve, &config.mesh).unwrap();
        let result = fixed_point_step(&curve, &mesh, &config, config.dt).unwrap();
        assert!(
            result.iterations <= 2,
            "near-equilibrium circle took {} iterations",
            result.iterations
        );
        // The circle barely moves.
        for (kv, p) in result.positions.iter().enumerate() {
            assert!(
                (p.norm() - 2.0).abs() < 1e-4,
                "vertex {kv} drifted to radius {}",
                p.norm()
            );
        }
    }

    #[test]
    fn volume_conservation_and_identity_audit() {
        let curve = ShapeSpec::Stadium {
            length: 2.5,
            width: 0.8,
            k: 96,
        }
        .build(4.0)
        .unwrap();
        let mut config = annulus_config(Scheme::SpFixedPoint, Integration::TrueIntegration);
        config.dt = 1e-3;
        config.t_end = 5e-3;
        config.mesh = mesh_params(64, 8);
        let summary = run_simulation(&curve, &config, &mut ()).unwrap();
        assert_eq!(summary.steps.len(), 5);
        let vol0 = curve.enclosed_volume();
        for d in &summary.steps {
            assert!(
                (d.volume - vol0).abs() <= 10.0 * config.tol,
                "step {}: volume drifted by {}",
                d.step,
                (d.volume - vol0).abs()
            );
        }
    }

    #[test]
    fn linear_scheme_drifts_but_less_with_smaller_steps() {
        let curve = ShapeSpec::Stadium {
            length: 2.5,
            width: 0.8,
            k: 96,
        }
        .build(4.0)
        .unwrap();
        let vol0 = curve.enclosed_volume();
        let mut drifts = Vec::new();
        for dt in [2e-3, 1e-3] {
            let mut config = annulus_config(Scheme::BgnLinear, Integration::TrueIntegration);
            config.dt = dt;
            config.t_end = 8e-3;
            config.mesh = mesh_params(64, 8);
            let summary = run_simulation(&curve, &config, &mut ()).unwrap();
            drifts.push((summary.final_curve.enclosed_volume() - vol0).abs());
        }
        assert!(drifts[0] > 10.0 * 1e-10, "linear scheme should drift");
        assert!(drifts[1] < drifts[0], "drift should shrink with dt");
    }

    #[test]
    fn stability_residual_nonpositive_each_step() {
        let curve = ShapeSpec::Stadium {
            length: 2.0,
            width: 0.7,
            k: 64,
        }
        .build(4.0)
        .unwrap();
        for scheme in [Scheme::BgnLinear, Scheme::SpFixedPoint] {
            let mut config = annulus_config(scheme, Integration::Lumped);
            config.dt = 1e-3;
            config.t_end = 6e-3;
            config.mesh = mesh_params(64, 8);
            let summary = run_simulation(&curve, &config, &mut ()).unwrap();
            for d in &summary.steps {
                assert!(
                    d.stability_residual <= 1e-11 * d.energy,
                    "step {}: residual {}",
                    d.step,
                    d.stability_residual
                );
            }
        }
    }

    #[test]
    fn anisotropic_isotropic_density_matches_plain_isotropic() {
        let curve = ShapeSpec::Stadium {
            length: 2.0,
            width: 0.7,
            k: 64,
        }
        .build(4.0)
        .unwrap();
        let mut base = annulus_config(Scheme::SpFixedPoint, Integration::Lumped);
        base.dt = 1e-3;
        base.t_end = 3e-3;
        base.mesh = mesh_params(64, 8);
        let plain = run_simulation(&curve, &base, &mut ()).unwrap();
        let mut with_density = base.clone();
        with_density.anisotropy = Some(AnisotropyDef::isotropic());
        let dressed = run_simulation(&curve, &with_density, &mut ()).unwrap();
        for (a, b) in plain
            .final_curve
            .positions()
            .iter()
            .zip(dressed.final_curve.positions())
        {
            assert!((*a - *b).max_abs() < 1e-10);
        }
    }

    #[test]
    fn octagon_density_run_is_energy_monotone() {
        let curve = ShapeSpec::OctagonStar { k: 128 }.build(4.0).unwrap();
        let mut config = annulus_config(Scheme::SpFixedPoint, Integration::Lumped);
        config.anisotropy = Some(AnisotropyDef::octagon(1e-4).unwrap());
        config.dt = 1e-3;
        config.t_end = 5e-3;
        config.mesh = mesh_params(64, 8);
        let summary = run_simulation(&curve, &config, &mut ()).unwrap();
        for d in &summary.steps {
            assert!(
                d.stability_residual <= 1e-11 * d.energy_aniso,
                "step {}: anisotropic residual {}",
                d.step,
                d.stability_residual
            );
        }
    }

    #[test]
    fn time_grid_clips_final_step_and_skips_empty_one() {
        let curve = ShapeSpec::Circle { radius: 1.5, k: 32 }.build(4.0).unwrap();
        let mut config = annulus_config(Scheme::BgnLinear, Integration::Lumped);
        config.dt = 1e-3;
        config.mesh = mesh_params(32, 8);
        // T = 2.5 dt: three steps, the last of length dt/2.
        config.t_end = 2.5e-3;
        let summary = run_simulation(&curve, &config, &mut ()).unwrap();
        assert_eq!(summary.steps.len(), 3);
        assert_eq!(summary.steps[2].t, 2.5e-3);
        // T = 2 dt exactly: the zero-length trailing step is skipped.
        config.t_end = 2e-3;
        let summary = run_simulation(&curve, &config, &mut ()).unwrap();
        assert_eq!(summary.steps.len(), 2);
        assert_eq!(summary.steps[1].t, 2e-3);
    }
}
