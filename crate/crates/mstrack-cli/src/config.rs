//! TOML experiment specification and its translation to solver types.

use anyhow::{bail, Context, Result};
use mstrack::anisotropy::{AnisotropyDef, SymMat2};
use mstrack::bulk::MeshParams;
use mstrack::curve::ShapeSpec;
use mstrack::stepper::{Integration, Scheme, SchemeConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Root of an experiment spec file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub shape: Option<ShapeSection>,
    pub scheme: Option<SchemeSection>,
    pub mesh: Option<MeshSection>,
    pub anisotropy: Option<AnisotropySection>,
    pub output: OutputSection,
    pub converge: Option<ConvergeSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    pub kind: String,
    pub radius: Option<f64>,
    pub r_inner: Option<f64>,
    pub r_outer: Option<f64>,
    pub length: Option<f64>,
    pub width: Option<f64>,
    pub k: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub scheme: SchemeName,
    pub integration: IntegrationName,
    pub dt: f64,
    pub t_end: f64,
    pub tol: Option<f64>,
    pub max_fixed_point_iters: Option<usize>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    BgnLinear,
    SpFixedPoint,
}

#[derive(Deserialize, Clone, Copy)]
pub enum IntegrationName {
    #[serde(rename = "lumped")]
    Lumped,
    #[serde(rename = "true")]
    True,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub half_width: f64,
    pub n_fine: u32,
    pub n_coarse: u32,
}

/// Exactly one of `preset`, `matrices`, `rotated_diag` selects the density.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnisotropySection {
    pub preset: Option<String>,
    pub delta: Option<f64>,
    pub r: Option<f64>,
    pub matrices: Option<Vec<[f64; 3]>>,
    pub rotated_diag: Option<Vec<RotatedDiagEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotatedDiagEntry {
    pub angle: f64,
    pub d0: f64,
    pub d1: f64,
    pub scale: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshot_times: Option<Vec<f64>>,
    pub snapshot_dt: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub levels: Vec<u32>,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<ExperimentSpec> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read spec file {}", path.display()))?;
        let spec: ExperimentSpec = toml::from_str(&text)
            .with_context(|| format!("cannot parse spec file {}", path.display()))?;
        Ok(spec)
    }

    /// Builds the initial curve; requires the `[shape]` and `[mesh]` sections.
    pub fn build_shape(&self) -> Result<mstrack::curve::Curve> {
        let shape = self
            .shape
            .as_ref()
            .context("spec is missing the [shape] section")?;
        let mesh = self
            .mesh
            .as_ref()
            .context("spec is missing the [mesh] section")?;
        Ok(shape.to_spec()?.build(mesh.half_width)?)
    }

    /// Builds the full scheme configuration; requires `[scheme]` and `[mesh]`.
    pub fn build_scheme(&self) -> Result<SchemeConfig> {
        let scheme = self
            .scheme
            .as_ref()
            .context("spec is missing the [scheme] section")?;
        let mesh = self
            .mesh
            .as_ref()
            .context("spec is missing the [mesh] section")?;
        let mut config = SchemeConfig::new(
            scheme.scheme.into(),
            scheme.integration.into(),
            scheme.dt,
            scheme.t_end,
            MeshParams {
                half_width: mesh.half_width,
                n_fine: mesh.n_fine,
                n_coarse: mesh.n_coarse,
            },
        );
        if let Some(tol) = scheme.tol {
            config.tol = tol;
        }
        if let Some(iters) = scheme.max_fixed_point_iters {
            config.max_fixed_point_iters = iters;
        }
        if let Some(aniso) = &self.anisotropy {
            config.anisotropy = Some(aniso.build()?);
        }
        config.validate()?;
        Ok(config)
    }

    /// The snapshot times for a run ending at `t_end`, sorted and deduplicated.
    /// Defaults to {0, t_end} when the spec gives no cadence.
    pub fn snapshot_times(&self, t_end: f64) -> Vec<f64> {
        let mut times = Vec::new();
        if let Some(list) = &self.output.snapshot_times {
            times.extend(list.iter().copied());
        }
        if let Some(step) = self.output.snapshot_dt {
            if step > 0.0 {
                let n = (t_end / step).round() as usize;
                times.extend((0..=n).map(|i| i as f64 * step));
            }
        }
        if times.is_empty() {
            times.extend([0.0, t_end]);
        }
        times.retain(|t| *t >= 0.0 && *t <= t_end * (1.0 + 1e-12));
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        times
    }
}

impl ShapeSection {
    fn to_spec(&self) -> Result<ShapeSpec> {
        let req = |v: Option<f64>, field: &str| {
            v.with_context(|| format!("shape kind {:?} requires field {field}", self.kind))
        };
        let absent = |v: Option<f64>, field: &str| -> Result<()> {
            if v.is_some() {
                bail!("shape kind {:?} does not take field {field}", self.kind);
            }
            Ok(())
        };
        let spec = match self.kind.as_str() {
            "circle" => {
                for (v, f) in [
                    (self.r_inner, "r_inner"),
                    (self.r_outer, "r_outer"),
                    (self.length, "length"),
                    (self.width, "width"),
                ] {
                    absent(v, f)?;
                }
                ShapeSpec::Circle {
                    radius: req(self.radius, "radius")?,
                    k: self.k,
                }
            }
            "concentric_pair" => {
                for (v, f) in [
                    (self.radius, "radius"),
                    (self.length, "length"),
                    (self.width, "width"),
                ] {
                    absent(v, f)?;
                }
                ShapeSpec::ConcentricPair {
                    r_inner: req(self.r_inner, "r_inner")?,
                    r_outer: req(self.r_outer, "r_outer")?,
                    k: self.k,
                }
            }
            "stadium" => {
                for (v, f) in [
                    (self.radius, "radius"),
                    (self.r_inner, "r_inner"),
                    (self.r_outer, "r_outer"),
                ] {
                    absent(v, f)?;
                }
                ShapeSpec::Stadium {
                    length: req(self.length, "length")?,
                    width: req(self.width, "width")?,
                    k: self.k,
                }
            }
            "octagon_star" => {
                for (v, f) in [
                    (self.radius, "radius"),
                    (self.r_inner, "r_inner"),
                    (self.r_outer, "r_outer"),
                    (self.length, "length"),
                    (self.width, "width"),
                ] {
                    absent(v, f)?;
                }
                ShapeSpec::OctagonStar { k: self.k }
            }
            other => bail!(
                "unknown shape kind {other:?}; expected circle, concentric_pair, stadium, or octagon_star"
            ),
        };
        Ok(spec)
    }
}

impl AnisotropySection {
    fn build(&self) -> Result<AnisotropyDef> {
        let selected = [
            self.preset.is_some(),
            self.matrices.is_some(),
            self.rotated_diag.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if selected != 1 {
            bail!("[anisotropy] needs exactly one of preset, matrices, rotated_diag");
        }
        if let Some(name) = &self.preset {
            if name != "octagon" {
                bail!("unknown anisotropy preset {name:?}; expected \"octagon\"");
            }
            if self.r.is_some() {
                bail!("the octagon preset fixes r = 1; drop the r field");
            }
            return Ok(AnisotropyDef::octagon(self.delta.unwrap_or(1e-4))?);
        }
        if self.delta.is_some() {
            bail!("delta only applies to the octagon preset");
        }
        let r = self.r.context("[anisotropy] with explicit terms requires r")?;
        let terms: Vec<SymMat2> = if let Some(mats) = &self.matrices {
            mats.iter().map(|[a, b, c]| SymMat2 { a: *a, b: *b, c: *c }).collect()
        } else {
            self.rotated_diag
                .as_ref()
                .unwrap()
                .iter()
                .map(|e| SymMat2::rotated_diag(e.angle, e.d0, e.d1, e.scale))
                .collect()
        };
        Ok(AnisotropyDef::new(terms, r)?)
    }
}

impl From<SchemeName> for Scheme {
    fn from(name: SchemeName) -> Scheme {
        match name {
            SchemeName::BgnLinear => Scheme::BgnLinear,
            SchemeName::SpFixedPoint => Scheme::SpFixedPoint,
        }
    }
}

impl From<IntegrationName> for Integration {
    fn from(name: IntegrationName) -> Integration {
        match name {
            IntegrationName::Lumped => Integration::Lumped,
            IntegrationName::True => Integration::TrueIntegration,
        }
    }
}
