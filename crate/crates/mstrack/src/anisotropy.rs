//! Anisotropic surface energy densities and their weighted surface forms.
//!
//! Densities have the form γ(p) = (Σ_ℓ [G_ℓ p·p]^{r/2})^{1/r} with SPD
//! matrices G_ℓ and exponent r ≥ 1. The weighted first-variation form uses
//! the adjugate matrices G̃_ℓ = det(G_ℓ)·G_ℓ^{-1}; in the plane the identity
//! G̃ τ·τ = G ν·ν for orthonormal (τ, ν) turns the weighted tangent
//! normalization into a per-element scalar, which keeps the assembled form
//! symmetric positive semidefinite and, for r = 1, independent of the
//! iterate it is lagged against.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Symmetric 2x2 matrix [[a, b], [b, c]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SymMat2 {
    pub const IDENTITY: SymMat2 = SymMat2 {
        a: 1.0,
        b: 0.0,
        c: 1.0,
    };

    pub fn apply(&self, p: Vec2) -> Vec2 {
        Vec2 {
            x: self.a * p.x + self.b * p.y,
            y: self.b * p.x + self.c * p.y,
        }
    }

    /// p · (M p).
    pub fn quad(&self, p: Vec2) -> f64 {
        self.a * p.x * p.x + 2.0 * self.b * p.x * p.y + self.c * p.y * p.y
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// det(M) · M^{-1}; for 2x2 this is the adjugate [[c, -b], [-b, a]].
    pub fn adjugate(&self) -> SymMat2 {
        SymMat2 {
            a: self.c,
            b: -self.b,
            c: self.a,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0.0 && self.det() > 0.0
    }

    /// scale · R(angle)^T diag(d0, d1) R(angle).
    pub fn rotated_diag(angle: f64, d0: f64, d1: f64, scale: f64) -> SymMat2 {
        let (s, c) = angle.sin_cos();
        SymMat2 {
            a: scale * (d0 * c * c + d1 * s * s),
            b: scale * (d0 - d1) * s * c,
            c: scale * (d0 * s * s + d1 * c * c),
        }
    }

    fn scaled_add(&self, o: SymMat2, w: f64) -> SymMat2 {
        SymMat2 {
            a: self.a + w * o.a,
            b: self.b + w * o.b,
            c: self.c + w * o.c,
        }
    }
}

/// Surface energy density γ(p) = (Σ_ℓ [G_ℓ p·p]^{r/2})^{1/r}.
#[derive(Clone, Debug)]
pub struct AnisotropyDef {
    terms: Vec<SymMat2>,
    r: f64,
}

impl AnisotropyDef {
    pub fn new(terms: Vec<SymMat2>, r: f64) -> Result<AnisotropyDef> {
        if terms.is_empty() {
            return Err(Error::Config("anisotropy needs at least one term".into()));
        }
        if !(r >= 1.0) {
            return Err(Error::Config(format!("exponent r = {r} must be >= 1")));
        }
        for (l, g) in terms.iter().enumerate() {
            if !g.is_positive_definite() {
                return Err(Error::Config(format!(
                    "anisotropy matrix {l} is not positive definite"
                )));
            }
        }
        Ok(AnisotropyDef { terms, r })
    }

    /// γ(p) = |p|: one identity term, r = 1.
    pub fn isotropic() -> AnisotropyDef {
        AnisotropyDef {
            terms: vec![SymMat2::IDENTITY],
            r: 1.0,
        }
    }

    /// Four-fold r = 1 density whose Wulff shape tends to a regular octagon
    /// as δ → 0: G_ℓ = (1/16) R(ℓπ/4)^T diag(1, δ²) R(ℓπ/4), ℓ = 0..3.
    pub fn octagon(delta: f64) -> Result<AnisotropyDef> {
        if !(delta > 0.0) {
            return Err(Error::Config(format!("octagon delta = {delta} must be > 0")));
        }
        let terms = (0..4)
            .map(|l| {
                SymMat2::rotated_diag(
                    l as f64 * std::f64::consts::FRAC_PI_4,
                    1.0,
                    delta * delta,
                    1.0 / 16.0,
                )
            })
            .collect();
        AnisotropyDef::new(terms, 1.0)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn exponent(&self) -> f64 {
        self.r
    }

    pub fn terms(&self) -> &[SymMat2] {
        &self.terms
    }

    /// γ_ℓ(p) = sqrt(G_ℓ p · p).
    pub fn gamma_l(&self, l: usize, p: Vec2) -> f64 {
        self.terms[l].quad(p).max(0.0).sqrt()
    }

    pub fn gamma(&self, p: Vec2) -> Result<f64> {
        if p.x == 0.0 && p.y == 0.0 {
            return Err(Error::Domain("gamma evaluated at p = 0".into()));
        }
        if self.r == 1.0 {
            return Ok((0..self.terms.len()).map(|l| self.gamma_l(l, p)).sum());
        }
        let s: f64 = (0..self.terms.len())
            .map(|l| self.terms[l].quad(p).powf(0.5 * self.r))
            .sum();
        Ok(s.powf(1.0 / self.r))
    }

    /// γ'(p) = γ(p)^{1-r} Σ_ℓ γ_ℓ(p)^{r-2} G_ℓ p.
    pub fn gamma_grad(&self, p: Vec2) -> Result<Vec2> {
        let g = self.gamma(p)?;
        let mut acc = Vec2::ZERO;
        for l in 0..self.terms.len() {
            let gl = self.gamma_l(l, p);
            let w = if self.r == 2.0 {
                1.0
            } else {
                gl.powf(self.r - 2.0)
            };
            acc = acc + self.terms[l].apply(p) * w;
        }
        let scale = if self.r == 1.0 { 1.0 } else { g.powf(1.0 - self.r) };
        Ok(acc * scale)
    }

    /// |Γ|_γ = Σ_j |σ_j| γ(ν_j).
    pub fn energy(&self, curve: &Curve) -> Result<f64> {
        let mut e = 0.0;
        for j in 0..curve.element_count() {
            let (a, b) = curve.element(j);
            let len = curve.vertex(a).dist(curve.vertex(b));
            e += len * self.gamma(curve.element_normal(j))?;
        }
        Ok(e)
    }
}

/// Assembled first-variation surface form over vertex vector fields:
/// A(X, η) = Σ_j B_j (X_b - X_a) · (η_b - η_a) with per-element SPD blocks.
pub struct SurfaceForm {
    elems: Vec<(usize, usize)>,
    blocks: Vec<SymMat2>,
    nverts: usize,
}

/// Builds the weighted form on the old curve. `lagged_normals` are unit
/// normals of the current iterate per element; they only enter the ratio
/// weights, so `None` is accepted when r = 1 (the factor is identically 1).
pub fn anisotropic_form(
    def: &AnisotropyDef,
    old: &Curve,
    lagged_normals: Option<&[Vec2]>,
) -> Result<SurfaceForm> {
    let nj = old.element_count();
    if def.exponent() > 1.0 {
        match lagged_normals {
            Some(nu) if nu.len() == nj => {}
            Some(nu) => {
                return Err(Error::Config(format!(
                    "lagged normals: {} given, {nj} elements",
                    nu.len()
                )))
            }
            None => {
                return Err(Error::Config(
                    "exponent r > 1 requires lagged normals".into(),
                ))
            }
        }
    }
    let mut elems = Vec::with_capacity(nj);
    let mut blocks = Vec::with_capacity(nj);
    for j in 0..nj {
        let (a, b) = old.element(j);
        let len = old.vertex(a).dist(old.vertex(b));
        let nu_old = old.element_normal(j);
        let mut block = SymMat2 {
            a: 0.0,
            b: 0.0,
            c: 0.0,
        };
        for l in 0..def.term_count() {
            let ratio = if def.exponent() == 1.0 {
                1.0
            } else {
                let nu = lagged_normals.unwrap()[j];
                (def.gamma_l(l, nu) / def.gamma(nu)?).powf(def.exponent() - 1.0)
            };
            let w = ratio / (len * def.gamma_l(l, nu_old));
            block = block.scaled_add(def.terms()[l].adjugate(), w);
        }
        elems.push((a, b));
        blocks.push(block);
    }
    Ok(SurfaceForm {
        elems,
        blocks,
        nverts: old.vertex_count(),
    })
}

impl SurfaceForm {
    pub fn evaluate(&self, x: &[Vec2], eta: &[Vec2]) -> f64 {
        let mut acc = 0.0;
        for (j, &(a, b)) in self.elems.iter().enumerate() {
            let dx = x[b] - x[a];
            let de = eta[b] - eta[a];
            acc += self.blocks[j].apply(dx).dot(de);
        }
        acc
    }

    pub fn apply(&self, x: &[Vec2]) -> Vec<Vec2> {
        let mut y = vec![Vec2::ZERO; self.nverts];
        for (j, &(a, b)) in self.elems.iter().enumerate() {
            let f = self.blocks[j].apply(x[b] - x[a]);
            y[a] = y[a] - f;
            y[b] = y[b] + f;
        }
        y
    }

    /// Triplets over the stacked layout (x components 0..K, y components
    /// K..2K). Zero entries are kept so the pattern is independent of the
    /// block values, allowing factorization-pattern reuse across iterates.
    pub fn triplets_stacked(&self) -> Vec<(usize, usize, f64)> {
        let k = self.nverts;
        let mut trips = Vec::with_capacity(16 * self.elems.len());
        for (j, &(a, b)) in self.elems.iter().enumerate() {
            let m = self.blocks[j];
            // Component pairs (row offset, col offset, matrix entry).
            for (ro, co, v) in [
                (0, 0, m.a),
                (0, k, m.b),
                (k, 0, m.b),
                (k, k, m.c),
            ] {
                trips.push((a + ro, a + co, v));
                trips.push((b + ro, b + co, v));
                trips.push((a + ro, b + co, -v));
                trips.push((b + ro, a + co, -v));
            }
        }
        trips
    }
}
