//! Unfitted bulk–surface assembly.
//!
//! The curve carries its own mesh, so coupling terms need either the bulk
//! basis values at curve vertices (lumped variant) or exact integrals over
//! the pieces of each curve element that the bulk triangles cut it into
//! (true-integration variant). Clipping partitions every curve element into
//! such pieces by collecting the parameter intervals it spends inside each
//! nearby triangle.

use crate::bulk::BulkMesh;
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::linsolve::SparseMat;

/// Breakpoint parameters closer than this merge into one cut.
const PARAM_TOL: f64 = 1e-14;
/// Barycentric slack used when claiming a subsegment midpoint.
const BARY_TOL: f64 = 1e-12;

/// How the bulk–surface pairing is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingVariant {
    /// Vertex quadrature with the lumped surface mass.
    Lumped,
    /// Exact integration over clipped subsegments.
    TrueIntegration,
}

/// One piece of a curve element inside a single bulk triangle.
#[derive(Clone, Copy, Debug)]
pub struct SubSegment {
    /// Curve element index.
    pub element: usize,
    /// Bulk triangle owning the piece.
    pub triangle: usize,
    /// Parameter interval along the element, within [0, 1].
    pub t0: f64,
    pub t1: f64,
}

/// Everything the coupled solve needs from the curve–mesh geometry.
pub struct CouplingMatrices {
    /// Bulk-by-curve pairing matrix, K_Omega x K.
    pub n: SparseMat,
    /// Lumped surface mass diagonal m_k.
    pub masses: Vec<f64>,
    /// Scalar surface stiffness, K x K; acts componentwise on vectors.
    pub surface_stiffness: SparseMat,
}

/// Partitions every curve element into subsegments owned by single bulk
/// triangles. Ownership of each piece goes to the triangle `locate_point`
/// picks for its midpoint, so degenerate cuts resolve deterministically.
pub fn clip_curve_to_mesh(curve: &Curve, mesh: &BulkMesh) -> Result<Vec<SubSegment>> {
    let mut out = Vec::with_capacity(2 * curve.element_count());
    let mut cand: Vec<usize> = Vec::new();
    let mut cuts: Vec<f64> = Vec::new();
    for j in 0..curve.element_count() {
        let (s0, s1) = curve.element(j);
        let (p0, p1) = (curve.vertex(s0), curve.vertex(s1));
        cand.clear();
        let lo = Vec2 {
            x: p0.x.min(p1.x),
            y: p0.y.min(p1.y),
        };
        let hi = Vec2 {
            x: p0.x.max(p1.x),
            y: p0.y.max(p1.y),
        };
        mesh.candidates_in_box(lo, hi, |t| cand.push(t));
        cand.sort_unstable();
        cand.dedup();

        cuts.clear();
        cuts.push(0.0);
        cuts.push(1.0);
        for &t in &cand {
            if let Some((a, b)) = clip_to_triangle(mesh, t, p0, p1) {
                cuts.push(a);
                cuts.push(b);
            }
        }
        cuts.sort_unstable_by(|a, b| a.total_cmp(b));
        cuts.dedup_by(|a, b| (*a - *b).abs() <= PARAM_TOL);

        let mut prev: Option<SubSegment> = None;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= PARAM_TOL {
                continue;
            }
            let mid = p0 + (p1 - p0) * (0.5 * (a + b));
            let (owner, _) = mesh.locate_point(mid)?;
            match prev {
                Some(ref mut s) if s.triangle == owner => s.t1 = b,
                _ => {
                    if let Some(s) = prev.take() {
                        out.push(s);
                    }
                    prev = Some(SubSegment {
                        element: j,
                        triangle: owner,
                        t0: a,
                        t1: b,
                    });
                }
            }
        }
        out.push(prev.ok_or_else(|| {
            Error::Geometry(format!("curve element {j} produced no subsegments"))
        })?);
    }
    Ok(out)
}

/// Parameter interval of segment p0 -> p1 inside the closed triangle `t`,
/// by successive half-plane clipping; `None` if empty.
fn clip_to_triangle(mesh: &BulkMesh, t: usize, p0: Vec2, p1: Vec2) -> Option<(f64, f64)> {
    let [a, b, c] = mesh.triangles()[t];
    let vs = [
        mesh.vertices()[a],
        mesh.vertices()[b],
        mesh.vertices()[c],
    ];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for i in 0..3 {
        let (ea, eb) = (vs[i], vs[(i + 1) % 3]);
        let d = eb - ea;
        // Signed distance factor along the inward side of edge (ea, eb):
        // f(s) = d x (p(s) - ea) is affine in s.
        let f0 = d.cross(p0 - ea);
        let f1 = d.cross(p1 - ea);
        if f0 < 0.0 && f1 < 0.0 {
            return None;
        }
        if f0 < 0.0 {
            lo = lo.max(f0 / (f0 - f1));
        } else if f1 < 0.0 {
            hi = hi.min(f0 / (f0 - f1));
        }
    }
    (hi - lo > PARAM_TOL).then_some((lo, hi))
}

/// Lumped surface mass diagonal and the scalar surface stiffness.
pub fn assemble_surface_operators(curve: &Curve) -> (Vec<f64>, SparseMat) {
    let k = curve.vertex_count();
    let masses = curve.vertex_masses();
    let mut trips = Vec::with_capacity(4 * k);
    for j in 0..curve.element_count() {
        let (a, b) = curve.element(j);
        let len = curve.vertex(a).dist(curve.vertex(b));
        let w = 1.0 / len;
        trips.push((a, a, w));
        trips.push((b, b, w));
        trips.push((a, b, -w));
        trips.push((b, a, -w));
    }
    (masses, SparseMat::from_triplets(k, k, &trips))
}

/// Builds the mixed pairing matrix together with the surface operators.
pub fn assemble_coupling(
    curve: &Curve,
    mesh: &BulkMesh,
    variant: CouplingVariant,
) -> Result<CouplingMatrices> {
    let (masses, surface_stiffness) = assemble_surface_operators(curve);
    let k_omega = mesh.vertex_count();
    let k = curve.vertex_count();
    let mut trips: Vec<(usize, usize, f64)> = Vec::with_capacity(6 * k);
    match variant {
        CouplingVariant::Lumped => {
            for kv in 0..k {
                let (t, l) = mesh.locate_point(curve.vertex(kv))?;
                let tri = mesh.triangles()[t];
                for i in 0..3 {
                    trips.push((tri[i], kv, masses[kv] * l[i]));
                }
            }
        }
        CouplingVariant::TrueIntegration => {
            // 2-point Gauss per subsegment: the integrand (bulk hat x curve
            // hat) is quadratic along the piece, so this is exact.
            const GAUSS: f64 = 0.288675134594812882; // 1/(2 sqrt 3)
            for s in clip_curve_to_mesh(curve, mesh)? {
                let (v0, v1) = curve.element(s.element);
                let (p0, p1) = (curve.vertex(v0), curve.vertex(v1));
                let elem_len = p0.dist(p1);
                let wq = 0.5 * elem_len * (s.t1 - s.t0);
                let mid = 0.5 * (s.t0 + s.t1);
                let half = s.t1 - s.t0;
                for g in [mid - GAUSS * half, mid + GAUSS * half] {
                    let p = p0 + (p1 - p0) * g;
                    let l = mesh
                        .barycentric(s.triangle, p, BARY_TOL)
                        .ok_or_else(|| {
                            Error::Geometry(format!(
                                "quadrature point escaped triangle {}",
                                s.triangle
                            ))
                        })?;
                    let tri = mesh.triangles()[s.triangle];
                    for i in 0..3 {
                        trips.push((tri[i], v0, wq * l[i] * (1.0 - g)));
                        trips.push((tri[i], v1, wq * l[i] * g));
                    }
                }
            }
        }
    }
    Ok(CouplingMatrices {
        n: SparseMat::from_triplets(k_omega, k, &trips),
        masses,
        surface_stiffness,
    })
}
