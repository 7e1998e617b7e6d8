//! Polygonal interface curves.
//!
//! A curve is one or more closed vertex loops over a shared vertex array.
//! Element `j` is the segment from vertex `j` to its loop successor, so the
//! global vertex count and element count coincide. The stored winding makes
//! the rotated edge vector `(q2 - q1).perp() / |q2 - q1|` the outer normal of
//! the enclosed region: outer loops run clockwise, hole loops anticlockwise.
//! Constructors accept either winding and normalize by signed area.

use crate::error::{Error, Result};
use crate::geom::{segment_segment_dist2, vec2, Vec2, Vec3};

/// Contiguous index range of one closed loop in the shared vertex array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopRange {
    pub first: usize,
    pub count: usize,
    /// Hole loops bound the enclosed region from inside (annulus interior
    /// boundary); their winding is opposite to outer loops.
    pub hole: bool,
}

/// Oriented polygonal curve with one or more closed components.
#[derive(Clone, Debug)]
pub struct Curve {
    verts: Vec<Vec2>,
    loops: Vec<LoopRange>,
    next: Vec<usize>,
    prev: Vec<usize>,
}

impl Curve {
    /// Builds a curve from closed loops given as (vertices, is_hole).
    /// Loop winding is normalized so element normals point out of the
    /// enclosed region; vertex order within a loop is otherwise preserved.
    pub fn from_loops(loops_in: Vec<(Vec<Vec2>, bool)>) -> Result<Self> {
        if loops_in.is_empty() {
            return Err(Error::Geometry("curve needs at least one loop".into()));
        }
        let mut verts = Vec::new();
        let mut loops = Vec::new();
        for (mut pts, hole) in loops_in {
            if pts.len() < 3 {
                return Err(Error::Geometry(format!(
                    "loop with {} vertices; closed loops need at least 3",
                    pts.len()
                )));
            }
            let area2 = shoelace_twice(&pts);
            if area2 == 0.0 {
                return Err(Error::Geometry("loop with zero signed area".into()));
            }
            // Outer loops store negative shoelace area (clockwise), holes
            // positive, so that edge.perp() points out of the enclosed set.
            let want_positive = hole;
            if (area2 > 0.0) != want_positive {
                pts.reverse();
            }
            loops.push(LoopRange {
                first: verts.len(),
                count: pts.len(),
                hole,
            });
            verts.extend(pts);
        }
        let curve = Self::assemble(verts, loops)?;
        Ok(curve)
    }

    /// Same connectivity with replacement vertex positions.
    pub fn with_positions(&self, verts: Vec<Vec2>) -> Result<Self> {
        if verts.len() != self.verts.len() {
            return Err(Error::Geometry(format!(
                "position count {} does not match vertex count {}",
                verts.len(),
                self.verts.len()
            )));
        }
        Self::assemble(verts, self.loops.clone())
    }

    fn assemble(verts: Vec<Vec2>, loops: Vec<LoopRange>) -> Result<Self> {
        let k = verts.len();
        let mut next = vec![0usize; k];
        let mut prev = vec![0usize; k];
        for lp in &loops {
            for i in 0..lp.count {
                let a = lp.first + i;
                let b = lp.first + (i + 1) % lp.count;
                next[a] = b;
                prev[b] = a;
            }
        }
        for (i, &v) in verts.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Geometry(format!("non-finite vertex {i}")));
            }
            if verts[next[i]] == v {
                return Err(Error::Geometry(format!(
                    "degenerate element at vertex {i}: consecutive vertices coincide"
                )));
            }
        }
        Ok(Self {
            verts,
            loops,
            next,
            prev,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    /// Element count; equals the vertex count for closed loops.
    pub fn element_count(&self) -> usize {
        self.verts.len()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn loops(&self) -> &[LoopRange] {
        &self.loops
    }

    pub fn vertex(&self, k: usize) -> Vec2 {
        self.verts[k]
    }

    /// Endpoint indices (first, second) of element `j`.
    pub fn element(&self, j: usize) -> (usize, usize) {
        (j, self.next[j])
    }

    /// Index of the element entering vertex `k` (element `k` leaves it).
    pub fn element_before(&self, k: usize) -> usize {
        self.prev[k]
    }

    pub fn element_vector(&self, j: usize) -> Vec2 {
        self.verts[self.next[j]] - self.verts[j]
    }

    pub fn element_length(&self, j: usize) -> f64 {
        self.element_vector(j).norm()
    }

    pub fn element_midpoint(&self, j: usize) -> Vec2 {
        (self.verts[j] + self.verts[self.next[j]]) * 0.5
    }

    /// Total length of the curve.
    pub fn length(&self) -> f64 {
        (0..self.element_count())
            .map(|j| self.element_length(j))
            .sum()
    }

    /// Maximum element diameter.
    pub fn max_element_length(&self) -> f64 {
        (0..self.element_count())
            .map(|j| self.element_length(j))
            .fold(0.0, f64::max)
    }

    /// Unit outer normal of element `j`: the anticlockwise-rotated edge
    /// direction under the stored winding convention.
    pub fn element_normal(&self, j: usize) -> Vec2 {
        let e = self.element_vector(j);
        let len = e.norm();
        assert!(len > 0.0, "degenerate element {j}");
        e.perp() / len
    }

    /// All element normals.
    pub fn element_normals(&self) -> Vec<Vec2> {
        (0..self.element_count())
            .map(|j| self.element_normal(j))
            .collect()
    }

    /// Lumped vertex masses m_k = (|sigma_-| + |sigma_+|) / 2.
    pub fn vertex_masses(&self) -> Vec<f64> {
        (0..self.vertex_count())
            .map(|k| 0.5 * (self.element_length(self.prev[k]) + self.element_length(k)))
            .collect()
    }

    /// Mass-lumped inner product of two scalar vertex fields:
    /// sum_j |sigma_j| (uv(q_1) + uv(q_2)) / 2 = sum_k m_k u_k v_k.
    pub fn lumped_ip_scalar(&self, u: &[f64], v: &[f64]) -> f64 {
        let m = self.vertex_masses();
        m.iter().zip(u).zip(v).map(|((m, u), v)| m * u * v).sum()
    }

    /// Mass-lumped inner product of two vector vertex fields.
    pub fn lumped_ip_vec(&self, u: &[Vec2], v: &[Vec2]) -> f64 {
        let m = self.vertex_masses();
        m.iter()
            .zip(u)
            .zip(v)
            .map(|((m, u), v)| m * u.dot(*v))
            .sum()
    }

    /// Inner product of an element-constant vector field against a vertex
    /// vector field: sum_j |sigma_j| w_j . (phi_1 + phi_2) / 2. For this
    /// pairing the lumped rule (one-sided limits at vertices) coincides with
    /// exact integration, the integrand being linear per element.
    pub fn ip_element_vertex(&self, w: &[Vec2], phi: &[Vec2]) -> f64 {
        (0..self.element_count())
            .map(|j| {
                let (a, b) = self.element(j);
                0.5 * self.element_length(j) * w[j].dot(phi[a] + phi[b])
            })
            .sum()
    }

    /// Mass-weighted vertex average of an element vector field:
    /// (|sigma_-| w_- + |sigma_+| w_+) / (|sigma_-| + |sigma_+|).
    /// This is the closed-form solution of the lumped projection of a
    /// piecewise-constant field onto the vertex space.
    pub fn mass_weighted_vertex_average(&self, w: &[Vec2]) -> Vec<Vec2> {
        (0..self.vertex_count())
            .map(|k| {
                let jm = self.prev[k];
                let lm = self.element_length(jm);
                let lp = self.element_length(k);
                (w[jm] * lm + w[k] * lp) / (lm + lp)
            })
            .collect()
    }

    /// Vertex normals: the lumped projection of the element normals,
    /// omega_k = (|sigma_-| nu_- + |sigma_+| nu_+) / (|sigma_-| + |sigma_+|).
    pub fn vertex_normals(&self) -> Vec<Vec2> {
        self.mass_weighted_vertex_average(&self.element_normals())
    }

    /// Area enclosed by the curve, computed as the boundary integral
    /// (1/2) sum_j |sigma_j| midpoint_j . nu_j (exact: the position field is
    /// linear per element and the normal constant). Holes subtract.
    pub fn enclosed_volume(&self) -> f64 {
        (0..self.element_count())
            .map(|j| {
                let e = self.element_vector(j);
                0.5 * self.element_midpoint(j).dot(e.perp())
            })
            .sum()
    }

    /// Applies the surface stiffness form to a vector vertex field:
    /// out_k = sum over elements at k of (x_k - x_other) / |sigma_j|.
    pub fn stiffness_apply(&self, x: &[Vec2]) -> Vec<Vec2> {
        let mut out = vec![Vec2::ZERO; self.vertex_count()];
        for j in 0..self.element_count() {
            let (a, b) = self.element(j);
            let d = (x[a] - x[b]) / self.element_length(j);
            out[a] += d;
            out[b] -= d;
        }
        out
    }

    /// Max-norm residual of the discrete curvature identity
    /// <kappa nu, phi>_lumped + <grad_s id, grad_s phi> = 0 over all nodal
    /// basis fields phi. The lumped first term collapses to m_k kappa_k
    /// omega_k at each vertex.
    pub fn conformality_residual(&self, kappa: &[f64]) -> f64 {
        let m = self.vertex_masses();
        let om = self.vertex_normals();
        let ax = self.stiffness_apply(self.positions());
        (0..self.vertex_count())
            .map(|k| (om[k] * (m[k] * kappa[k]) + ax[k]).max_abs())
            .fold(0.0, f64::max)
    }

    /// Ratio of longest to shortest element.
    pub fn equidistribution_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 0..self.element_count() {
            let l = self.element_length(j);
            lo = lo.min(l);
            hi = hi.max(l);
        }
        hi / lo
    }

    /// True if some vertex is reflex (interior angle above pi).
    pub fn has_reflex_vertex(&self) -> bool {
        const REL_TOL: f64 = 1e-12;
        self.loops.iter().any(|lp| {
            (lp.first..lp.first + lp.count).any(|k| {
                let e_in = self.element_vector(self.prev[k]);
                let e_out = self.element_vector(k);
                let turn = e_in.cross(e_out);
                // Outer loops are clockwise: convex corners turn right.
                let reflex = if lp.hole { -turn } else { turn };
                reflex > REL_TOL * e_in.norm() * e_out.norm()
            })
        })
    }

    /// True if no two non-adjacent elements intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.element_count();
        // Uniform grid over the segments keeps the pair scan near-linear.
        let max_len = self.max_element_length();
        let (mut lo, mut hi) = (self.verts[0], self.verts[0]);
        for v in &self.verts {
            lo = vec2(lo.x.min(v.x), lo.y.min(v.y));
            hi = vec2(hi.x.max(v.x), hi.y.max(v.y));
        }
        let cell = max_len.max(1e-300);
        let nx = (((hi.x - lo.x) / cell).ceil() as usize + 1).min(1024);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize + 1).min(1024);
        let cx = (hi.x - lo.x).max(1e-300) / nx as f64;
        let cy = (hi.y - lo.y).max(1e-300) / ny as f64;
        let mut cells: Vec<Vec<u32>> = vec![Vec::new(); nx * ny];
        let cell_range = |a: f64, lo: f64, c: f64, n: usize| -> usize {
            (((a - lo) / c).floor() as isize).clamp(0, n as isize - 1) as usize
        };
        for j in 0..n {
            let (a, b) = self.element(j);
            let (pa, pb) = (self.verts[a], self.verts[b]);
            let (i0, i1) = (
                cell_range(pa.x.min(pb.x), lo.x, cx, nx),
                cell_range(pa.x.max(pb.x), lo.x, cx, nx),
            );
            let (j0, j1) = (
                cell_range(pa.y.min(pb.y), lo.y, cy, ny),
                cell_range(pa.y.max(pb.y), lo.y, cy, ny),
            );
            for gy in j0..=j1 {
                for gx in i0..=i1 {
                    cells[gy * nx + gx].push(j as u32);
                }
            }
        }
        for bucket in &cells {
            for (s, &j1) in bucket.iter().enumerate() {
                for &j2 in &bucket[s + 1..] {
                    let (j1, j2) = (j1 as usize, j2 as usize);
                    let (a1, b1) = self.element(j1);
                    let (a2, b2) = self.element(j2);
                    if a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2 {
                        continue;
                    }
                    if segment_segment_dist2(
                        self.verts[a1],
                        self.verts[b1],
                        self.verts[a2],
                        self.verts[b2],
                    ) == 0.0
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Axis-aligned bounding box (min corner, max corner).
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = self.verts[0];
        let mut hi = self.verts[0];
        for v in &self.verts {
            lo = vec2(lo.x.min(v.x), lo.y.min(v.y));
            hi = vec2(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }
}

fn shoelace_twice(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum()
}

/// Two curves with identical connectivity, such as consecutive time steps
/// or a step and a fixed-point iterate.
pub struct CurvePair<'a> {
    pub old: &'a Curve,
    pub new: &'a Curve,
}

impl<'a> CurvePair<'a> {
    pub fn new(old: &'a Curve, new: &'a Curve) -> Result<Self> {
        if old.loops != new.loops {
            return Err(Error::Geometry(
                "curve pair with mismatched component structure".into(),
            ));
        }
        Ok(Self { old, new })
    }

    /// Time-averaged scaled element normal
    /// nu_j = (e_old + e_new).perp() / (2 |e_old|); not unit length.
    pub fn averaged_element_normal(&self, j: usize) -> Vec2 {
        let e_old = self.old.element_vector(j);
        let e_new = self.new.element_vector(j);
        let len = e_old.norm();
        assert!(len > 0.0, "degenerate old element {j}");
        (e_old + e_new).perp() * 0.5 / len
    }

    pub fn averaged_element_normals(&self) -> Vec<Vec2> {
        (0..self.old.element_count())
            .map(|j| self.averaged_element_normal(j))
            .collect()
    }

    /// Lumped projection of the averaged element normals onto the vertices
    /// of the old curve; reduces to `vertex_normals` for a stationary pair.
    pub fn averaged_vertex_normals(&self) -> Vec<Vec2> {
        self.old
            .mass_weighted_vertex_average(&self.averaged_element_normals())
    }

    /// Both sides of the exact volume-difference identity: the change of
    /// enclosed area equals the pairing of the displacement with the
    /// averaged normals over the old curve. The right side uses the
    /// trapezoid rule, exact for the linear integrand (matches two-point
    /// Gauss on each element).
    pub fn volume_difference_identity(&self) -> (f64, f64) {
        let lhs = self.new.enclosed_volume() - self.old.enclosed_volume();
        let nu = self.averaged_element_normals();
        let disp: Vec<Vec2> = self
            .new
            .positions()
            .iter()
            .zip(self.old.positions())
            .map(|(n, o)| *n - *o)
            .collect();
        let rhs = self.old.ip_element_vertex(&nu, &disp);
        (lhs, rhs)
    }
}

/// Averaged scaled normal of a moving triangle: the time integral of the
/// interpolated cross product divided by the old triangle's doubled area.
/// The integrand is quadratic in time, so Simpson's rule is exact.
pub fn averaged_normal_3d(old: [Vec3; 3], new: [Vec3; 3]) -> Vec3 {
    let e2m = old[1] - old[0];
    let e3m = old[2] - old[0];
    let e2p = new[1] - new[0];
    let e3p = new[2] - new[0];
    let wm = e2m.cross(e3m);
    let wp = e2p.cross(e3p);
    let area2 = wm.norm();
    assert!(area2 > 0.0, "degenerate old triangle");
    (wm + wp + (e2m + e2p).cross(e3m + e3p)) * (1.0 / (6.0 * area2))
}

/// Initial interface shapes.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeSpec {
    /// Origin-centered circle sampled at `k` equally spaced angles.
    Circle { radius: f64, k: usize },
    /// Two origin-centered circles bounding an annulus; `k` vertices total,
    /// split evenly between the loops.
    ConcentricPair { r_inner: f64, r_outer: f64, k: usize },
    /// Capsule of total dimension `length` by `width`, axis along x,
    /// sampled at `k` equal arclength steps.
    Stadium { length: f64, width: f64, k: usize },
    /// Nonconvex cross with chamfered arm tips; all twenty edges are
    /// parallel to the facets of a regular octagon. `k` vertices include
    /// the corners exactly, the rest spread over edges by length.
    OctagonStar { k: usize },
}

impl ShapeSpec {
    /// Builds the shape, checking it fits strictly inside (-h, h)^2.
    pub fn build(&self, half_width: f64) -> Result<Curve> {
        let curve = match *self {
            ShapeSpec::Circle { radius, k } => circle(radius, k)?,
            ShapeSpec::ConcentricPair { r_inner, r_outer, k } => {
                concentric_pair(r_inner, r_outer, k)?
            }
            ShapeSpec::Stadium { length, width, k } => stadium(length, width, k)?,
            ShapeSpec::OctagonStar { k } => octagon_star(k)?,
        };
        let (lo, hi) = curve.bounding_box();
        let r = lo.max_abs().max(hi.max_abs());
        if r >= half_width {
            return Err(Error::Config(format!(
                "shape of extent {r} does not fit inside the domain (-{half_width}, {half_width})^2"
            )));
        }
        Ok(curve)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::Config(format!(
            "vertex count {k} cannot close a loop"
        )));
    }
    Ok(())
}

fn circle_points(radius: f64, k: usize) -> Vec<Vec2> {
    // Clockwise so the constructor keeps the given vertex order.
    (0..k)
        .map(|i| {
            let th = -2.0 * std::f64::consts::PI * i as f64 / k as f64;
            vec2(radius * th.cos(), radius * th.sin())
        })
        .collect()
}

fn circle(radius: f64, k: usize) -> Result<Curve> {
    check_k(k)?;
    if radius <= 0.0 {
        return Err(Error::Config("circle radius must be positive".into()));
    }
    Curve::from_loops(vec![(circle_points(radius, k), false)])
}

fn concentric_pair(r_inner: f64, r_outer: f64, k: usize) -> Result<Curve> {
    check_k(k)?;
    if !(0.0 < r_inner && r_inner < r_outer) {
        return Err(Error::Config(
            "concentric pair needs 0 < r_inner < r_outer".into(),
        ));
    }
    if k % 2 != 0 {
        return Err(Error::Config(
            "concentric pair splits vertices evenly; use an even count".into(),
        ));
    }
    Curve::from_loops(vec![
        (circle_points(r_outer, k / 2), false),
        (circle_points(r_inner, k / 2), true),
    ])
}

fn stadium(length: f64, width: f64, k: usize) -> Result<Curve> {
    check_k(k)?;
    if !(width > 0.0 && length >= width) {
        return Err(Error::Config("stadium needs length >= width > 0".into()));
    }
    let rho = 0.5 * width;
    let c = 0.5 * (length - width);
    let straight = 2.0 * c;
    let cap = std::f64::consts::PI * rho;
    let per = 2.0 * straight + 2.0 * cap;
    // Clockwise walk: top edge, right cap, bottom edge, left cap.
    let point_at = |s: f64| -> Vec2 {
        if s < straight {
            vec2(-c + s, rho)
        } else if s < straight + cap {
            let a = std::f64::consts::FRAC_PI_2 - (s - straight) / rho;
            vec2(c + rho * a.cos(), rho * a.sin())
        } else if s < 2.0 * straight + cap {
            vec2(c - (s - straight - cap), -rho)
        } else {
            let a = -std::f64::consts::FRAC_PI_2 - (s - 2.0 * straight - cap) / rho;
            vec2(-c + rho * a.cos(), rho * a.sin())
        }
    };
    let pts = (0..k).map(|i| point_at(per * i as f64 / k as f64)).collect();
    Curve::from_loops(vec![(pts, false)])
}

/// Corner table of the cross-with-chamfers star: arm extent 3, arm
/// half-width 0.8, chamfer cut 0.5. Anticlockwise order.
fn star_corners() -> Vec<Vec2> {
    let (a, b, c) = (3.0, 0.8, 0.5);
    let mut pts = Vec::with_capacity(20);
    // One arm tip (right), then rotate by quarter turns.
    let arm = [
        vec2(a, -(b - c)),
        vec2(a, b - c),
        vec2(a - c, b),
        vec2(b, b),
        vec2(b, a - c),
    ];
    for quarter in 0..4 {
        for p in arm {
            let q = match quarter {
                0 => p,
                1 => vec2(-p.y, p.x),
                2 => vec2(-p.x, -p.y),
                _ => vec2(p.y, -p.x),
            };
            pts.push(q);
        }
    }
    pts
}

fn octagon_star(k: usize) -> Result<Curve> {
    let corners = star_corners();
    let nc = corners.len();
    if k < nc {
        return Err(Error::Config(format!(
            "octagon star needs at least {nc} vertices for its corners"
        )));
    }
    let lens: Vec<f64> = (0..nc)
        .map(|i| corners[i].dist(corners[(i + 1) % nc]))
        .collect();
    let total: f64 = lens.iter().sum();
    // Largest-remainder split of the k - nc interior vertices over edges.
    let extra = k - nc;
    let quota: Vec<f64> = lens.iter().map(|l| extra as f64 * l / total).collect();
    let mut counts: Vec<usize> = quota.iter().map(|q| q.floor() as usize).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (quota[i] - quota[i].floor(), quota[j] - quota[j].floor());
        rj.partial_cmp(&ri).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if assigned == extra {
            break;
        }
        counts[i] += 1;
        assigned += 1;
    }
    let mut pts = Vec::with_capacity(k);
    for i in 0..nc {
        let (p, q) = (corners[i], corners[(i + 1) % nc]);
        pts.push(p);
        let n = counts[i];
        for s in 1..=n {
            let t = s as f64 / (n + 1) as f64;
            pts.push(p + (q - p) * t);
        }
    }
    Curve::from_loops(vec![(pts, false)])
}
