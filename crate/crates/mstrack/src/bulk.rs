//! Adaptive bulk triangulation of the square domain.
//!
//! The mesh starts from a two-triangles-per-square macro grid of
//! (-H, H)^2 and is refined by newest-vertex bisection until every element
//! near the interface has diameter h_f = 2H/N_f; conformity is kept by
//! recursive compatible bisection. Triangles are stored positively oriented
//! with the refinement edge between the first two vertices, so one bisection
//! level alternates between the two right-isosceles similarity classes and
//! the diameter at generation 2*log2(N_f/N_c) + 1 is exactly h_f.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geom::{segment_segment_dist2, vec2, Vec2};
use crate::linsolve::SparseMat;

const NONE: usize = usize::MAX;

/// Mesh construction parameters.
#[derive(Clone, Copy, Debug)]
pub struct MeshParams {
    /// Domain half-width H; the domain is (-H, H)^2.
    pub half_width: f64,
    /// Fine resolution: near-interface elements reach diameter 2H/n_fine.
    pub n_fine: u32,
    /// Coarse resolution: the macro grid is n_coarse x n_coarse squares.
    pub n_coarse: u32,
}

impl MeshParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0) {
            return Err(Error::Config("half_width must be positive".into()));
        }
        if self.n_coarse == 0 || !self.n_coarse.is_power_of_two() || !self.n_fine.is_power_of_two()
        {
            return Err(Error::Config(
                "n_fine and n_coarse must be powers of two".into(),
            ));
        }
        if self.n_coarse > self.n_fine {
            return Err(Error::Config("n_coarse must not exceed n_fine".into()));
        }
        Ok(())
    }

    pub fn h_fine(&self) -> f64 {
        2.0 * self.half_width / self.n_fine as f64
    }

    pub fn h_coarse(&self) -> f64 {
        2.0 * self.half_width / self.n_coarse as f64
    }
}

/// Conforming triangulation with point location support.
pub struct BulkMesh {
    verts: Vec<Vec2>,
    /// Vertex index triples, positively oriented; the refinement edge is
    /// (tri[0], tri[1]).
    tris: Vec<[usize; 3]>,
    /// Bisection generation per triangle.
    gen: Vec<u32>,
    /// nbr[t][i] is the triangle across edge (tri[i], tri[(i+1)%3]).
    nbr: Vec<[usize; 3]>,
    params: MeshParams,
    grid: LocGrid,
}

struct LocGrid {
    n: usize,
    lo: Vec2,
    cell: f64,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl BulkMesh {
    /// Builds the adaptive mesh for the given interface: all elements whose
    /// hull lies within half a fine-element of the curve are bisected to the
    /// fine generation; conformity closure grades the rest.
    pub fn build_adaptive(curve: &Curve, params: &MeshParams) -> Result<BulkMesh> {
        params.validate()?;
        let h = params.half_width;
        let (lo, hi) = curve.bounding_box();
        if lo.max_abs().max(hi.max_abs()) >= h {
            return Err(Error::Config(
                "curve touches or leaves the computational domain".into(),
            ));
        }

        let mut mesh = Self::macro_grid(params);
        let target_gen = 2 * (params.n_fine / params.n_coarse).ilog2() + 1;
        // Refined strip of one fine-element total width around the curve:
        // mark every triangle whose hull comes within h_f/2 of it.
        let band = 0.5 * params.h_fine();
        let seg_grid = SegGrid::new(curve, band);

        // Worklist refinement: seed with every near-curve macro triangle,
        // re-test the slots each bisection touches.
        let mut queue: Vec<usize> = (0..mesh.tris.len())
            .filter(|&t| mesh.gen[t] < target_gen && mesh.near_curve(t, curve, &seg_grid, band))
            .collect();
        let mut created = Vec::new();
        while let Some(t) = queue.pop() {
            if mesh.gen[t] >= target_gen || !mesh.near_curve(t, curve, &seg_grid, band) {
                continue;
            }
            created.clear();
            mesh.refine_compatible(t, 0, &mut created);
            for &c in &created {
                if mesh.gen[c] < target_gen && mesh.near_curve(c, curve, &seg_grid, band) {
                    queue.push(c);
                }
            }
        }

        mesh.grid = mesh.build_grid();
        Ok(mesh)
    }

    fn macro_grid(params: &MeshParams) -> BulkMesh {
        let n = params.n_coarse as usize;
        let h = params.half_width;
        let hc = params.h_coarse();
        let mut verts = Vec::with_capacity((n + 1) * (n + 1));
        for gy in 0..=n {
            for gx in 0..=n {
                verts.push(vec2(-h + hc * gx as f64, -h + hc * gy as f64));
            }
        }
        let vid = |gx: usize, gy: usize| gy * (n + 1) + gx;
        let mut tris = Vec::with_capacity(2 * n * n);
        let mut nbr = Vec::with_capacity(2 * n * n);
        // Square (gx, gy) holds triangles 2*(gy*n+gx) and +1, split along
        // the diagonal v00-v11, which is the refinement edge of both.
        for gy in 0..n {
            for gx in 0..n {
                let (v00, v10) = (vid(gx, gy), vid(gx + 1, gy));
                let (v01, v11) = (vid(gx, gy + 1), vid(gx + 1, gy + 1));
                let s = 2 * (gy * n + gx);
                // Lower triangle: (v11, v00, v10); upper: (v00, v11, v01).
                tris.push([v11, v00, v10]);
                tris.push([v00, v11, v01]);
                let below = if gy > 0 { 2 * ((gy - 1) * n + gx) + 1 } else { NONE };
                let above = if gy + 1 < n { 2 * ((gy + 1) * n + gx) } else { NONE };
                let left = if gx > 0 { 2 * (gy * n + gx - 1) } else { NONE };
                let right = if gx + 1 < n { 2 * (gy * n + gx + 1) + 1 } else { NONE };
                // Lower edges: (v11,v00) diag, (v00,v10) bottom, (v10,v11) right.
                nbr.push([s + 1, below, right]);
                // Upper edges: (v00,v11) diag, (v11,v01) top, (v01,v00) left.
                nbr.push([s, above, left]);
            }
        }
        BulkMesh {
            verts,
            tris,
            gen: vec![0; 2 * n * n],
            nbr,
            params: *params,
            grid: LocGrid {
                n: 0,
                lo: Vec2::ZERO,
                cell: 1.0,
                starts: Vec::new(),
                items: Vec::new(),
            },
        }
    }

    fn near_curve(&self, t: usize, curve: &Curve, grid: &SegGrid, band: f64) -> bool {
        let [a, b, c] = self.tris[t];
        let (pa, pb, pc) = (self.verts[a], self.verts[b], self.verts[c]);
        let lo = vec2(
            pa.x.min(pb.x).min(pc.x) - band,
            pa.y.min(pb.y).min(pc.y) - band,
        );
        let hi = vec2(
            pa.x.max(pb.x).max(pc.x) + band,
            pa.y.max(pb.y).max(pc.y) + band,
        );
        let band2 = band * band;
        let mut near = false;
        grid.for_candidates(lo, hi, |j| {
            if near {
                return;
            }
            let (s0, s1) = curve.element(j);
            let (q0, q1) = (curve.vertex(s0), curve.vertex(s1));
            if self.tri_contains(t, q0)
                || segment_segment_dist2(q0, q1, pa, pb) <= band2
                || segment_segment_dist2(q0, q1, pb, pc) <= band2
                || segment_segment_dist2(q0, q1, pc, pa) <= band2
            {
                near = true;
            }
        });
        near
    }

    fn tri_contains(&self, t: usize, p: Vec2) -> bool {
        let [a, b, c] = self.tris[t];
        let (pa, pb, pc) = (self.verts[a], self.verts[b], self.verts[c]);
        (pb - pa).cross(p - pa) >= 0.0
            && (pc - pb).cross(p - pb) >= 0.0
            && (pa - pc).cross(p - pc) >= 0.0
    }

    /// Bisects triangle `t`, recursively making the neighbor across the
    /// refinement edge compatible first. Touched slot ids are appended to
    /// `created`.
    fn refine_compatible(&mut self, t: usize, depth: u32, created: &mut Vec<usize>) {
        assert!(depth < 64, "compatible bisection recursion runaway");
        loop {
            let n = self.nbr[t][0];
            if n == NONE {
                self.bisect_lone(t, created);
                return;
            }
            let [a, b, _] = self.tris[t];
            let [na, nb, _] = self.tris[n];
            if na == b && nb == a {
                self.bisect_pair(t, n, created);
                return;
            }
            // Neighbor's refinement edge differs; refine it first. Its child
            // owning the shared edge then has that edge as refinement edge.
            self.refine_compatible(n, depth + 1, created);
        }
    }

    /// Replaces `t` by its first child and pushes the second; returns the
    /// new triangle's index. Children of (a, b, c) with midpoint m are
    /// (c, a, m) in place and (b, c, m) appended.
    fn bisect_lone(&mut self, t: usize, created: &mut Vec<usize>) {
        let [a, b, c] = self.tris[t];
        let m = self.edge_midpoint(a, b);
        let tb = self.tris.len();
        let [n_ab, n_bc, n_ca] = self.nbr[t];
        debug_assert_eq!(n_ab, NONE);
        self.tris[t] = [c, a, m];
        self.tris.push([b, c, m]);
        self.gen.push(self.gen[t] + 1);
        self.gen[t] += 1;
        self.nbr[t] = [n_ca, NONE, tb];
        self.nbr.push([n_bc, t, NONE]);
        self.redirect(n_bc, t, tb);
        created.push(t);
        created.push(tb);
    }

    /// Bisects the compatible pair (t, n) sharing the refinement edge.
    fn bisect_pair(&mut self, t: usize, n: usize, created: &mut Vec<usize>) {
        let [a, b, c] = self.tris[t];
        let d = self.tris[n][2];
        let m = self.edge_midpoint(a, b);
        let tb = self.tris.len();
        let nb = tb + 1;
        let [_, t_bc, t_ca] = self.nbr[t];
        let [_, n_ad, n_db] = self.nbr[n];
        // t = (a, b, c) -> (c, a, m) in place + (b, c, m) appended;
        // n = (b, a, d) -> (d, b, m) in place + (a, d, m) appended.
        self.tris[t] = [c, a, m];
        self.tris[n] = [d, b, m];
        self.tris.push([b, c, m]);
        self.tris.push([a, d, m]);
        self.gen.push(self.gen[t] + 1);
        self.gen.push(self.gen[n] + 1);
        self.gen[t] += 1;
        self.gen[n] += 1;
        self.nbr[t] = [t_ca, nb, tb];
        self.nbr[n] = [n_db, tb, nb];
        self.nbr.push([t_bc, t, n]);
        self.nbr.push([n_ad, n, t]);
        self.redirect(t_bc, t, tb);
        self.redirect(n_ad, n, nb);
        created.extend_from_slice(&[t, n, tb, nb]);
    }

    fn edge_midpoint(&mut self, a: usize, b: usize) -> usize {
        let mid = (self.verts[a] + self.verts[b]) * 0.5;
        self.verts.push(mid);
        self.verts.len() - 1
    }

    fn redirect(&mut self, who: usize, from: usize, to: usize) {
        if who == NONE {
            return;
        }
        for slot in self.nbr[who].iter_mut() {
            if *slot == from {
                *slot = to;
                return;
            }
        }
        panic!("neighbor link inconsistency at triangle {who}");
    }

    fn build_grid(&self) -> LocGrid {
        let h = self.params.half_width;
        // Cell size tracks the coarse grid but caps the cell count so huge
        // refinement ratios stay cheap to index.
        let n = (self.params.n_fine as usize).clamp(16, 512);
        let cell = 2.0 * h / n as f64;
        let lo = vec2(-h, -h);
        let mut counts = vec![0u32; n * n + 1];
        let range = |v: f64| -> usize {
            (((v + h) / cell).floor() as isize).clamp(0, n as isize - 1) as usize
        };
        let tri_cells = |tri: &[usize; 3]| {
            let (pa, pb, pc) = (self.verts[tri[0]], self.verts[tri[1]], self.verts[tri[2]]);
            let x0 = range(pa.x.min(pb.x).min(pc.x));
            let x1 = range(pa.x.max(pb.x).max(pc.x));
            let y0 = range(pa.y.min(pb.y).min(pc.y));
            let y1 = range(pa.y.max(pb.y).max(pc.y));
            (x0, x1, y0, y1)
        };
        for tri in &self.tris {
            let (x0, x1, y0, y1) = tri_cells(tri);
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    counts[gy * n + gx + 1] += 1;
                }
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; *starts.last().unwrap() as usize];
        for (t, tri) in self.tris.iter().enumerate() {
            let (x0, x1, y0, y1) = tri_cells(tri);
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    let c = gy * n + gx;
                    items[fill[c] as usize] = t as u32;
                    fill[c] += 1;
                }
            }
        }
        LocGrid {
            n,
            lo,
            cell,
            starts,
            items,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.tris
    }

    pub fn params(&self) -> &MeshParams {
        &self.params
    }

    pub fn triangle_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.tris[t];
        let (pa, pb, pc) = (self.verts[a], self.verts[b], self.verts[c]);
        pa.dist(pb).max(pb.dist(pc)).max(pc.dist(pa))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tris[t];
        0.5 * (self.verts[b] - self.verts[a]).cross(self.verts[c] - self.verts[a])
    }

    /// Locates `p`: the containing triangle and its barycentric coordinates.
    /// Points on shared edges resolve to the lowest triangle id.
    pub fn locate_point(&self, p: Vec2) -> Result<(usize, [f64; 3])> {
        const BARY_TOL: f64 = 1e-12;
        let h = self.params.half_width;
        if p.x.abs() > h || p.y.abs() > h {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
        let g = &self.grid;
        let gx = (((p.x - g.lo.x) / g.cell).floor() as isize).clamp(0, g.n as isize - 1) as usize;
        let gy = (((p.y - g.lo.y) / g.cell).floor() as isize).clamp(0, g.n as isize - 1) as usize;
        let c = gy * g.n + gx;
        let mut best: Option<(usize, [f64; 3])> = None;
        for &t in &g.items[g.starts[c] as usize..g.starts[c + 1] as usize] {
            let t = t as usize;
            if let Some(l) = self.barycentric(t, p, BARY_TOL) {
                match best {
                    Some((tb, _)) if tb <= t => {}
                    _ => best = Some((t, l)),
                }
            }
        }
        best.ok_or(Error::OutsideDomain { x: p.x, y: p.y })
    }

    /// Barycentric coordinates of `p` in triangle `t` if all are at least
    /// `-tol` (clamped into [0, 1] and renormalized).
    pub(crate) fn barycentric(&self, t: usize, p: Vec2, tol: f64) -> Option<[f64; 3]> {
        let [a, b, c] = self.tris[t];
        let (pa, pb, pc) = (self.verts[a], self.verts[b], self.verts[c]);
        let area2 = (pb - pa).cross(pc - pa);
        let l0 = (pb - p).cross(pc - p) / area2;
        let l1 = (pc - p).cross(pa - p) / area2;
        let l2 = 1.0 - l0 - l1;
        if l0 < -tol || l1 < -tol || l2 < -tol {
            return None;
        }
        let cl = [l0.clamp(0.0, 1.0), l1.clamp(0.0, 1.0), l2.clamp(0.0, 1.0)];
        let s = cl[0] + cl[1] + cl[2];
        Some([cl[0] / s, cl[1] / s, cl[2] / s])
    }

    /// Candidate triangles whose bounding boxes meet the query box.
    pub(crate) fn candidates_in_box(&self, lo: Vec2, hi: Vec2, mut f: impl FnMut(usize)) {
        let g = &self.grid;
        let cr = |v: f64| -> usize {
            (((v - g.lo.x) / g.cell).floor() as isize).clamp(0, g.n as isize - 1) as usize
        };
        let (x0, x1) = (cr(lo.x), cr(hi.x));
        let y0 = (((lo.y - g.lo.y) / g.cell).floor() as isize).clamp(0, g.n as isize - 1) as usize;
        let y1 = (((hi.y - g.lo.y) / g.cell).floor() as isize).clamp(0, g.n as isize - 1) as usize;
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                let c = gy * g.n + gx;
                for &t in &g.items[g.starts[c] as usize..g.starts[c + 1] as usize] {
                    f(t as usize);
                }
            }
        }
    }

    /// Standard piecewise-linear stiffness matrix; symmetric, zero row sums.
    pub fn stiffness_matrix(&self) -> SparseMat {
        let mut trips = Vec::with_capacity(9 * self.tris.len());
        for t in 0..self.tris.len() {
            let [a, b, c] = self.tris[t];
            let local = local_stiffness(self.verts[a], self.verts[b], self.verts[c]);
            let idx = [a, b, c];
            for (i, row) in local.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    trips.push((idx[i], idx[j], *v));
                }
            }
        }
        SparseMat::from_triplets(self.verts.len(), self.verts.len(), &trips)
    }

    /// Nodal interpolation of a function.
    pub fn interpolate(&self, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        self.verts.iter().map(|&v| f(v)).collect()
    }

    /// Evaluates a nodal field at a point by locating it first.
    pub fn eval(&self, field: &[f64], p: Vec2) -> Result<f64> {
        let (t, l) = self.locate_point(p)?;
        let [a, b, c] = self.tris[t];
        Ok(l[0] * field[a] + l[1] * field[b] + l[2] * field[c])
    }

    /// Exhaustive conformity audit: neighbor links reciprocal, every edge
    /// shared by at most two triangles with opposite orientation, boundary
    /// edges on the domain boundary, positive areas.
    pub fn conformity_check(&self) -> Result<()> {
        use std::collections::HashMap;
        let h = self.params.half_width;
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.tris.iter().enumerate() {
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Geometry(format!("triangle {t} not positive")));
            }
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edges.entry(key).or_default().push(t);
                // Neighbor reciprocity.
                let n = self.nbr[t][i];
                if n != NONE && !self.nbr[n].contains(&t) {
                    return Err(Error::Geometry(format!(
                        "neighbor link {t} -> {n} not reciprocal"
                    )));
                }
            }
        }
        for ((a, b), owners) in &edges {
            match owners.len() {
                1 => {
                    let (pa, pb) = (self.verts[*a], self.verts[*b]);
                    let on_bdy = |p: Vec2| p.x.abs() == h || p.y.abs() == h;
                    if !(on_bdy(pa) && on_bdy(pb)) {
                        return Err(Error::Geometry(format!(
                            "interior edge ({a}, {b}) with one owner (hanging node)"
                        )));
                    }
                }
                2 => {}
                n => {
                    return Err(Error::Geometry(format!(
                        "edge ({a}, {b}) shared by {n} triangles"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Generation (bisection level) of each triangle.
    pub fn generations(&self) -> &[u32] {
        &self.gen
    }
}

/// Local stiffness of one positively oriented triangle.
pub fn local_stiffness(pa: Vec2, pb: Vec2, pc: Vec2) -> [[f64; 3]; 3] {
    let area2 = (pb - pa).cross(pc - pa);
    // Opposite-edge vectors; gradients are their quarter turns / area2.
    let e = [pc - pb, pa - pc, pb - pa];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = e[i].dot(e[j]) / (2.0 * area2);
        }
    }
    k
}

/// Uniform grid over curve elements for distance queries during marking.
struct SegGrid {
    n: usize,
    lo: Vec2,
    inv_cell: f64,
    cells: Vec<Vec<u32>>,
}

impl SegGrid {
    fn new(curve: &Curve, band: f64) -> SegGrid {
        let (blo, bhi) = curve.bounding_box();
        let lo = blo - vec2(band, band);
        let hi = bhi + vec2(band, band);
        let cell = curve.max_element_length().max(band).max(1e-12);
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).clamp(1, 512);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).clamp(1, 512);
        let n = nx.max(ny);
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let cell = span / n as f64;
        let mut cells = vec![Vec::new(); n * n];
        let rg = |v: f64, l: f64| (((v - l) / cell).floor() as isize).clamp(0, n as isize - 1) as usize;
        for j in 0..curve.element_count() {
            let (a, b) = curve.element(j);
            let (pa, pb) = (curve.vertex(a), curve.vertex(b));
            let (x0, x1) = (rg(pa.x.min(pb.x), lo.x), rg(pa.x.max(pb.x), lo.x));
            let (y0, y1) = (rg(pa.y.min(pb.y), lo.y), rg(pa.y.max(pb.y), lo.y));
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    cells[gy * n + gx].push(j as u32);
                }
            }
        }
        SegGrid {
            n,
            lo,
            inv_cell: 1.0 / cell,
            cells,
        }
    }

    fn for_candidates(&self, lo: Vec2, hi: Vec2, mut f: impl FnMut(usize)) {
        let rg = |v: f64, l: f64| {
            (((v - l) * self.inv_cell).floor() as isize).clamp(0, self.n as isize - 1) as usize
        };
        let (x0, x1) = (rg(lo.x, self.lo.x), rg(hi.x, self.lo.x));
        let (y0, y1) = (rg(lo.y, self.lo.y), rg(hi.y, self.lo.y));
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                for &j in &self.cells[gy * self.n + gx] {
                    f(j as usize);
                }
            }
        }
    }
}
