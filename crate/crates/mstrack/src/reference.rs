//! Exact concentric-circles solution for convergence testing.
//!
//! For an annular region between radii r1 < r2 the flow reduces to a scalar
//! ODE for r1, with r2 recovered from the conserved volume. Radii are
//! computed to high accuracy by root-finding on the time integral of the
//! reciprocal ODE rather than by time stepping, and the bulk potential is a
//! closed-form radial profile.

use crate::bulk::BulkMesh;
use crate::curve::Curve;
use crate::error::{Error, Result};

/// Absolute quadrature tolerance used for the time integrals.
const QUAD_TOL: f64 = 1e-12;
/// Absolute accuracy of the recovered radii.
const ROOT_TOL: f64 = 1e-11;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Exact shrinking-annulus solution in dimension d = 2 or 3.
#[derive(Clone, Copy, Debug)]
pub struct AnnulusExact {
    r1_0: f64,
    r2_0: f64,
    d: u32,
    v0: f64,
}

impl AnnulusExact {
    pub fn new(r1_0: f64, r2_0: f64, d: u32) -> Result<AnnulusExact> {
        if !(0.0 < r1_0 && r1_0 < r2_0) {
            return Err(Error::Config(format!(
                "need 0 < r1 < r2, got ({r1_0}, {r2_0})"
            )));
        }
        if d != 2 && d != 3 {
            return Err(Error::Config(format!("dimension {d} not supported")));
        }
        let v0 = r2_0.powi(d as i32) - r1_0.powi(d as i32);
        Ok(AnnulusExact { r1_0, r2_0, d, v0 })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Initial radii (r1(0), r2(0)).
    pub fn initial_radii(&self) -> (f64, f64) {
        (self.r1_0, self.r2_0)
    }

    /// dt/d(r1) with the sign flipped: time spent per unit decrease of r1.
    fn time_density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self.d {
            2 => {
                let r2 = (self.v0 + r * r).sqrt();
                r * (r2 / r).ln() / (1.0 / r + 1.0 / r2)
            }
            _ => {
                let r2 = (self.v0 + r * r * r).cbrt();
                0.5 * r * r * (r2 - r) / (r + r2)
            }
        }
    }

    /// Time at which r1 reaches the given radius.
    fn time_of_r1(&self, r1: f64) -> f64 {
        adaptive_simpson(&|r| self.time_density(r), r1, self.r1_0, QUAD_TOL)
    }

    /// Extinction time of the inner circle.
    pub fn extinction_time(&self) -> f64 {
        self.time_of_r1(0.0)
    }

    /// Inner radius at time t, from the integral equation.
    pub fn r1_at(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        if t == 0.0 {
            return Ok(self.r1_0);
        }
        let t0 = self.extinction_time();
        if t >= t0 {
            return Err(Error::Domain(format!(
                "time {t} at or past the extinction time {t0}"
            )));
        }
        // f(ρ) = time_of_r1(ρ) − t is decreasing in ρ with a sign change in
        // (0, r1_0); bisect, then polish with a secant step loop.
        let (mut lo, mut hi) = (0.0, self.r1_0); // f(lo) > 0 > f(hi)
        let f = |rho: f64| self.time_of_r1(rho) - t;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (mut x0, mut x1) = (lo, hi);
        let (mut f0, mut f1) = (f(x0), f(x1));
        for _ in 0..20 {
            if (x1 - x0).abs() <= ROOT_TOL || f1 == f0 {
                break;
            }
            let mut x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if !(lo..=hi).contains(&x2) {
                x2 = 0.5 * (lo + hi);
            }
            let f2 = f(x2);
            if f2 > 0.0 {
                lo = x2;
            } else {
                hi = x2;
            }
            (x0, f0) = (x1, f1);
            (x1, f1) = (x2, f2);
        }
        Ok(x1)
    }

    /// Outer radius reconstructed from the conserved volume.
    pub fn r2_of_r1(&self, r1: f64) -> f64 {
        match self.d {
            2 => (self.v0 + r1 * r1).sqrt(),
            _ => (self.v0 + r1 * r1 * r1).cbrt(),
        }
    }

    /// Both radii at time t.
    pub fn radii_at(&self, t: f64) -> Result<(f64, f64)> {
        let r1 = self.r1_at(t)?;
        Ok((r1, self.r2_of_r1(r1)))
    }

    pub fn r2_at(&self, t: f64) -> Result<f64> {
        Ok(self.radii_at(t)?.1)
    }

    /// Radial potential profile at distance `znorm` from the origin, given
    /// the radii: u = (d−1)/r1 inside, −(d−1)/r2 outside, and the harmonic
    /// interpolant between.
    pub fn u_value(&self, znorm: f64, r1: f64, r2: f64) -> f64 {
        let dm1 = (self.d - 1) as f64;
        if znorm <= r1 {
            return dm1 / r1;
        }
        if znorm >= r2 {
            return -dm1 / r2;
        }
        match self.d {
            2 => 1.0 / r1 - (znorm / r1).ln() * (1.0 / r1 + 1.0 / r2) / (r2 / r1).ln(),
            _ => -4.0 / (r2 - r1) + (2.0 / znorm) * (r1 + r2) / (r2 - r1),
        }
    }

    /// d = 2 convenience constructor for the standard test radii.
    pub fn planar(r1_0: f64, r2_0: f64) -> Result<AnnulusExact> {
        AnnulusExact::new(r1_0, r2_0, 2)
    }
}

/// Distance from a point to the union of the two concentric circles.
pub fn circles_distance(znorm: f64, r1: f64, r2: f64) -> f64 {
    (znorm - r1).abs().min((znorm - r2).abs())
}

/// Max over curve vertices of the distance to the exact interface.
pub fn curve_error_at(curve: &Curve, r1: f64, r2: f64) -> f64 {
    (0..curve.vertex_count())
        .map(|k| circles_distance(curve.vertex(k).norm(), r1, r2))
        .fold(0.0, f64::max)
}

/// Max over bulk mesh nodes of |U − exact profile|.
pub fn bulk_error_at(mesh: &BulkMesh, u: &[f64], exact: &AnnulusExact, r1: f64, r2: f64) -> f64 {
    assert_eq!(u.len(), mesh.vertex_count());
    mesh.vertices()
        .iter()
        .zip(u)
        .map(|(p, uh)| (uh - exact.u_value(p.norm(), r1, r2)).abs())
        .fold(0.0, f64::max)
}
