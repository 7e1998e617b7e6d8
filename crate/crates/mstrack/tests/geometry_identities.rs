//! Randomized checks of the exact geometric identities the time integrator
//! relies on: the volume-difference pairing, its stationary reductions, and
//! the averaged normal of a moving triangle in three dimensions.

use mstrack::curve::{averaged_normal_3d, Curve, CurvePair};
use mstrack::geom::{vec2, vec3, Vec2, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Star-shaped polygon around the origin with radii in [lo, hi].
fn random_star(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> Vec<Vec2> {
    (0..k)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            let r = rng.random_range(lo..hi);
            vec2(r * a.cos(), r * a.sin())
        })
        .collect()
}

fn random_curve(rng: &mut ChaCha8Rng) -> Curve {
    let k = rng.random_range(3..=40);
    let mut loops = vec![(random_star(rng, k, 0.5, 2.0), false)];
    if rng.random_bool(0.5) {
        // A hole strictly inside the outer loop's inradius.
        let kh = rng.random_range(3..=20);
        loops.push((random_star(rng, kh, 0.1, 0.4), true));
    }
    Curve::from_loops(loops).unwrap()
}

fn displaced(rng: &mut ChaCha8Rng, curve: &Curve, amp: f64) -> Curve {
    let pos = curve
        .positions()
        .iter()
        .map(|p| *p + vec2(rng.random_range(-amp..amp), rng.random_range(-amp..amp)))
        .collect();
    curve.with_positions(pos).unwrap()
}

#[test]
fn volume_difference_identity_on_random_pairs() {
    const REL_TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..1000 {
        let old = random_curve(&mut rng);
        let new = displaced(&mut rng, &old, 0.3);
        let (lhs, rhs) = CurvePair::new(&old, &new).unwrap().volume_difference_identity();
        let scale = old
            .enclosed_volume()
            .abs()
            .max(new.enclosed_volume().abs());
        assert!(
            (lhs - rhs).abs() <= REL_TOL * scale,
            "trial {trial}: lhs {lhs} vs rhs {rhs} at scale {scale}"
        );
    }
}

#[test]
fn stationary_pair_reduces_to_plain_normals() {
    const TOL: f64 = 1e-13;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let curve = random_curve(&mut rng);
        let pair = CurvePair::new(&curve, &curve).unwrap();
        let avg_elem = pair.averaged_element_normals();
        for (j, nu) in avg_elem.iter().enumerate() {
            assert!((*nu - curve.element_normal(j)).max_abs() <= TOL);
        }
        let avg_vert = pair.averaged_vertex_normals();
        let omega = curve.vertex_normals();
        for (a, b) in avg_vert.iter().zip(&omega) {
            assert!((*a - *b).max_abs() <= TOL);
        }
    }
}

fn random_vec3(rng: &mut ChaCha8Rng, amp: f64) -> Vec3 {
    vec3(
        rng.random_range(-amp..amp),
        rng.random_range(-amp..amp),
        rng.random_range(-amp..amp),
    )
}

/// Scaled normal 2A(t) n(t) of the linearly interpolated triangle.
fn moving_cross(old: &[Vec3; 3], new: &[Vec3; 3], t: f64) -> Vec3 {
    let at = |i: usize| old[i] + (new[i] - old[i]) * t;
    (at(1) - at(0)).cross(at(2) - at(0))
}

#[test]
fn averaged_normal_3d_matches_gauss_quadrature() {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    // Three-point Gauss-Legendre on [0,1]: exact for the quadratic integrand.
    let s = (0.6f64).sqrt() * 0.5;
    let nodes = [0.5 - s, 0.5, 0.5 + s];
    let weights = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let mut accepted = 0;
    for _ in 0..10_000 {
        if accepted == 200 {
            break;
        }
        let old = [
            random_vec3(&mut rng, 1.0),
            random_vec3(&mut rng, 1.0),
            random_vec3(&mut rng, 1.0),
        ];
        let w_old = moving_cross(&old, &old, 0.0);
        if w_old.norm() < 0.5 {
            continue;
        }
        accepted += 1;
        let new = [
            old[0] + random_vec3(&mut rng, 0.5),
            old[1] + random_vec3(&mut rng, 0.5),
            old[2] + random_vec3(&mut rng, 0.5),
        ];
        let mut integral = vec3(0.0, 0.0, 0.0);
        for (t, w) in nodes.iter().zip(weights) {
            integral = integral + moving_cross(&old, &new, *t) * w;
        }
        let oracle = integral * (1.0 / w_old.norm());
        let got = averaged_normal_3d(old, new);
        assert!(
            (got - oracle).norm() <= TOL * oracle.norm().max(1.0),
            "kernel {got:?} vs quadrature {oracle:?}"
        );
    }
    assert_eq!(accepted, 200, "not enough nondegenerate samples");
}
