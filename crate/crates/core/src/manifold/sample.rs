//! Random points and tangent vectors for probes, problem data and tests.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Manifold, Point, Tangent};

/// Standard normal ambient vector projected onto `T_p`.
pub fn gaussian_tangent<R: Rng + ?Sized>(m: &Manifold, p: &Point, rng: &mut R) -> Tangent {
    let raw = DVector::from_fn(m.ambient_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    m.project(p, raw)
}

/// Uniformly oriented tangent of unit Riemannian norm.
pub fn unit_tangent<R: Rng + ?Sized>(m: &Manifold, p: &Point, rng: &mut R) -> Tangent {
    loop {
        let g = gaussian_tangent(m, p, rng);
        let n = m.norm(&g);
        if n > 1e-12 {
            return g.scale(1.0 / n);
        }
    }
}

/// Tangent with norm drawn uniformly from the ball of radius `radius`
/// (volume-uniform in the tangent space).
pub fn tangent_in_ball<R: Rng + ?Sized>(
    m: &Manifold,
    p: &Point,
    radius: f64,
    rng: &mut R,
) -> Tangent {
    let dim = m.intrinsic_dim().max(1) as f64;
    let r = radius * rng.random::<f64>().powf(1.0 / dim);
    unit_tangent(m, p, rng).scale(r)
}

/// `Exp_center(v)` with `v` uniform in the tangent ball of radius `radius`.
///
/// Panics if `radius` reaches the injectivity radius; callers keep it below.
pub fn point_in_ball<R: Rng + ?Sized>(
    m: &Manifold,
    center: &Point,
    radius: f64,
    rng: &mut R,
) -> Point {
    let v = tangent_in_ball(m, center, radius, rng);
    m.exp(center, &v).expect("sampling radius inside injectivity radius")
}

/// Point at exactly distance `r` from `center` in a random direction.
pub fn point_at_distance<R: Rng + ?Sized>(
    m: &Manifold,
    center: &Point,
    r: f64,
    rng: &mut R,
) -> Point {
    let v = unit_tangent(m, center, rng).scale(r);
    m.exp(center, &v).expect("distance inside injectivity radius")
}
