use serde::Serialize;

use super::SaddleObjective;
use crate::error::Result;
use crate::manifold::{Manifold, Point, Tangent};

/// Inner solver stops once successive iterates move less than this.
pub const GAP_TOL: f64 = 1e-6;
pub const GAP_MAX_STEPS: usize = 10_000;

/// `||grad_x f||^2 + ||grad_y f||^2` at `z = (x, y)`.
pub fn hamiltonian(f: &SaddleObjective, z: &Point) -> Result<f64> {
    let (x, y) = f.split(z)?;
    let gx = f.grad_x(&x, &y)?;
    let gy = f.grad_y(&x, &y)?;
    Ok(f.manifold_x.inner(&gx, &gx)? + f.manifold_y.inner(&gy, &gy)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapEstimate {
    pub value: f64,
    /// An inner solve hit the step limit before converging.
    pub approximate: bool,
    /// `z` lies outside the product of the two balls.
    pub outside: bool,
}

/// `max_{y' in Y} f(x, y') - min_{x' in X} f(x', y)` over geodesic balls of
/// radius `radius` about `center = (x*, y*)`.
///
/// Each inner problem runs projected Riemannian gradient steps of size
/// `1 / (10 lipschitz)`, projecting by clamping the log vector from the ball
/// center. The search starts from the best of the ball center, the boundary
/// point along the center gradient, and the clamped query coordinate.
pub fn duality_gap(
    f: &SaddleObjective,
    z: &Point,
    center: (&Point, &Point),
    radius: f64,
    lipschitz: f64,
) -> Result<GapEstimate> {
    let (x, y) = f.split(z)?;
    let step = 1.0 / (10.0 * lipschitz);
    let (max_y, conv_y) = ball_maximize(
        &f.manifold_y,
        center.1,
        radius,
        step,
        &y,
        &|q| f.value(&x, q),
        &|q| f.grad_y(&x, q),
    )?;
    let (neg_min_x, conv_x) = ball_maximize(
        &f.manifold_x,
        center.0,
        radius,
        step,
        &x,
        &|q| -f.value(q, &y),
        &|q| Ok(f.grad_x(q, &y)?.neg()),
    )?;
    let outside = f.manifold_x.distance(&x, center.0)? > radius * (1.0 + 1e-12)
        || f.manifold_y.distance(&y, center.1)? > radius * (1.0 + 1e-12);
    Ok(GapEstimate {
        value: max_y + neg_min_x,
        approximate: !(conv_x && conv_y),
        outside,
    })
}

fn clamp_to_ball(m: &Manifold, center: &Point, radius: f64, q: &Point) -> Result<Point> {
    let v = m.log(center, q)?;
    let n = m.norm(&v);
    if n <= radius {
        Ok(q.clone())
    } else {
        m.exp(center, &v.scale(radius / n))
    }
}

/// Best value found and whether the iteration converged.
fn ball_maximize(
    m: &Manifold,
    center: &Point,
    radius: f64,
    step: f64,
    hint: &Point,
    value: &dyn Fn(&Point) -> f64,
    grad: &dyn Fn(&Point) -> Result<Tangent>,
) -> Result<(f64, bool)> {
    let mut candidates = vec![center.clone(), clamp_to_ball(m, center, radius, hint)?];
    let g0 = grad(center)?;
    let n0 = m.norm(&g0);
    if n0 > 0.0 {
        candidates.push(m.exp(center, &g0.scale(radius / n0))?);
    }
    let mut p = candidates
        .into_iter()
        .map(|c| (value(&c), c))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
        .expect("nonempty");
    let mut best = value(&p);
    for _ in 0..GAP_MAX_STEPS {
        let g = grad(&p)?;
        let next = clamp_to_ball(m, center, radius, &m.exp(&p, &g.scale(step))?)?;
        let moved = m.distance(&p, &next)?;
        p = next;
        best = best.max(value(&p));
        if moved < GAP_TOL {
            return Ok((best, true));
        }
    }
    Ok((best, false))
}
