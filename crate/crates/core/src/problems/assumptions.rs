use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VectorFieldProblem;
use crate::manifold::sample::point_in_ball;
use crate::par::{map_range, Execution};

/// Monotonicity inner products below `-MONOTONE_TOL` count as violations.
pub const MONOTONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `min <Gamma F(z') - F(z), log_z z'>` over sampled pairs.
    pub min_monotone_inner: f64,
    /// `max ||F(z) - Gamma F(z')|| / d(z, z')`.
    pub lipschitz_estimate: f64,
    pub grad_norm_max: f64,
    pub samples: usize,
    pub violations: usize,
}

struct PairStats {
    inner: f64,
    ratio: f64,
    norm: f64,
}

/// Samples `n` pairs in the ball of radius `6D/5` about the solution and
/// estimates monotonicity, Lipschitz and norm constants of the field.
///
/// Odd-indexed pairs are drawn close together so the Lipschitz estimate sees
/// the local slope as well as the secant slope.
pub fn check_assumptions(
    prob: &VectorFieldProblem,
    n: usize,
    seed: u64,
    exec: Execution,
) -> AssumptionReport {
    let m = &prob.manifold;
    let center = prob.center();
    let radius = 1.2 * prob.region_radius;
    let stats = map_range(exec, n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let z = point_in_ball(m, &center, radius, &mut rng);
        let mut w = point_in_ball(m, &center, radius, &mut rng);
        if i % 2 == 1 {
            for _ in 0..16 {
                let near = point_in_ball(m, &z, 0.05 * radius * rng.random::<f64>(), &mut rng);
                if m.distance(&near, &center).is_ok_and(|d| d <= radius) {
                    w = near;
                    break;
                }
            }
        }
        pair_stats(prob, &z, &w)
    });
    let mut report = AssumptionReport {
        min_monotone_inner: f64::INFINITY,
        lipschitz_estimate: 0.0,
        grad_norm_max: 0.0,
        samples: n,
        violations: 0,
    };
    for s in stats.into_iter().flatten() {
        report.min_monotone_inner = report.min_monotone_inner.min(s.inner);
        report.lipschitz_estimate = report.lipschitz_estimate.max(s.ratio);
        report.grad_norm_max = report.grad_norm_max.max(s.norm);
        if s.inner < -MONOTONE_TOL {
            report.violations += 1;
        }
    }
    if n == 0 {
        report.min_monotone_inner = 0.0;
    }
    report
}

fn pair_stats(
    prob: &VectorFieldProblem,
    z: &crate::manifold::Point,
    w: &crate::manifold::Point,
) -> Option<PairStats> {
    let m = &prob.manifold;
    let fz = prob.field(z).ok()?;
    let fw = prob.field(w).ok()?;
    let moved = m.transport(&fw, z).ok()?;
    let diff = moved.sub(&fz).ok()?;
    let inner = m.inner(&diff, &m.log(z, w).ok()?).ok()?;
    let d = m.distance(z, w).ok()?;
    let ratio = if d > 1e-12 { m.norm(&diff) / d } else { 0.0 };
    Some(PairStats {
        inner,
        ratio,
        norm: m.norm(&fz).max(m.norm(&fw)),
    })
}
