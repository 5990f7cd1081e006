//! Hyperboloid model: `<x, x>_L = -1`, `x_0 > 0`.

use nalgebra::DVector;

use super::{sinhc, REPROJECT_TOL};
use crate::error::{Error, Result};

/// Minkowski form `-x_0 y_0 + sum_i x_i y_i`.
pub(crate) fn minkowski(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    x.dot(y) - 2.0 * x[0] * y[0]
}

pub(super) fn point_residual(x: &DVector<f64>) -> f64 {
    let r = (minkowski(x, x) + 1.0).abs();
    if x[0] > 0.0 {
        r
    } else {
        f64::INFINITY
    }
}

pub(super) fn tangent_residual(p: &DVector<f64>, v: &DVector<f64>) -> f64 {
    minkowski(p, v).abs()
}

fn lift(x: &DVector<f64>) -> DVector<f64> {
    let mut out = x.clone();
    let spatial: f64 = x.iter().skip(1).map(|c| c * c).sum();
    out[0] = (1.0 + spatial).sqrt();
    out
}

pub(super) fn reproject(x: &DVector<f64>) -> Result<DVector<f64>> {
    let residual = point_residual(x);
    if residual > REPROJECT_TOL {
        return Err(Error::OffManifold { residual });
    }
    Ok(lift(x))
}

pub(super) fn project(p: &DVector<f64>, v: DVector<f64>) -> DVector<f64> {
    let c = minkowski(p, &v);
    v + p * c
}

pub(super) fn exp(p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = minkowski(v, v).max(0.0).sqrt();
    lift(&(p * n.cosh() + v * sinhc(n)))
}

/// Returns `(d, u)` with `u = q - cosh(d) p`, the unnormalized log direction.
fn chord(p: &DVector<f64>, q: &DVector<f64>) -> (f64, DVector<f64>) {
    let w = q - p;
    let c2 = minkowski(&w, &w).max(0.0);
    let d = 2.0 * (c2.sqrt() / 2.0).asinh();
    // cosh(d) - 1 = c2 / 2
    let u = w - p * (0.5 * c2);
    (d, u)
}

pub(super) fn log(p: &DVector<f64>, q: &DVector<f64>) -> DVector<f64> {
    let (d, u) = chord(p, q);
    let un = minkowski(&u, &u).max(0.0).sqrt();
    if d == 0.0 || un == 0.0 {
        return DVector::zeros(p.len());
    }
    project(p, u * (d / un))
}

pub(super) fn distance(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    chord(p, q).0
}

pub(super) fn transport(p: &DVector<f64>, q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    let coef = minkowski(q, u) / (1.0 - minkowski(p, q));
    project(q, u + (p + q) * coef)
}
