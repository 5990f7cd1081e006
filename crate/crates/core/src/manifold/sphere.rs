//! Unit sphere in ambient coordinates.

use nalgebra::DVector;

use super::{sinc, REPROJECT_TOL};
use crate::error::{Error, Result};

pub(super) fn point_residual(x: &DVector<f64>) -> f64 {
    (x.norm() - 1.0).abs()
}

pub(super) fn tangent_residual(p: &DVector<f64>, v: &DVector<f64>) -> f64 {
    p.dot(v).abs()
}

pub(super) fn reproject(x: &DVector<f64>) -> Result<DVector<f64>> {
    let residual = point_residual(x);
    if residual > REPROJECT_TOL {
        return Err(Error::OffManifold { residual });
    }
    Ok(x / x.norm())
}

pub(super) fn project(p: &DVector<f64>, v: DVector<f64>) -> DVector<f64> {
    let c = p.dot(&v);
    v - p * c
}

pub(super) fn exp(p: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let n = v.norm();
    if n >= std::f64::consts::PI {
        return Err(Error::OutOfInjectivity {
            norm: n,
            limit: std::f64::consts::PI,
        });
    }
    let q = p * n.cos() + v * sinc(n);
    Ok(&q / q.norm())
}

/// Angle between unit vectors, stable at both ends of `[0, pi]`.
fn angle(p: &DVector<f64>, q: &DVector<f64>) -> (f64, DVector<f64>) {
    let c = p.dot(q);
    let u = q - p * c;
    (u.norm().atan2(c), u)
}

pub(super) fn log(p: &DVector<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
    let (theta, u) = angle(p, q);
    let un = u.norm();
    if un == 0.0 {
        if p.dot(q) > 0.0 {
            return Ok(DVector::zeros(p.len()));
        }
        return Err(Error::UndefinedLog);
    }
    if un < 1e-12 && p.dot(q) < 0.0 {
        return Err(Error::UndefinedLog);
    }
    Ok(u * (theta / un))
}

pub(super) fn distance(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    angle(p, q).0
}

pub(super) fn transport(
    p: &DVector<f64>,
    q: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    let denom = 1.0 + p.dot(q);
    if denom < 1e-12 {
        return Err(Error::UndefinedTransport);
    }
    let coef = q.dot(u) / denom;
    let out = u - (p + q) * coef;
    Ok(project(q, out))
}
