//! Numerical checks of comparison-geometry inequalities on concrete triangles.
//!
//! Each check reports the slack `residual` (nonnegative when the inequality
//! holds) and the inequality's bound. Probes whose preconditions fail are
//! flagged `valid = false` and carry no assertion.

use std::f64::consts::PI;

use serde::Serialize;

use super::{sigma, zeta};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, Tangent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckReport {
    pub lhs: f64,
    pub bound: f64,
    pub residual: f64,
    pub valid: bool,
}

impl CheckReport {
    fn le(lhs: f64, bound: f64) -> Self {
        CheckReport {
            lhs,
            bound,
            residual: bound - lhs,
            valid: true,
        }
    }

    fn ge(lhs: f64, bound: f64) -> Self {
        CheckReport {
            lhs,
            bound,
            residual: lhs - bound,
            valid: true,
        }
    }

    pub fn invalid() -> Self {
        CheckReport {
            lhs: f64::NAN,
            bound: f64::NAN,
            residual: f64::NAN,
            valid: false,
        }
    }

    fn with_validity(mut self, valid: bool) -> Self {
        self.valid = valid;
        self
    }

    /// `true` for a valid probe whose residual is below `-tol`.
    pub fn fails(&self, tol: f64) -> bool {
        self.valid && !(self.residual >= -tol)
    }
}

/// Loop transport `x -> y -> z -> x` applied to `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolonomyProbe {
    pub x: Point,
    pub y: Point,
    pub z: Point,
    /// `||Gamma_z^x Gamma_y^z Gamma_x^y u - u||`.
    pub defect: f64,
    /// `36 K_m ||u|| min{d(x,y)+d(y,z), d(x,z)+d(y,z)} d(y,z)`.
    pub bound: f64,
    pub valid: bool,
}

impl HolonomyProbe {
    pub fn report(&self) -> CheckReport {
        CheckReport::le(self.defect, self.bound).with_validity(self.valid)
    }
}

pub fn holonomy_defect(m: &Manifold, x: &Point, y: &Point, z: &Point, u: &Tangent) -> Result<HolonomyProbe> {
    if !u.is_based_at(x) {
        return Err(Error::BaseMismatch);
    }
    let (kappa, k_upper) = m.curvature_bounds();
    let k_m = kappa.abs().max(k_upper.abs());
    let invalid = || HolonomyProbe {
        x: x.clone(),
        y: y.clone(),
        z: z.clone(),
        defect: f64::NAN,
        bound: f64::NAN,
        valid: false,
    };
    let loop_back = m
        .transport(u, y)
        .and_then(|w| m.transport(&w, z))
        .and_then(|w| m.transport(&w, x));
    let (Ok(back), Ok(dxy), Ok(dyz), Ok(dxz)) =
        (loop_back, m.distance(x, y), m.distance(y, z), m.distance(x, z))
    else {
        return Ok(invalid());
    };
    let defect = m.norm(&back.sub(u)?);
    let span = (dxy + dyz).min(dxz + dyz);
    let bound = 36.0 * k_m * m.norm(u) * span * dyz;
    let valid = k_m == 0.0 || span <= 1.0 / k_m.sqrt();
    Ok(HolonomyProbe {
        x: x.clone(),
        y: y.clone(),
        z: z.clone(),
        defect,
        bound,
        valid,
    })
}

/// Side lengths `a = d(y,z)`, `b = d(x,y)`, `c = d(x,z)` and `cos A` at vertex `x`.
struct Triangle {
    a: f64,
    b: f64,
    c: f64,
    cos_a: f64,
}

fn triangle(m: &Manifold, x: &Point, y: &Point, z: &Point) -> Result<Triangle> {
    let ly = m.log(x, y)?;
    let lz = m.log(x, z)?;
    let b = m.norm(&ly);
    let c = m.norm(&lz);
    let a = m.distance(y, z)?;
    let cos_a = if b > 0.0 && c > 0.0 {
        (m.inner(&ly, &lz)? / (b * c)).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    Ok(Triangle { a, b, c, cos_a })
}

/// `a^2 <= zeta(kappa, c) b^2 + c^2 - 2 b c cos A`, with `A` at `x` between
/// sides `b = d(x,y)` and `c = d(x,z)`.
pub fn cosine_law_lower_check(m: &Manifold, x: &Point, y: &Point, z: &Point) -> CheckReport {
    let (kappa, _) = m.curvature_bounds();
    let Ok(Triangle { a, b, c, cos_a }) = triangle(m, x, y, z) else {
        return CheckReport::invalid();
    };
    let rhs = zeta(kappa, c) * b * b + c * c - 2.0 * b * c * cos_a;
    CheckReport::le(a * a, rhs)
}

/// `a^2 >= sigma(K, b + min{a,c}) b^2 + c^2 - 2 b c cos A`, valid while
/// `b + min{a,c} < pi/sqrt(K)`.
pub fn cosine_law_upper_check(m: &Manifold, x: &Point, y: &Point, z: &Point) -> CheckReport {
    let (_, k_upper) = m.curvature_bounds();
    let Ok(Triangle { a, b, c, cos_a }) = triangle(m, x, y, z) else {
        return CheckReport::invalid();
    };
    let tau = b + a.min(c);
    if k_upper > 0.0 && tau >= PI / k_upper.sqrt() {
        return CheckReport::invalid();
    }
    let Ok(s) = sigma(k_upper, tau) else {
        return CheckReport::invalid();
    };
    let rhs = s * b * b + c * c - 2.0 * b * c * cos_a;
    CheckReport::ge(a * a, rhs)
}

/// The two transported-log comparisons, with `tau = d(x,z) + min{d(x,y), d(y,z)}`:
///
/// 1. `||log_x y - Gamma_z^x log_z y|| <= zeta(kappa, tau) d(x,z)`
/// 2. `||log_x y - Gamma_z^x log_z y - log_x z|| <= max{zeta - 1, 1 - sigma} d(x,z)`
pub fn hessian_comparison_check(m: &Manifold, x: &Point, y: &Point, z: &Point) -> [CheckReport; 2] {
    let invalid = [CheckReport::invalid(); 2];
    let (kappa, k_upper) = m.curvature_bounds();
    let eval = || -> Result<[CheckReport; 2]> {
        let dxz = m.distance(x, z)?;
        let tau = dxz + m.distance(x, y)?.min(m.distance(y, z)?);
        if k_upper > 0.0 && tau >= PI / k_upper.sqrt() {
            return Ok(invalid);
        }
        let zt = zeta(kappa, tau);
        let st = sigma(k_upper, tau)?;
        let lxy = m.log(x, y)?;
        let moved = m.transport(&m.log(z, y)?, x)?;
        let diff = lxy.sub(&moved)?;
        let first = CheckReport::le(m.norm(&diff), zt * dxz);
        let second_lhs = m.norm(&diff.sub(&m.log(x, z)?)?);
        let second = CheckReport::le(second_lhs, (zt - 1.0).max(1.0 - st) * dxz);
        Ok([first, second])
    };
    eval().unwrap_or(invalid)
}

/// `d(x,y) <= 2 ||log_z x - log_z y||` under the short-leg conditions.
pub fn distance_comparison_check(m: &Manifold, x: &Point, y: &Point, z: &Point) -> CheckReport {
    let (kappa, k_upper) = m.curvature_bounds();
    let eval = || -> Result<CheckReport> {
        let dxz = m.distance(x, z)?;
        let dyz = m.distance(y, z)?;
        let dxy = m.distance(x, y)?;
        let mut valid = true;
        if kappa < 0.0 && dxz.max(dyz) > 1.0 / (-kappa).sqrt() {
            valid = false;
        }
        if k_upper > 0.0 && dxy.max(dxz).max(dyz) >= PI / k_upper.sqrt() {
            valid = false;
        }
        let spread = m.norm(&m.log(z, x)?.sub(&m.log(z, y)?)?);
        Ok(CheckReport::le(dxy, 2.0 * spread).with_validity(valid))
    };
    eval().unwrap_or_else(|_| CheckReport::invalid())
}
