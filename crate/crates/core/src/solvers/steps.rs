use crate::error::Result;
use crate::manifold::{Point, Tangent};
use crate::problems::VectorFieldProblem;

/// Half-iterate, next iterate and the field evaluated at the half-iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub z_half: Point,
    pub z_next: Point,
    pub field_half: Tangent,
}

/// `z~ = Exp_z(-eta F(z))`, `z+ = Exp_z(-eta Gamma_{z~}^z F(z~))`.
///
/// `field_z` must be `F(z)`.
pub fn reg_step(prob: &VectorFieldProblem, z: &Point, field_z: &Tangent, eta: f64) -> Result<Step> {
    let m = &prob.manifold;
    let z_half = m.exp(z, &field_z.scale(-eta))?;
    let field_half = prob.field(&z_half)?;
    let back = m.transport(&field_half, z)?;
    let z_next = m.exp(z, &back.scale(-eta))?;
    Ok(Step { z_half, z_next, field_half })
}

/// `z~_t = Exp_{z_t}(-eta Gamma F(z~_{t-1}))`, `z_{t+1} = Exp_{z_t}(-eta Gamma F(z~_t))`.
///
/// `prev_half_field` is the cached `F(z~_{t-1})`, based at `z~_{t-1}`; the
/// only fresh evaluation is `F(z~_t)`.
pub fn rpeg_step(prob: &VectorFieldProblem, z: &Point, prev_half_field: &Tangent, eta: f64) -> Result<Step> {
    let m = &prob.manifold;
    let carried = m.transport(prev_half_field, z)?;
    let z_half = m.exp(z, &carried.scale(-eta))?;
    let field_half = prob.field(&z_half)?;
    let back = m.transport(&field_half, z)?;
    let z_next = m.exp(z, &back.scale(-eta))?;
    Ok(Step { z_half, z_next, field_half })
}

/// `z~ = Exp_z(-eta F(z))`, `z+ = Exp_{z~}(-eta F(z~) + Exp_{z~}^{-1} z)`.
pub fn rceg_step(prob: &VectorFieldProblem, z: &Point, field_z: &Tangent, eta: f64) -> Result<Step> {
    let m = &prob.manifold;
    let z_half = m.exp(z, &field_z.scale(-eta))?;
    let field_half = prob.field(&z_half)?;
    let dir = field_half.combine(-eta, &m.log(&z_half, z)?, 1.0)?;
    let z_next = m.exp(&z_half, &dir)?;
    Ok(Step { z_half, z_next, field_half })
}

/// `z~_{t+1} = Exp_{z~_t}(-2 eta F(z~_t) + eta Gamma F(z~_{t-1}))`.
pub fn rogda_step(
    prob: &VectorFieldProblem,
    z_half: &Point,
    field_half: &Tangent,
    prev_half_field: &Tangent,
    eta: f64,
) -> Result<Point> {
    let m = &prob.manifold;
    let carried = m.transport(prev_half_field, z_half)?;
    let dir = field_half.combine(-2.0 * eta, &carried, eta)?;
    m.exp(z_half, &dir)
}

/// `z+ = Exp_z(-eta F(z))`.
pub fn rgda_step(prob: &VectorFieldProblem, z: &Point, field_z: &Tangent, eta: f64) -> Result<Point> {
    prob.manifold.exp(z, &field_z.scale(-eta))
}
