//! Curvature distortion constants, step-size rules, and validators for the
//! comparison inequalities the convergence analysis rests on.

mod bounds;
mod sos;
pub mod sweep;
mod validators;

pub use bounds::{
    jacobi_ratio, jacobi_s_lower, jacobi_s_upper, sigma, zeta, GeometryBounds,
};
pub use sos::{sos_certificate_check, sos_random_search, SosSearch, SosVerdict};
pub use validators::{
    cosine_law_lower_check, cosine_law_upper_check, distance_comparison_check,
    hessian_comparison_check, holonomy_defect, CheckReport, HolonomyProbe,
};

/// Tolerance on validator residuals over valid probes.
pub const RESIDUAL_TOL: f64 = 1e-9;
