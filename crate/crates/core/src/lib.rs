//! Riemannian variational-inequality toolkit.
//!
//! * [`manifold`]: exponential/log maps, parallel transport and distances on
//!   Euclidean space, the unit sphere, the hyperboloid, SPD matrices and products.
//! * [`geometry`]: curvature constants, step-size rules and numerical validators
//!   for comparison-geometry inequalities.
//! * [`problems`]: monotone vector fields, saddle objectives and their metrics.
//! * [`solvers`]: REG, RPEG, RCEG, ROGDA and RGDA with invariant instrumentation.
//! * [`harness`]: experiment grids, rate fitting and validator sweeps behind the CLI.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod manifold;
pub mod par;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use manifold::{Manifold, Point, Tangent};
pub use par::Execution;
