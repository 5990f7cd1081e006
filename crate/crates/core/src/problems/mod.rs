//! Vector-field problems, saddle objectives and the metrics reported on them.

mod assumptions;
mod catalog;
mod gap;

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::GeometryBounds;
use crate::manifold::sample::point_at_distance;
use crate::manifold::{Manifold, Point, Tangent};
use crate::par::Execution;

pub use assumptions::{check_assumptions, AssumptionReport, MONOTONE_TOL};
pub use catalog::{make_problem, DataSpec, ProblemSpec, PROBLEM_NAMES};
pub use gap::{duality_gap, hamiltonian, GapEstimate, GAP_MAX_STEPS, GAP_TOL};

pub type FieldFn = Arc<dyn Fn(&Point) -> Result<Tangent> + Send + Sync>;
type ValueFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point, &Point) -> Result<Tangent> + Send + Sync>;

/// A convex-concave `f(x, y)` with its Riemannian partial gradients.
#[derive(Clone)]
pub struct SaddleObjective {
    pub manifold_x: Manifold,
    pub manifold_y: Manifold,
    value: ValueFn,
    grad_x: GradFn,
    grad_y: GradFn,
}

impl SaddleObjective {
    pub fn new(
        manifold_x: Manifold,
        manifold_y: Manifold,
        value: impl Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
        grad_x: impl Fn(&Point, &Point) -> Result<Tangent> + Send + Sync + 'static,
        grad_y: impl Fn(&Point, &Point) -> Result<Tangent> + Send + Sync + 'static,
    ) -> Self {
        SaddleObjective {
            manifold_x,
            manifold_y,
            value: Arc::new(value),
            grad_x: Arc::new(grad_x),
            grad_y: Arc::new(grad_y),
        }
    }

    pub fn value(&self, x: &Point, y: &Point) -> f64 {
        (self.value)(x, y)
    }

    /// Riemannian gradient in `x`, a tangent at `x`.
    pub fn grad_x(&self, x: &Point, y: &Point) -> Result<Tangent> {
        (self.grad_x)(x, y)
    }

    /// Riemannian gradient in `y`, a tangent at `y`.
    pub fn grad_y(&self, x: &Point, y: &Point) -> Result<Tangent> {
        (self.grad_y)(x, y)
    }

    /// The product `M_x x M_y` the induced field lives on.
    pub fn manifold(&self) -> Manifold {
        Manifold::product(vec![self.manifold_x.clone(), self.manifold_y.clone()])
    }

    pub fn split(&self, z: &Point) -> Result<(Point, Point)> {
        let mut parts = self.manifold().split_point(z)?;
        let y = parts.pop().expect("two factors");
        let x = parts.pop().expect("two factors");
        Ok((x, y))
    }

    /// `F(z) = (grad_x f, -grad_y f)`.
    pub fn field(&self, z: &Point) -> Result<Tangent> {
        let (x, y) = self.split(z)?;
        let gx = self.grad_x(&x, &y)?;
        let gy = self.grad_y(&x, &y)?;
        self.manifold().join_tangents(&[gx, gy.neg()])
    }
}

impl fmt::Debug for SaddleObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SaddleObjective")
            .field("manifold_x", &self.manifold_x)
            .field("manifold_y", &self.manifold_y)
            .finish_non_exhaustive()
    }
}

/// Find `z*` with `F(z*) = 0` on `manifold`.
#[derive(Clone)]
pub struct VectorFieldProblem {
    pub name: String,
    pub manifold: Manifold,
    field: FieldFn,
    pub solution: Option<Point>,
    pub objective: Option<SaddleObjective>,
    /// Bound `D` on the initial distance to the solution.
    pub region_radius: f64,
    pub declared_l: Option<f64>,
    pub declared_g: Option<f64>,
    /// Fixed starting point; otherwise one is drawn at distance `D`.
    pub start: Option<Point>,
}

impl fmt::Debug for VectorFieldProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldProblem")
            .field("name", &self.name)
            .field("manifold", &self.manifold)
            .field("solution", &self.solution)
            .field("region_radius", &self.region_radius)
            .field("declared_l", &self.declared_l)
            .field("declared_g", &self.declared_g)
            .finish_non_exhaustive()
    }
}

impl VectorFieldProblem {
    pub fn new(
        name: impl Into<String>,
        manifold: Manifold,
        field: impl Fn(&Point) -> Result<Tangent> + Send + Sync + 'static,
        region_radius: f64,
    ) -> Self {
        VectorFieldProblem {
            name: name.into(),
            manifold,
            field: Arc::new(field),
            solution: None,
            objective: None,
            region_radius,
            declared_l: None,
            declared_g: None,
            start: None,
        }
    }

    pub fn with_solution(mut self, z: Point) -> Self {
        self.solution = Some(z);
        self
    }

    pub fn with_constants(mut self, l: f64, g: f64) -> Self {
        self.declared_l = Some(l);
        self.declared_g = Some(g);
        self
    }

    pub fn with_start(mut self, z: Point) -> Self {
        self.start = Some(z);
        self
    }

    pub fn field(&self, z: &Point) -> Result<Tangent> {
        (self.field)(z)
    }

    /// The declared solution, or the manifold origin when none is known.
    pub fn center(&self) -> Point {
        self.solution.clone().unwrap_or_else(|| self.manifold.origin())
    }

    /// The fixed start if any, else a seeded point at distance `D` from the center.
    pub fn initial_point(&self, seed: u64) -> Point {
        if let Some(z) = &self.start {
            return z.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        point_at_distance(&self.manifold, &self.center(), self.region_radius, &mut rng)
    }

    /// `(L, G)`: declared values, else sampled estimates inflated by 1.1.
    pub fn constants(&self) -> (f64, f64) {
        match (self.declared_l, self.declared_g) {
            (Some(l), Some(g)) => (l, g),
            (l, g) => {
                let r = check_assumptions(self, 2000, 0, Execution::Parallel);
                (
                    l.unwrap_or(1.1 * r.lipschitz_estimate),
                    g.unwrap_or(1.1 * r.grad_norm_max),
                )
            }
        }
    }

    pub fn bounds(&self) -> Result<GeometryBounds> {
        let (kappa, k_upper) = self.manifold.curvature_bounds();
        let (l, g) = self.constants();
        GeometryBounds::derive(kappa, k_upper, self.region_radius, l, g)
    }
}

/// The field problem induced by a saddle objective, `F = (grad_x f, -grad_y f)`.
pub fn saddle_to_field(name: impl Into<String>, f: SaddleObjective, region_radius: f64) -> VectorFieldProblem {
    let g = f.clone();
    let mut p = VectorFieldProblem::new(name, f.manifold(), move |z| g.field(z), region_radius);
    p.objective = Some(f);
    p
}
