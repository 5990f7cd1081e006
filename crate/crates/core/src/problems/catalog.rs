//! Named problem constructors addressable from configuration files.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_assumptions, saddle_to_field, SaddleObjective, VectorFieldProblem};
use crate::error::{Error, Result};
use crate::geometry::zeta;
use crate::manifold::sample::point_in_ball;
use crate::manifold::{sinhc, Manifold, Point, Tangent};
use crate::par::Execution;

pub const PROBLEM_NAMES: [&str; 5] = [
    "euclidean_bilinear",
    "decoupled_saddle",
    "frechet_mean",
    "sphere_bilinear",
    "hyperbolic_rmean_saddle",
];

/// Pairs sampled when a constructor certifies its assumptions.
const CERTIFY_SAMPLES: usize = 4000;
/// Residual a numerically located solution must reach.
const SOLUTION_TOL: f64 = 1e-10;

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn two() -> usize {
    2
}
fn default_modes() -> usize {
    41
}
fn default_lambda_min() -> f64 {
    1e-4
}
fn default_factor() -> Manifold {
    Manifold::hyperboloid(2)
}
fn default_count() -> usize {
    5
}
fn default_gamma() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `f(x, y) = sum_k lambda_k x_k y_k` on `R^n x R^n` with log-spaced `lambda_k`.
    EuclideanBilinear {
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_lambda_min")]
        lambda_min: f64,
        #[serde(default = "one")]
        lambda_max: f64,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `f(x, y) = d(x, o)^2/2 - d(y, o)^2/2` on `M x M`.
    DecoupledSaddle {
        #[serde(default = "default_factor")]
        factor: Manifold,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `F(z) = -(1/N) sum_i log_z p_i`.
    FrechetMean {
        manifold: Manifold,
        data: DataSpec,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `f(x, y) = alpha (y_0 - x_0) + x'^T A y'` on `S^d x S^d`, where `x'`
    /// drops the first coordinate.
    SphereBilinear {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "half")]
        radius: f64,
        #[serde(default)]
        seed: u64,
    },
    /// `f(x, y) = (1/N) sum_i d(x, p_i)^2/2 + gamma l(x).l(y) - mu d(y, o)^2/2`
    /// on `H^d x H^d`, with `l = log_o` in apex coordinates.
    HyperbolicRmeanSaddle {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "one")]
        spread: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "one")]
        mu: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Points { points: Vec<Vec<f64>> },
    /// `count` points drawn uniformly from the ball of radius `spread` about the origin.
    Random { count: usize, spread: f64, seed: u64 },
}

impl ProblemSpec {
    /// Builds a spec from a name and a JSON object of parameters.
    pub fn parse(name: &str, params: serde_json::Value) -> Result<ProblemSpec> {
        let mut obj = match params {
            serde_json::Value::Object(o) => o,
            serde_json::Value::Null => serde_json::Map::new(),
            other => return Err(Error::Construction(format!("parameters must be an object, got {other}"))),
        };
        if !PROBLEM_NAMES.contains(&name) {
            return Err(Error::Construction(format!(
                "unknown problem '{name}'; valid names: {}",
                PROBLEM_NAMES.join(", ")
            )));
        }
        obj.insert("name".into(), name.into());
        serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| Error::Construction(e.to_string()))
    }
}

pub fn make_problem(spec: &ProblemSpec) -> Result<VectorFieldProblem> {
    match spec {
        ProblemSpec::EuclideanBilinear { modes, lambda_min, lambda_max, radius } => {
            euclidean_bilinear(*modes, *lambda_min, *lambda_max, *radius)
        }
        ProblemSpec::DecoupledSaddle { factor, radius } => decoupled_saddle(factor, *radius),
        ProblemSpec::FrechetMean { manifold, data, radius } => frechet_mean(manifold, data, *radius),
        ProblemSpec::SphereBilinear { dim, matrix, alpha, radius, seed } => {
            sphere_bilinear(*dim, matrix.as_deref(), *alpha, *radius, *seed)
        }
        ProblemSpec::HyperbolicRmeanSaddle { dim, count, spread, gamma, mu, radius, seed } => {
            hyperbolic_rmean_saddle(*dim, *count, *spread, *gamma, *mu, *radius, *seed)
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Construction(format!("{what} must be positive, got {v}")))
    }
}

fn euclidean_bilinear(modes: usize, lambda_min: f64, lambda_max: f64, radius: f64) -> Result<VectorFieldProblem> {
    positive("radius", radius)?;
    positive("lambda_min", lambda_min)?;
    if modes == 0 || lambda_min > lambda_max {
        return Err(Error::Construction(
            "need modes >= 1 and lambda_min <= lambda_max".into(),
        ));
    }
    let ratio = lambda_max / lambda_min;
    let lambda = DVector::from_fn(modes, |k, _| {
        if modes == 1 {
            lambda_max
        } else {
            lambda_min * ratio.powf(k as f64 / (modes - 1) as f64)
        }
    });
    let m = Manifold::euclidean(modes);
    let (lv, lx, ly) = (lambda.clone(), lambda.clone(), lambda);
    let f = SaddleObjective::new(
        m.clone(),
        m,
        move |x, y| x.coords().component_mul(&lv).dot(y.coords()),
        move |x, y| Ok(Tangent::from_raw(x.clone(), y.coords().component_mul(&lx))),
        move |x, y| Ok(Tangent::from_raw(y.clone(), x.coords().component_mul(&ly))),
    );
    let n = 2 * modes;
    let start = Point::from_raw(DVector::from_element(n, radius / (n as f64).sqrt()));
    Ok(saddle_to_field("euclidean_bilinear", f, radius)
        .with_solution(Point::from_raw(DVector::zeros(n)))
        .with_constants(lambda_max, 1.2 * lambda_max * radius)
        .with_start(start))
}

fn decoupled_saddle(factor: &Manifold, radius: f64) -> Result<VectorFieldProblem> {
    positive("radius", radius)?;
    let o = factor.origin();
    let (ox, oy) = (o.clone(), o.clone());
    let (mv, mx, my) = (factor.clone(), factor.clone(), factor.clone());
    let f = SaddleObjective::new(
        factor.clone(),
        factor.clone(),
        move |x, y| {
            let dx = mv.distance(x, &o).unwrap_or(f64::NAN);
            let dy = mv.distance(y, &o).unwrap_or(f64::NAN);
            0.5 * dx * dx - 0.5 * dy * dy
        },
        move |x, _| Ok(mx.log(x, &ox)?.neg()),
        move |_, y| my.log(y, &oy),
    );
    let (kappa, _) = factor.curvature_bounds();
    let l = zeta(kappa, 1.2 * radius);
    let solution = f.manifold().origin();
    Ok(saddle_to_field("decoupled_saddle", f, radius)
        .with_solution(solution)
        .with_constants(l, 1.2 * radius))
}

fn data_points(m: &Manifold, data: &DataSpec) -> Result<Vec<Point>> {
    let pts = match data {
        DataSpec::Points { points } => points
            .iter()
            .map(|c| m.point(c.clone()))
            .collect::<Result<Vec<_>>>()?,
        DataSpec::Random { count, spread, seed } => {
            positive("spread", *spread)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count).map(|_| point_in_ball(m, &m.origin(), *spread, &mut rng)).collect()
        }
    };
    if pts.is_empty() {
        return Err(Error::Construction("frechet_mean needs at least one data point".into()));
    }
    Ok(pts)
}

/// Iterates `z <- Exp_z(-step F(z))` until `||F|| <= SOLUTION_TOL / 100` or it stalls.
fn locate_zero(
    m: &Manifold,
    field: &dyn Fn(&Point) -> Result<Tangent>,
    start: Point,
    step: f64,
    max_iter: usize,
) -> Result<Point> {
    let mut z = start;
    let mut best = (f64::INFINITY, z.clone());
    for _ in 0..max_iter {
        let g = field(&z)?;
        let n = m.norm(&g);
        if n < best.0 {
            best = (n, z.clone());
        }
        if n <= SOLUTION_TOL / 100.0 {
            break;
        }
        z = m.exp(&z, &g.scale(-step))?;
    }
    if best.0 > SOLUTION_TOL {
        return Err(Error::Construction(format!(
            "could not certify a solution: best residual {:.3e}",
            best.0
        )));
    }
    Ok(best.1)
}

fn frechet_mean(m: &Manifold, data: &DataSpec, radius: f64) -> Result<VectorFieldProblem> {
    positive("radius", radius)?;
    let pts = data_points(m, data)?;
    let mf = m.clone();
    let pf = pts.clone();
    let field = move |z: &Point| -> Result<Tangent> {
        let mut acc = mf.zero_tangent(z);
        for p in &pf {
            acc = acc.add(&mf.log(z, p)?)?;
        }
        Ok(acc.scale(-1.0 / pf.len() as f64))
    };
    let solution = locate_zero(m, &field, pts[0].clone(), 1.0, 10_000)?;
    let mut spread: f64 = 0.0;
    for p in &pts {
        spread = spread.max(m.distance(&solution, p)?);
    }
    let (kappa, _) = m.curvature_bounds();
    let l = zeta(kappa, 1.2 * radius + spread);
    let g = (l * 1.2 * radius).min(1.2 * radius + spread);
    Ok(VectorFieldProblem::new("frechet_mean", m.clone(), field, radius)
        .with_solution(solution)
        .with_constants(l, g))
}

fn sphere_matrix(dim: usize, matrix: Option<&[Vec<f64>]>) -> Result<DMatrix<f64>> {
    match matrix {
        None => Ok(DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                1.0
            } else if j == i + 1 {
                0.5
            } else {
                0.0
            }
        })),
        Some(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::Construction(format!("matrix must be {dim}x{dim}")));
            }
            Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
        }
    }
}

fn sphere_bilinear(
    dim: usize,
    matrix: Option<&[Vec<f64>]>,
    alpha: f64,
    radius: f64,
    seed: u64,
) -> Result<VectorFieldProblem> {
    positive("radius", radius)?;
    if dim == 0 {
        return Err(Error::Construction("dim must be at least 1".into()));
    }
    let a = sphere_matrix(dim, matrix)?;
    let at = a.transpose();
    let s = Manifold::sphere(dim);
    let tail = move |p: &Point| p.coords().rows(1, dim).into_owned();
    let (av, ax) = (a.clone(), a);
    let (sx, sy) = (s.clone(), s.clone());
    let f = SaddleObjective::new(
        s.clone(),
        s.clone(),
        move |x, y| alpha * (y.coords()[0] - x.coords()[0]) + tail(x).dot(&(&av * tail(y))),
        move |x, y| {
            let mut g = DVector::zeros(dim + 1);
            g[0] = -alpha;
            g.rows_mut(1, dim).copy_from(&(&ax * tail(y)));
            Ok(sx.project(x, g))
        },
        move |x, y| {
            let mut g = DVector::zeros(dim + 1);
            g[0] = alpha;
            g.rows_mut(1, dim).copy_from(&(&at * tail(x)));
            Ok(sy.project(y, g))
        },
    );
    let solution = f.manifold().origin();
    let mut r = radius;
    let mut last = None;
    for _ in 0..=10 {
        let prob = saddle_to_field("sphere_bilinear", f.clone(), r).with_solution(solution.clone());
        let report = check_assumptions(&prob, CERTIFY_SAMPLES, seed, Execution::Parallel);
        if report.violations == 0 {
            return Ok(prob.with_constants(1.1 * report.lipschitz_estimate, 1.1 * report.grad_norm_max));
        }
        last = Some(report);
        r *= 0.8;
    }
    Err(Error::Construction(format!(
        "sphere_bilinear not monotone on any tried ball: {last:?}"
    )))
}

/// Apex-coordinate log map `l(x)`: the spatial part of `log_o x`.
fn apex_log(x: &Point) -> DVector<f64> {
    let s = x.coords().rows(1, x.len() - 1).into_owned();
    let d = s.norm().asinh();
    s / sinhc(d)
}

/// `d/dc [arccosh(c) / sqrt(c^2 - 1)]` at `c = cosh d`.
fn apex_scale_slope(d: f64) -> f64 {
    if d < 0.05 {
        let d2 = d * d;
        -1.0 / 3.0 + d2 * (2.0 / 15.0 + d2 * (-2.0 / 63.0 + d2 * 4.0 / 675.0))
    } else {
        let sh = d.sinh();
        (sh - d * d.cosh()) / (sh * sh * sh)
    }
}

/// Riemannian gradient of `x -> l(x) . w` on the hyperboloid.
fn apex_log_dot_grad(h: &Manifold, x: &Point, w: &DVector<f64>) -> Tangent {
    let n = x.len() - 1;
    let s = x.coords().rows(1, n).into_owned();
    let d = s.norm().asinh();
    let mut g = DVector::zeros(n + 1);
    // ambient gradient with the time coordinate's sign flipped
    g[0] = -apex_scale_slope(d) * s.dot(w);
    g.rows_mut(1, n).copy_from(&(w / sinhc(d)));
    h.project(x, g)
}

fn hyperbolic_rmean_saddle(
    dim: usize,
    count: usize,
    spread: f64,
    gamma: f64,
    mu: f64,
    radius: f64,
    seed: u64,
) -> Result<VectorFieldProblem> {
    positive("radius", radius)?;
    positive("mu", mu)?;
    if dim == 0 || count == 0 {
        return Err(Error::Construction("need dim >= 1 and count >= 1".into()));
    }
    let h = Manifold::hyperboloid(dim);
    let pts = data_points(&h, &DataSpec::Random { count, spread, seed })?;
    let o = h.origin();
    let n = count as f64;
    let (hv, pv, ov) = (h.clone(), pts.clone(), o.clone());
    let (hx, px) = (h.clone(), pts);
    let (hy, oy) = (h.clone(), o);
    let f = SaddleObjective::new(
        h.clone(),
        h.clone(),
        move |x, y| {
            let fit: f64 = pv
                .iter()
                .map(|p| hv.distance(x, p).unwrap_or(f64::NAN).powi(2))
                .sum::<f64>()
                / (2.0 * n);
            let dy = hv.distance(y, &ov).unwrap_or(f64::NAN);
            fit + gamma * apex_log(x).dot(&apex_log(y)) - 0.5 * mu * dy * dy
        },
        move |x, y| {
            let mut acc = hx.zero_tangent(x);
            for p in &px {
                acc = acc.add(&hx.log(x, p)?)?;
            }
            acc.scale(-1.0 / n).add(&apex_log_dot_grad(&hx, x, &apex_log(y)).scale(gamma))
        },
        move |x, y| {
            let pull = hy.log(y, &oy)?.scale(mu);
            apex_log_dot_grad(&hy, y, &apex_log(x)).scale(gamma).add(&pull)
        },
    );
    let prod = f.manifold();
    let g = f.clone();
    let solution = locate_zero(&prod, &move |z| g.field(z), prod.origin(), 0.2, 20_000)?;
    let prob = saddle_to_field("hyperbolic_rmean_saddle", f, radius).with_solution(solution);
    let report = check_assumptions(&prob, CERTIFY_SAMPLES, seed, Execution::Parallel);
    if report.violations > 0 {
        return Err(Error::Construction(format!(
            "hyperbolic_rmean_saddle not monotone on the region: {report:?}"
        )));
    }
    Ok(prob.with_constants(1.1 * report.lipschitz_estimate, 1.1 * report.grad_norm_max))
}
