//! Model manifolds and their closed-form Riemannian operations.
//!
//! Every manifold is stored in ambient coordinates: the unit sphere and the
//! hyperboloid live in `R^{d+1}`, SPD(n) in row-major `n*n` arrays, products
//! as the concatenation of their factors. Points and tangent vectors are
//! immutable values; all operations are pure.

pub mod average;
mod hyperboloid;
pub mod sample;
mod spd;
mod sphere;

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use average::GeodesicAverage;

/// Representation invariants are held to this tolerance.
pub const REPR_TOL: f64 = 1e-10;
/// Violations below this are silently re-projected; above it they are errors.
pub const REPROJECT_TOL: f64 = 1e-8;

/// A model manifold. Curvature bounds are fixed per kind, see
/// [`Manifold::curvature_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manifold {
    Euclidean { dim: usize },
    /// Unit sphere `S^dim` embedded in `R^{dim+1}`.
    Sphere { dim: usize },
    /// Hyperboloid model of `H^dim` (curvature -1) in Minkowski space `R^{1,dim}`.
    Hyperboloid { dim: usize },
    /// Symmetric positive definite `n x n` matrices, affine-invariant metric.
    Spd { n: usize },
    Product { factors: Vec<Manifold> },
}

/// A point in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: DVector<f64>,
}

/// A tangent vector together with the point it is attached to.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    base: Point,
    comps: DVector<f64>,
}

impl Point {
    /// Wraps raw coordinates without checking the manifold constraint.
    pub fn from_raw(coords: DVector<f64>) -> Self {
        Point { coords }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.as_slice().to_vec()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Ok(Point::from_raw(DVector::from_vec(v)))
    }
}

impl Tangent {
    /// Attaches components to a base point without projecting.
    pub fn from_raw(base: Point, comps: DVector<f64>) -> Self {
        Tangent { base, comps }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.comps
    }

    pub fn scale(&self, a: f64) -> Tangent {
        Tangent {
            base: self.base.clone(),
            comps: &self.comps * a,
        }
    }

    pub fn neg(&self) -> Tangent {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Tangent) -> Result<Tangent> {
        self.same_base(other)?;
        Ok(Tangent {
            base: self.base.clone(),
            comps: &self.comps + &other.comps,
        })
    }

    pub fn sub(&self, other: &Tangent) -> Result<Tangent> {
        self.same_base(other)?;
        Ok(Tangent {
            base: self.base.clone(),
            comps: &self.comps - &other.comps,
        })
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Tangent, b: f64) -> Result<Tangent> {
        self.same_base(other)?;
        Ok(Tangent {
            base: self.base.clone(),
            comps: &self.comps * a + &other.comps * b,
        })
    }

    pub fn is_based_at(&self, p: &Point) -> bool {
        self.base.coords == p.coords
    }

    fn same_base(&self, other: &Tangent) -> Result<()> {
        if self.base.coords == other.base.coords {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }
}

fn check_base(u: &Tangent, p: &Point) -> Result<()> {
    if u.is_based_at(p) {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

impl Manifold {
    pub fn euclidean(dim: usize) -> Self {
        Manifold::Euclidean { dim }
    }

    pub fn sphere(dim: usize) -> Self {
        Manifold::Sphere { dim }
    }

    pub fn hyperboloid(dim: usize) -> Self {
        Manifold::Hyperboloid { dim }
    }

    pub fn spd(n: usize) -> Self {
        Manifold::Spd { n }
    }

    pub fn product(factors: Vec<Manifold>) -> Self {
        Manifold::Product { factors }
    }

    pub fn name(&self) -> String {
        match self {
            Manifold::Euclidean { dim } => format!("R{dim}"),
            Manifold::Sphere { dim } => format!("S{dim}"),
            Manifold::Hyperboloid { dim } => format!("H{dim}"),
            Manifold::Spd { n } => format!("SPD{n}"),
            Manifold::Product { factors } => factors
                .iter()
                .map(Manifold::name)
                .collect::<Vec<_>>()
                .join("x"),
        }
    }

    /// Length of the coordinate vector.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Manifold::Euclidean { dim } => *dim,
            Manifold::Sphere { dim } | Manifold::Hyperboloid { dim } => dim + 1,
            Manifold::Spd { n } => n * n,
            Manifold::Product { factors } => factors.iter().map(Manifold::ambient_dim).sum(),
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Manifold::Euclidean { dim } | Manifold::Sphere { dim } | Manifold::Hyperboloid { dim } => {
                *dim
            }
            Manifold::Spd { n } => n * (n + 1) / 2,
            Manifold::Product { factors } => factors.iter().map(Manifold::intrinsic_dim).sum(),
        }
    }

    /// Sectional curvature bounds `(kappa, K)`.
    ///
    /// SPD(n) with the affine-invariant metric is a symmetric space whose
    /// curvature lies in `[-1/2, 0]` everywhere (SPD(1) is flat). A product of
    /// two or more factors also has flat mixed planes, so 0 is always inside
    /// its interval.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        match self {
            Manifold::Euclidean { .. } => (0.0, 0.0),
            Manifold::Sphere { dim } if *dim >= 2 => (1.0, 1.0),
            Manifold::Hyperboloid { dim } if *dim >= 2 => (-1.0, -1.0),
            Manifold::Sphere { .. } | Manifold::Hyperboloid { .. } => (0.0, 0.0),
            Manifold::Spd { n } if *n >= 2 => (-0.5, 0.0),
            Manifold::Spd { .. } => (0.0, 0.0),
            Manifold::Product { factors } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for f in factors {
                    let (a, b) = f.curvature_bounds();
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                if factors.len() >= 2 {
                    lo = lo.min(0.0);
                    hi = hi.max(0.0);
                }
                if factors.is_empty() {
                    (0.0, 0.0)
                } else {
                    (lo, hi)
                }
            }
        }
    }

    /// Radius below which `exp` is a diffeomorphism onto its image.
    pub fn injectivity_radius(&self) -> f64 {
        match self {
            Manifold::Sphere { .. } => std::f64::consts::PI,
            Manifold::Product { factors } => factors
                .iter()
                .map(Manifold::injectivity_radius)
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        }
    }

    /// A canonical base point (origin, north pole, apex, identity).
    pub fn origin(&self) -> Point {
        let coords = match self {
            Manifold::Euclidean { dim } => DVector::zeros(*dim),
            Manifold::Sphere { dim } | Manifold::Hyperboloid { dim } => {
                let mut v = DVector::zeros(dim + 1);
                v[0] = 1.0;
                v
            }
            Manifold::Spd { n } => {
                let mut v = DVector::zeros(n * n);
                for i in 0..*n {
                    v[i * n + i] = 1.0;
                }
                v
            }
            Manifold::Product { factors } => {
                let parts: Vec<Point> = factors.iter().map(Manifold::origin).collect();
                return concat_points(&parts);
            }
        };
        Point::from_raw(coords)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        let expected = self.ambient_dim();
        if expected == len {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got: len })
        }
    }

    /// Validates coordinates as a point, re-projecting small drift.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        self.validate_point(&Point::from_raw(DVector::from_vec(coords)))
    }

    pub fn validate_point(&self, p: &Point) -> Result<Point> {
        self.check_len(p.len())?;
        if p.coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::OffManifold { residual: f64::NAN });
        }
        let coords = match self {
            Manifold::Euclidean { .. } => p.coords.clone(),
            Manifold::Sphere { .. } => sphere::reproject(&p.coords)?,
            Manifold::Hyperboloid { .. } => hyperboloid::reproject(&p.coords)?,
            Manifold::Spd { n } => spd::reproject(*n, &p.coords)?,
            Manifold::Product { .. } => {
                let parts = self
                    .split_point(p)?
                    .iter()
                    .zip(self.factors())
                    .map(|(q, m)| m.validate_point(q))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(concat_points(&parts));
            }
        };
        Ok(Point::from_raw(coords))
    }

    /// Residual of the point's representation invariant (0 for Euclidean).
    pub fn point_residual(&self, p: &Point) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => sphere::point_residual(&p.coords),
            Manifold::Hyperboloid { .. } => hyperboloid::point_residual(&p.coords),
            Manifold::Spd { n } => spd::point_residual(*n, &p.coords),
            Manifold::Product { .. } => match self.split_point(p) {
                Ok(parts) => parts
                    .iter()
                    .zip(self.factors())
                    .map(|(q, m)| m.point_residual(q))
                    .fold(0.0, f64::max),
                Err(_) => f64::INFINITY,
            },
        }
    }

    /// Residual of the tangency constraint of `u` at its base point.
    pub fn tangent_residual(&self, u: &Tangent) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => sphere::tangent_residual(&u.base.coords, &u.comps),
            Manifold::Hyperboloid { .. } => {
                hyperboloid::tangent_residual(&u.base.coords, &u.comps)
            }
            Manifold::Spd { n } => spd::tangent_residual(*n, &u.comps),
            Manifold::Product { .. } => match self.split_tangent(u) {
                Ok(parts) => parts
                    .iter()
                    .zip(self.factors())
                    .map(|(v, m)| m.tangent_residual(v))
                    .fold(0.0, f64::max),
                Err(_) => f64::INFINITY,
            },
        }
    }

    /// Builds a tangent vector at `p`, projecting small violations away.
    pub fn tangent(&self, p: &Point, comps: Vec<f64>) -> Result<Tangent> {
        self.check_len(comps.len())?;
        let u = Tangent::from_raw(p.clone(), DVector::from_vec(comps));
        let residual = self.tangent_residual(&u);
        if residual > REPROJECT_TOL {
            return Err(Error::OffTangent { residual });
        }
        Ok(self.project(p, u.comps))
    }

    /// Orthogonal projection of ambient components onto `T_p`.
    pub fn project(&self, p: &Point, comps: DVector<f64>) -> Tangent {
        let comps = match self {
            Manifold::Euclidean { .. } => comps,
            Manifold::Sphere { .. } => sphere::project(&p.coords, comps),
            Manifold::Hyperboloid { .. } => hyperboloid::project(&p.coords, comps),
            Manifold::Spd { n } => spd::symmetrize(*n, &comps),
            Manifold::Product { .. } => {
                let mut out = DVector::zeros(comps.len());
                for (m, off, len) in self.segments() {
                    let sub = Point::from_raw(p.coords.rows(off, len).into_owned());
                    let t = m.project(&sub, comps.rows(off, len).into_owned());
                    out.rows_mut(off, len).copy_from(&t.comps);
                }
                out
            }
        };
        Tangent::from_raw(p.clone(), comps)
    }

    pub fn zero_tangent(&self, p: &Point) -> Tangent {
        Tangent::from_raw(p.clone(), DVector::zeros(p.len()))
    }

    /// Riemannian exponential map `Exp_p(v)`.
    pub fn exp(&self, p: &Point, v: &Tangent) -> Result<Point> {
        check_base(v, p)?;
        self.check_len(p.len())?;
        let coords = match self {
            Manifold::Euclidean { .. } => &p.coords + &v.comps,
            Manifold::Sphere { .. } => sphere::exp(&p.coords, &v.comps)?,
            Manifold::Hyperboloid { .. } => hyperboloid::exp(&p.coords, &v.comps),
            Manifold::Spd { n } => spd::exp(*n, &p.coords, &v.comps)?,
            Manifold::Product { .. } => {
                let mut out = DVector::zeros(p.len());
                for (m, off, len) in self.segments() {
                    let sp = Point::from_raw(p.coords.rows(off, len).into_owned());
                    let sv = Tangent::from_raw(sp.clone(), v.comps.rows(off, len).into_owned());
                    out.rows_mut(off, len).copy_from(&m.exp(&sp, &sv)?.coords);
                }
                out
            }
        };
        Ok(Point::from_raw(coords))
    }

    /// Inverse exponential map `Exp_p^{-1}(q)`.
    pub fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        self.check_len(p.len())?;
        self.check_len(q.len())?;
        let comps = match self {
            Manifold::Euclidean { .. } => &q.coords - &p.coords,
            Manifold::Sphere { .. } => sphere::log(&p.coords, &q.coords)?,
            Manifold::Hyperboloid { .. } => hyperboloid::log(&p.coords, &q.coords),
            Manifold::Spd { n } => spd::log(*n, &p.coords, &q.coords)?,
            Manifold::Product { .. } => {
                let mut out = DVector::zeros(p.len());
                for (m, off, len) in self.segments() {
                    let sp = Point::from_raw(p.coords.rows(off, len).into_owned());
                    let sq = Point::from_raw(q.coords.rows(off, len).into_owned());
                    out.rows_mut(off, len).copy_from(&m.log(&sp, &sq)?.comps);
                }
                out
            }
        };
        Ok(Tangent::from_raw(p.clone(), comps))
    }

    /// Parallel transport of `u` along the minimizing geodesic from its base to `q`.
    pub fn transport(&self, u: &Tangent, q: &Point) -> Result<Tangent> {
        let p = &u.base;
        self.check_len(p.len())?;
        self.check_len(q.len())?;
        if p.coords == q.coords {
            return Ok(u.clone());
        }
        let comps = match self {
            Manifold::Euclidean { .. } => u.comps.clone(),
            Manifold::Sphere { .. } => sphere::transport(&p.coords, &q.coords, &u.comps)?,
            Manifold::Hyperboloid { .. } => {
                hyperboloid::transport(&p.coords, &q.coords, &u.comps)
            }
            Manifold::Spd { n } => spd::transport(*n, &p.coords, &q.coords, &u.comps)?,
            Manifold::Product { .. } => {
                let mut out = DVector::zeros(p.len());
                for (m, off, len) in self.segments() {
                    let sp = Point::from_raw(p.coords.rows(off, len).into_owned());
                    let sq = Point::from_raw(q.coords.rows(off, len).into_owned());
                    let su = Tangent::from_raw(sp, u.comps.rows(off, len).into_owned());
                    out.rows_mut(off, len).copy_from(&m.transport(&su, &sq)?.comps);
                }
                out
            }
        };
        Ok(Tangent::from_raw(q.clone(), comps))
    }

    /// Geodesic distance.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_len(p.len())?;
        self.check_len(q.len())?;
        Ok(match self {
            Manifold::Euclidean { .. } => (&q.coords - &p.coords).norm(),
            Manifold::Sphere { .. } => sphere::distance(&p.coords, &q.coords),
            Manifold::Hyperboloid { .. } => hyperboloid::distance(&p.coords, &q.coords),
            Manifold::Spd { n } => spd::distance(*n, &p.coords, &q.coords)?,
            Manifold::Product { .. } => {
                let mut sq = 0.0;
                for (m, off, len) in self.segments() {
                    let sp = Point::from_raw(p.coords.rows(off, len).into_owned());
                    let sqp = Point::from_raw(q.coords.rows(off, len).into_owned());
                    sq += m.distance(&sp, &sqp)?.powi(2);
                }
                sq.sqrt()
            }
        })
    }

    /// Riemannian metric `<u, v>_p`.
    pub fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64> {
        u.same_base(v)?;
        Ok(self.inner_unchecked(&u.base, &u.comps, &v.comps))
    }

    pub fn norm(&self, u: &Tangent) -> f64 {
        self.inner_unchecked(&u.base, &u.comps, &u.comps).max(0.0).sqrt()
    }

    fn inner_unchecked(&self, p: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match self {
            Manifold::Euclidean { .. } | Manifold::Sphere { .. } => u.dot(v),
            Manifold::Hyperboloid { .. } => hyperboloid::minkowski(u, v),
            Manifold::Spd { n } => spd::inner(*n, &p.coords, u, v),
            Manifold::Product { .. } => self
                .segments()
                .map(|(m, off, len)| {
                    let sp = Point::from_raw(p.coords.rows(off, len).into_owned());
                    m.inner_unchecked(
                        &sp,
                        &u.rows(off, len).into_owned(),
                        &v.rows(off, len).into_owned(),
                    )
                })
                .sum(),
        }
    }

    pub fn factors(&self) -> &[Manifold] {
        match self {
            Manifold::Product { factors } => factors,
            _ => std::slice::from_ref(self),
        }
    }

    /// `(factor, offset, length)` for each factor of a product (or `self`).
    fn segments(&self) -> impl Iterator<Item = (&Manifold, usize, usize)> {
        let mut off = 0;
        self.factors().iter().map(move |m| {
            let len = m.ambient_dim();
            let start = off;
            off += len;
            (m, start, len)
        })
    }

    /// Splits a product point into its factor points.
    pub fn split_point(&self, p: &Point) -> Result<Vec<Point>> {
        self.check_len(p.len())?;
        Ok(self
            .segments()
            .map(|(_, off, len)| Point::from_raw(p.coords.rows(off, len).into_owned()))
            .collect())
    }

    pub fn split_tangent(&self, u: &Tangent) -> Result<Vec<Tangent>> {
        let bases = self.split_point(&u.base)?;
        Ok(self
            .segments()
            .zip(bases)
            .map(|((_, off, len), b)| Tangent::from_raw(b, u.comps.rows(off, len).into_owned()))
            .collect())
    }

    /// Joins factor points into a product point.
    pub fn join_points(&self, parts: &[Point]) -> Result<Point> {
        let p = concat_points(parts);
        self.check_len(p.len())?;
        Ok(p)
    }

    pub fn join_tangents(&self, parts: &[Tangent]) -> Result<Tangent> {
        let bases: Vec<Point> = parts.iter().map(|t| t.base.clone()).collect();
        let base = self.join_points(&bases)?;
        let comps: Vec<f64> = parts
            .iter()
            .flat_map(|t| t.comps.iter().copied())
            .collect();
        Ok(Tangent::from_raw(base, DVector::from_vec(comps)))
    }
}

fn concat_points(parts: &[Point]) -> Point {
    let coords: Vec<f64> = parts.iter().flat_map(|p| p.coords.iter().copied()).collect();
    Point::from_raw(DVector::from_vec(coords))
}

/// `sinh(x)/x`, accurate near zero.
pub(crate) fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// `sin(x)/x`, accurate near zero.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
