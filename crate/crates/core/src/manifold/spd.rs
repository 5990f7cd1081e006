//! SPD(n) with the affine-invariant metric `<U, V>_P = tr(P^-1 U P^-1 V)`.
//!
//! Matrix functions go through the symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::REPROJECT_TOL;
use crate::error::{Error, Result};

pub(super) fn to_mat(n: usize, v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v.as_slice())
}

pub(super) fn to_vec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut out = DVector::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
    out
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `V f(Lambda) V^T` for symmetric `m`.
pub(crate) fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(sym(m));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    let v = &eig.eigenvectors;
    sym(&(v * d * v.transpose()))
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym(m)).eigenvalues.min()
}

fn asym_residual(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

pub(super) fn point_residual(n: usize, v: &DVector<f64>) -> f64 {
    let m = to_mat(n, v);
    if min_eig(&m) <= 0.0 {
        return f64::INFINITY;
    }
    asym_residual(&m)
}

pub(super) fn tangent_residual(n: usize, v: &DVector<f64>) -> f64 {
    asym_residual(&to_mat(n, v))
}

pub(super) fn reproject(n: usize, v: &DVector<f64>) -> Result<DVector<f64>> {
    let m = to_mat(n, v);
    let residual = asym_residual(&m);
    if residual > REPROJECT_TOL {
        return Err(Error::OffManifold { residual });
    }
    let s = sym(&m);
    if min_eig(&s) <= 0.0 {
        return Err(Error::OffManifold {
            residual: f64::INFINITY,
        });
    }
    Ok(to_vec(&s))
}

pub(super) fn symmetrize(n: usize, v: &DVector<f64>) -> DVector<f64> {
    to_vec(&sym(&to_mat(n, v)))
}

/// `(P^{1/2}, P^{-1/2})`.
fn roots(p: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(sym(p));
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::OffManifold {
            residual: f64::INFINITY,
        });
    }
    let v = &eig.eigenvectors;
    let half = sym(&(v * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * v.transpose()));
    let inv_half = sym(
        &(v * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt())) * v.transpose()),
    );
    Ok((half, inv_half))
}

pub(super) fn exp(n: usize, p: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let (s, si) = roots(&to_mat(n, p))?;
    let inner = &si * to_mat(n, v) * &si;
    let e = sym_fn(&inner, f64::exp);
    Ok(to_vec(&sym(&(&s * e * &s))))
}

pub(super) fn log(n: usize, p: &DVector<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
    let (s, si) = roots(&to_mat(n, p))?;
    let inner = &si * to_mat(n, q) * &si;
    if min_eig(&inner) <= 0.0 {
        return Err(Error::UndefinedLog);
    }
    let l = sym_fn(&inner, f64::ln);
    Ok(to_vec(&sym(&(&s * l * &s))))
}

pub(super) fn distance(n: usize, p: &DVector<f64>, q: &DVector<f64>) -> Result<f64> {
    let (_, si) = roots(&to_mat(n, p))?;
    let inner = &si * to_mat(n, q) * &si;
    let eig = SymmetricEigen::new(sym(&inner));
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::UndefinedLog);
    }
    Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

pub(super) fn inner(n: usize, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let pm = to_mat(n, p);
    let Some(chol) = pm.cholesky() else {
        return f64::NAN;
    };
    // tr(P^-1 U P^-1 V)
    let a = chol.solve(&to_mat(n, u));
    let b = chol.solve(&to_mat(n, v));
    (a * b).trace()
}

/// Transport along the geodesic: `E U E^T` with `E = P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{-1/2}`.
pub(super) fn transport(
    n: usize,
    p: &DVector<f64>,
    q: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    let (s, si) = roots(&to_mat(n, p))?;
    let inner = &si * to_mat(n, q) * &si;
    if min_eig(&inner) <= 0.0 {
        return Err(Error::UndefinedTransport);
    }
    let e = &s * sym_fn(&inner, f64::sqrt) * &si;
    Ok(to_vec(&sym(&(&e * to_mat(n, u) * e.transpose()))))
}
