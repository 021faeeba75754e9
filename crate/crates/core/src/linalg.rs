//! Dense factorizations used across the crate, wrapped so the rest of the
//! code stays in `ndarray` types. Backed by `faer`.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

pub fn to_faer(a: &Array2<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_faer(m: MatRef<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Thin singular value decomposition `a = u diag(s) vt` with `s` in
/// non-increasing order, `u` of shape `n x k`, `vt` of shape `k x p`,
/// `k = min(n, p)`.
pub struct ThinSvd {
    pub u: Array2<f64>,
    pub s: Array1<f64>,
    pub vt: Array2<f64>,
}

pub fn thin_svd(a: &Array2<f64>) -> Result<ThinSvd> {
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::numerical(format!("SVD did not converge: {e:?}")))?;
    let k = a.nrows().min(a.ncols());
    let s = Array1::from_iter((0..k).map(|i| svd.S()[i]));
    let u = from_faer(svd.U());
    let v = svd.V();
    let vt = Array2::from_shape_fn((k, a.ncols()), |(i, j)| v[(j, i)]);
    Ok(ThinSvd { u, s, vt })
}

/// Eigendecomposition of a symmetric matrix; eigenvalues ascending,
/// eigenvectors as the columns of the returned matrix.
pub fn sym_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let evd = to_faer(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numerical(format!("eigendecomposition failed: {e:?}")))?;
    let n = a.nrows();
    let vals = Array1::from_iter((0..n).map(|i| evd.S()[i]));
    let vecs = from_faer(evd.U());
    Ok((vals, vecs))
}

/// Eigenvalues only, ascending.
pub fn sym_eigenvalues(a: &Array2<f64>) -> Result<Array1<f64>> {
    sym_eigen(a).map(|(vals, _)| vals)
}

/// Whether a symmetric matrix is positive definite (Cholesky succeeds).
pub fn is_positive_definite(a: &Array2<f64>) -> bool {
    to_faer(a).llt(Side::Lower).is_ok()
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let llt = to_faer(a)
        .llt(Side::Lower)
        .map_err(|_| Error::numerical("matrix is not positive definite".to_string()))?;
    Ok(from_faer(llt.inverse().as_ref()))
}

/// Apply `f` to the eigenvalues of a symmetric matrix: `U f(D) U^T`.
fn sym_map(a: &Array2<f64>, f: impl Fn(f64) -> Result<f64>) -> Result<Array2<f64>> {
    let (vals, vecs) = sym_eigen(a)?;
    let mapped = vals.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
    let scaled = &vecs * &Array1::from_vec(mapped); // scales columns
    Ok(scaled.dot(&vecs.t()))
}

/// Symmetric positive-semidefinite square root `U sqrt(D) U^T`.
///
/// Tiny negative eigenvalues from round-off are clamped to zero; anything
/// materially negative is rejected.
pub fn sym_sqrt(a: &Array2<f64>) -> Result<Array2<f64>> {
    let scale = a
        .diag()
        .iter()
        .fold(0.0f64, |m, &d| m.max(d.abs()))
        .max(1.0);
    sym_map(a, |v| {
        if v < -1e-10 * scale {
            Err(Error::numerical(format!(
                "matrix square root requires PSD input, found eigenvalue {v:.3e}"
            )))
        } else {
            Ok(v.max(0.0).sqrt())
        }
    })
}

/// Symmetric inverse square root `U D^{-1/2} U^T`; input must be PD.
pub fn sym_inv_sqrt(a: &Array2<f64>) -> Result<Array2<f64>> {
    sym_map(a, |v| {
        if v <= 0.0 {
            Err(Error::numerical(format!(
                "inverse square root requires PD input, found eigenvalue {v:.3e}"
            )))
        } else {
            Ok(1.0 / v.sqrt())
        }
    })
}

pub fn frobenius_norm(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn thin_svd_reconstructs() {
        let a = array![
            [1.0, 2.0, 0.5],
            [0.0, 1.0, -1.0],
            [3.0, 0.0, 2.0],
            [1.0, 1.0, 1.0]
        ];
        let f = thin_svd(&a).unwrap();
        let rec = f.u.dot(&Array2::from_diag(&f.s)).dot(&f.vt);
        assert!(frobenius_norm(&(&rec - &a)) < 1e-12);
        assert!(f.s.windows(2).into_iter().all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sym_sqrt_squares_back() {
        let a = array![[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 3.0]];
        let r = sym_sqrt(&a).unwrap();
        let back = r.dot(&r);
        assert!(frobenius_norm(&(&back - &a)) < 1e-10 * frobenius_norm(&a));
    }

    #[test]
    fn spd_inverse_matches_identity() {
        let a = array![[4.0, 1.0], [1.0, 3.0]];
        let inv = spd_inverse(&a).unwrap();
        let eye = a.dot(&inv);
        assert!(frobenius_norm(&(&eye - &Array2::<f64>::eye(2))) < 1e-12);
    }

    #[test]
    fn indefinite_matrix_fails_pd_check() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(!is_positive_definite(&a));
        assert!(spd_inverse(&a).is_err());
    }
}
