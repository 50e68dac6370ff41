//! Floating-point validation oracles and prefilters. Nothing here decides
//! acceptance of a witness; exact checks do.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::matrix::QMat;
use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn to_cmat(m: &QMat) -> CMat {
    CMat::from_fn(m.rows, m.cols, |i, j| m[(i, j)].to_c64())
}

pub fn op_norm(m: &QMat) -> f64 {
    cop_norm(&to_cmat(m))
}

pub fn cop_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Normalized Hilbert-Schmidt norm `sqrt(Tr(A*A)/n)`.
pub fn two_norm(m: &CMat) -> f64 {
    let n = m.nrows().max(1) as f64;
    (m.iter().map(|z| z.norm_sqr()).sum::<f64>() / n).sqrt()
}

/// Eigen-decomposition of a Hermitian matrix (symmetrized first).
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    (e.eigenvalues.iter().cloned().collect(), e.eigenvectors)
}

/// Spectral projection of `h` (Hermitian) onto eigenvalues above `cut`;
/// errors when some eigenvalue lies within `tol` of `cut`.
pub fn spectral_projection(h: &CMat, cut: f64, tol: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(h);
    let n = h.nrows();
    let mut p = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if (v - cut).abs() < tol {
            return Err(Error::Invalid(format!("eigenvalue {v} too close to {cut}")));
        }
        if v > cut {
            let c = vecs.column(i);
            p += c * c.adjoint();
        }
    }
    Ok(p)
}

/// Nearest projection by spectral rounding of `x*x` at ½.
pub fn nearest_projection(x: &CMat) -> Result<CMat> {
    spectral_projection(&(x.adjoint() * x), 0.5, 1e-9)
}

/// Implement of `p ~ q` obtained from the polar part of `q·x·p`, using the
/// top `rank(p)` singular pairs.
pub fn polar_implement(x: &CMat, p: &CMat, q: &CMat) -> Result<CMat> {
    let y = q * x * p;
    let rank = p.trace().re.round() as usize;
    let svd = y.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    if rank > order.len() || (rank > 0 && svd.singular_values[order[rank - 1]] < 1e-9) {
        return Err(Error::Invalid("compression is rank deficient".into()));
    }
    let n = x.nrows();
    let mut v = CMat::zeros(n, x.ncols());
    for &i in order.iter().take(rank) {
        v += u.column(i) * vt.row(i);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rounding_examples() {
        let x = CMat::from_row_slice(2, 2, &[c(0.75), c(0.0), c(0.0), c(0.0)]);
        let p = nearest_projection(&x).unwrap();
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-12 && p[(1, 1)].norm() < 1e-12);
        let half = CMat::identity(2, 2) * c(0.5f64.sqrt());
        assert!(nearest_projection(&half).is_err());
    }

    #[test]
    fn polar_gives_implement() {
        let p = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let q = CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let x = CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.9), c(0.0)]);
        let v = polar_implement(&x, &p, &q).unwrap();
        assert!((v.adjoint() * &v - &p).norm() < 1e-12);
        assert!((&v * v.adjoint() - &q).norm() < 1e-12);
    }
}
