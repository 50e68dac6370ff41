//! Exact dense matrices over ℚ(i) and multi-matrix block elements.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::scalar::{sqrt_floor_dyadic, Gauss, Rational};
use crate::{Error, Result};

/// Dense row-major matrix with Gaussian-rational entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Gauss>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMat {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Gauss;
    fn index(&self, (r, c): (usize, usize)) -> &Gauss {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Gauss {
        &mut self.data[r * self.cols + c]
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Gauss::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Gauss::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gauss>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = Gauss::one();
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Gauss::is_zero)
    }

    pub fn add(&self, o: &QMat) -> QMat {
        debug_assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &QMat) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Gauss) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        debug_assert_eq!(self.cols, o.rows);
        let mut out = QMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        let p = a * b;
                        out[(i, j)] += &p;
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> QMat {
        let mut out = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Plain (unnormalized) trace.
    pub fn trace(&self) -> Gauss {
        let mut t = Gauss::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    pub fn kron(&self, o: &QMat) -> QMat {
        let mut out = QMat::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        out[(i * o.rows + k, j * o.cols + l)] = a * &o[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Sum of squared moduli of entries (the Hilbert-Schmidt norm squared).
    pub fn hs_norm_sqr(&self) -> Rational {
        self.data.iter().map(Gauss::norm_sqr).sum()
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && *self == self.adjoint()
    }

    pub fn max_abs_bound(&self) -> Rational {
        self.data.iter().map(Gauss::abs_bound).max().unwrap_or_else(Rational::zero)
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self[(r, c)].inv();
            for j in c..self.cols {
                self[(r, j)] = &self[(r, j)] * &inv;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    if self[(r, j)].is_zero() {
                        continue;
                    }
                    let d = &f * &self[(r, j)];
                    self[(i, j)] = &self[(i, j)] - &d;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Solve `self · X = b` exactly. Errors when singular.
    pub fn solve(&self, b: &QMat) -> Result<QMat> {
        if !self.is_square() || self.rows != b.rows {
            return Err(Error::Invalid("solve: shape mismatch".into()));
        }
        let n = self.rows;
        let mut aug = QMat::zeros(n, n + b.cols);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..b.cols {
                aug[(i, n + j)] = b[(i, j)].clone();
            }
        }
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return Err(Error::DependentBasis);
        }
        let mut x = QMat::zeros(n, b.cols);
        for i in 0..n {
            for j in 0..b.cols {
                x[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<QMat> {
        self.solve(&QMat::identity(self.rows))
    }

    /// Exact positive-semidefiniteness of a Hermitian matrix by symmetric
    /// elimination.
    pub fn is_psd(&self) -> bool {
        if !self.is_hermitian() {
            return false;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut alive: Vec<bool> = vec![true; n];
        for _ in 0..n {
            // pick a live index with positive diagonal, rejecting negatives
            let mut pick = None;
            for i in 0..n {
                if !alive[i] {
                    continue;
                }
                let d = &a[(i, i)].re;
                if d.is_negative() {
                    return false;
                }
                if d.is_zero() {
                    if (0..n).any(|j| alive[j] && !a[(i, j)].is_zero()) {
                        return false;
                    }
                    alive[i] = false;
                    continue;
                }
                if pick.is_none() {
                    pick = Some(i);
                }
            }
            let Some(p) = pick else { return true };
            alive[p] = false;
            let inv = Gauss::real(Rational::one() / &a[(p, p)].re);
            for i in 0..n {
                if !alive[i] || a[(i, p)].is_zero() {
                    continue;
                }
                let f = &a[(i, p)] * &inv;
                for j in 0..n {
                    if !alive[j] || a[(p, j)].is_zero() {
                        continue;
                    }
                    let d = &f * &a[(p, j)];
                    a[(i, j)] = &a[(i, j)] - &d;
                }
            }
        }
        true
    }

    /// `q² I - X*X ⪰ 0`, i.e. operator norm at most `q`.
    pub fn op_norm_at_most(&self, q: &Rational) -> bool {
        let g = self.adjoint().mul(self);
        let q2 = Gauss::real(q * q);
        let m = QMat::identity(g.rows).scale(&q2).sub(&g);
        m.is_psd()
    }

    /// Dyadic `u` with `‖X‖ ≤ u < ‖X‖ + 2^-k`, certified by exact
    /// semidefiniteness checks. `hint` is a floating estimate used to
    /// bracket the search.
    pub fn op_norm_upper(&self, k: u32, hint: Option<f64>) -> Rational {
        let grid = Rational::new(1.into(), num_bigint::BigInt::one() << (k as usize + 1));
        // crude certified upper bound: Frobenius norm
        let hs = sqrt_floor_dyadic(&self.hs_norm_sqr(), k + 1) + &grid;
        let mut hi = hs.clone();
        let mut lo = Rational::zero();
        if let Some(h) = hint.filter(|h| h.is_finite() && *h >= 0.0) {
            let scale = (1u64 << 40) as f64;
            let approx = Rational::new(((h * scale).round() as i64).into(), (1i64 << 40).into());
            let up = (&approx + &grid).min(hs.clone());
            let down = (&approx - &grid).max(Rational::zero());
            if self.op_norm_at_most(&up) {
                hi = up;
                if !self.op_norm_at_most(&down) {
                    lo = down;
                }
            }
        }
        hi = round_up_to(&hi, &grid);
        // bisection on the dyadic grid
        let eps = &grid * Rational::from_integer(2.into());
        while &hi - &lo >= eps {
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            let mid = round_up_to(&mid, &grid);
            if mid >= hi {
                break;
            }
            if self.op_norm_at_most(&mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn round_up_to(x: &Rational, grid: &Rational) -> Rational {
    (x / grid).ceil() * grid
}

/// Element of a multi-matrix algebra ⊕ᵢ M_{dᵢ}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockMat {
    pub blocks: Vec<QMat>,
}

impl BlockMat {
    pub fn zeros(dims: &[usize]) -> Self {
        Self { blocks: dims.iter().map(|&d| QMat::zeros(d, d)).collect() }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self { blocks: dims.iter().map(|&d| QMat::identity(d)).collect() }
    }

    pub fn single(m: QMat) -> Self {
        Self { blocks: vec![m] }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rows).collect()
    }

    fn zip(&self, o: &BlockMat, f: impl Fn(&QMat, &QMat) -> QMat) -> BlockMat {
        BlockMat { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, o: &BlockMat) -> BlockMat {
        self.zip(o, QMat::add)
    }

    pub fn sub(&self, o: &BlockMat) -> BlockMat {
        self.zip(o, QMat::sub)
    }

    pub fn mul(&self, o: &BlockMat) -> BlockMat {
        self.zip(o, QMat::mul)
    }

    pub fn scale(&self, c: &Gauss) -> BlockMat {
        BlockMat { blocks: self.blocks.iter().map(|b| b.scale(c)).collect() }
    }

    pub fn adjoint(&self) -> BlockMat {
        BlockMat { blocks: self.blocks.iter().map(QMat::adjoint).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(QMat::is_zero)
    }

    /// `Σ wᵢ Tr(Bᵢ)/dᵢ`.
    pub fn trace(&self, weights: &[Rational]) -> Gauss {
        let mut t = Gauss::zero();
        for (b, w) in self.blocks.iter().zip(weights) {
            let f = w / Rational::from_integer((b.rows as i64).into());
            t += &b.trace().scale(&f);
        }
        t
    }

    pub fn is_projection(&self) -> bool {
        self.blocks.iter().all(|b| b.is_hermitian() && b.mul(b) == *b)
    }

    /// Block-diagonal matrix on the direct sum.
    pub fn to_dense(&self) -> QMat {
        let n: usize = self.blocks.iter().map(|b| b.rows).sum();
        let mut out = QMat::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(off + i, off + j)] = b[(i, j)].clone();
                }
            }
            off += b.rows;
        }
        out
    }

    pub fn op_norm_upper(&self, k: u32) -> Rational {
        self.blocks
            .iter()
            .map(|b| b.op_norm_upper(k, Some(crate::numeric::op_norm(b))))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn op_norm_at_most(&self, q: &Rational) -> bool {
        self.blocks.iter().all(|b| b.op_norm_at_most(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn g(n: i64, d: i64) -> Gauss {
        Gauss::ratio(n, d)
    }

    #[test]
    fn solve_and_inverse() {
        let a = QMat::from_rows(vec![vec![g(2, 1), g(1, 1)], vec![g(1, 1), Gauss::i()]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), QMat::identity(2));
        let sing = QMat::from_rows(vec![vec![g(1, 1), g(2, 1)], vec![g(2, 1), g(4, 1)]]);
        assert!(sing.inverse().is_err());
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn psd_checks() {
        let p = QMat::from_rows(vec![vec![g(1, 2), g(1, 2)], vec![g(1, 2), g(1, 2)]]);
        assert!(p.is_psd());
        let n = QMat::from_rows(vec![vec![g(1, 1), g(2, 1)], vec![g(2, 1), g(1, 1)]]);
        assert!(!n.is_psd());
        assert!(QMat::zeros(3, 3).is_psd());
    }

    #[test]
    fn op_norm_certified() {
        let x = QMat::from_rows(vec![vec![g(0, 1), g(1, 1)], vec![g(0, 1), g(0, 1)]]);
        let u = x.op_norm_upper(20, None);
        assert!(u >= rat(1, 1) && u - rat(1, 1) < crate::scalar::pow2_neg(20));
        let h = QMat::from_rows(vec![vec![g(1, 1), g(1, 1)], vec![g(1, 1), g(1, 1)]]);
        let u = h.op_norm_upper(10, Some(2.0));
        assert_eq!(u, rat(2, 1));
    }
}
