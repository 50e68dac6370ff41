//! Exact scalars: rationals and Gaussian rationals `ℚ(i)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // huge numerators or denominators: fall back to a scaled division
        let n = q.numer().to_f64().unwrap_or(f64::MAX);
        let d = q.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Height of a rational used by the enumeration order: `0` for zero,
/// otherwise `|a| + b - 1` for `a/b` in lowest terms.
pub fn rational_cost(q: &Rational) -> u64 {
    if q.is_zero() {
        return 0;
    }
    let a = q.numer().abs().to_u64().unwrap_or(u64::MAX / 4);
    let b = q.denom().to_u64().unwrap_or(u64::MAX / 4);
    a.saturating_add(b) - 1
}

/// All rationals of the given cost, in enumeration order: by denominator
/// ascending, positive before negative.
pub fn rationals_of_cost(c: u64) -> Vec<Rational> {
    if c == 0 {
        return vec![Rational::zero()];
    }
    let mut out = Vec::new();
    for b in 1..=c {
        let a = c + 1 - b;
        if a.gcd(&b) != 1 {
            continue;
        }
        let q = Rational::new(BigInt::from(a), BigInt::from(b));
        out.push(q.clone());
        out.push(-q);
    }
    out
}

/// Floor of `sqrt(r)` on the dyadic grid `2^-bits`, exact.
pub fn sqrt_floor_dyadic(r: &Rational, bits: u32) -> Rational {
    assert!(!r.is_negative(), "square root of a negative rational");
    // floor(sqrt(r * 4^bits)) / 2^bits
    let scaled = (r * Rational::from_integer(BigInt::one() << (2 * bits as usize))).floor();
    let n: BigUint = scaled.to_integer().to_biguint().unwrap_or_default();
    let s = n.sqrt();
    Rational::new(BigInt::from(s), BigInt::one() << bits as usize)
}

/// `q` with `|q - sqrt(r)| < 2^-k`, on the grid `2^-(k+1)`.
pub fn sqrt_approx(r: &Rational, k: u32) -> Rational {
    sqrt_floor_dyadic(r, k + 1)
}

/// Exact Gaussian rational `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gauss {
    pub re: Rational,
    pub im: Rational,
}

impl Gauss {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::real(int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::real(rat(n, d))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::real(Rational::one())
    }

    pub fn i() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|^2`, exact.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// `|re| + |im|`, a rational upper bound on `|z|`.
    pub fn abs_bound(&self) -> Rational {
        self.re.abs() + self.im.abs()
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        assert!(!n.is_zero(), "inverse of zero");
        Self::new(&self.re / &n, -&self.im / &n)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::new(&self.re * q, &self.im * q)
    }

    /// `i^j`.
    pub fn i_pow(j: u32) -> Self {
        match j % 4 {
            0 => Self::one(),
            1 => Self::i(),
            2 => -Self::one(),
            _ => -Self::i(),
        }
    }

    /// Enumeration height: sum of the component heights.
    pub fn cost(&self) -> u64 {
        rational_cost(&self.re) + rational_cost(&self.im)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    /// Canonical literal `(a/b + c/d i)`.
    pub fn literal(&self) -> String {
        format!(
            "({}/{} + {}/{} i)",
            self.re.numer(),
            self.re.denom(),
            self.im.numer(),
            self.im.denom()
        )
    }
}

/// All Gaussian rationals of the given cost, in enumeration order: real
/// part cost descending, then the real and imaginary rational orders.
pub fn gauss_of_cost(c: u64) -> Vec<Gauss> {
    let mut out = Vec::new();
    for re_cost in (0..=c).rev() {
        let im_cost = c - re_cost;
        for re in rationals_of_cost(re_cost) {
            for im in rationals_of_cost(im_cost) {
                out.push(Gauss::new(re.clone(), im));
            }
        }
    }
    out
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => write!(f, "{}{}{}i", self.re, if self.im.is_negative() { "" } else { "+" }, self.im),
        }
    }
}

impl Add for &Gauss {
    type Output = Gauss;
    fn add(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Add for Gauss {
    type Output = Gauss;
    fn add(self, o: Gauss) -> Gauss {
        &self + &o
    }
}

impl AddAssign<&Gauss> for Gauss {
    fn add_assign(&mut self, o: &Gauss) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl Sub for &Gauss {
    type Output = Gauss;
    fn sub(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Sub for Gauss {
    type Output = Gauss;
    fn sub(self, o: Gauss) -> Gauss {
        &self - &o
    }
}

impl Mul for &Gauss {
    type Output = Gauss;
    fn mul(self, o: &Gauss) -> Gauss {
        if self.im.is_zero() && o.im.is_zero() {
            return Gauss::real(&self.re * &o.re);
        }
        Gauss::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Mul for Gauss {
    type Output = Gauss;
    fn mul(self, o: Gauss) -> Gauss {
        &self * &o
    }
}

impl Neg for Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re, -self.im)
    }
}

impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re.clone(), -self.im.clone())
    }
}

impl From<Rational> for Gauss {
    fn from(q: Rational) -> Self {
        Gauss::real(q)
    }
}

/// A value known up to an explicit radius: `|true - mid| <= rad`.
#[derive(Clone, Debug, PartialEq)]
pub struct Approx {
    pub mid: Rational,
    pub rad: Rational,
}

impl Approx {
    pub fn exact(mid: Rational) -> Self {
        Self {
            mid,
            rad: Rational::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Certified `true < theta`.
    pub fn certainly_below(&self, theta: &Rational) -> bool {
        &(&self.mid + &self.rad) < theta
    }

    /// Certified `true >= theta`.
    pub fn certainly_at_least(&self, theta: &Rational) -> bool {
        &(&self.mid - &self.rad) >= theta
    }
}
