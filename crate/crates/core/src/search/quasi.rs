use num_traits::{One, Zero};

use crate::algebra::Elem;
use crate::numeric::CMat;
use crate::presentation::{NumModel, Presentation};
use crate::scalar::{pow2_neg, sqrt_floor_dyadic, Rational};
use crate::term::{FlatMode, Term};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    /// A defect sits within precision of its threshold.
    Undecided,
}

#[derive(Clone, Debug)]
pub struct QuasiProjectionWitness {
    pub term: Term,
    pub epsilon: Rational,
    /// Exact squared defects `‖x - x*‖₂²` and `‖x - x²‖₂²`.
    pub defects_sqr: (Rational, Rational),
    pub mode: FlatMode,
    pub verdict: Verdict,
    /// The term evaluates to an exact projection.
    pub exact_projection: bool,
}

impl QuasiProjectionWitness {
    /// Dyadic upper bounds on the two defects.
    pub fn defect_bounds(&self) -> (Rational, Rational) {
        let up = |d: &Rational| sqrt_floor_dyadic(d, 40) + pow2_neg(40);
        (up(&self.defects_sqr.0), up(&self.defects_sqr.1))
    }
}

/// `ε²/48`.
pub fn projection_threshold(eps: &Rational) -> Rational {
    eps * eps / Rational::from_integer(48.into())
}

pub(crate) fn ball_check(pres: &Presentation, t: &Term, x: &Elem) -> (bool, FlatMode) {
    match pres.alg.op_norm_at_most(x, &Rational::one()) {
        Some(b) => (b, FlatMode::Model),
        None => (t.l1_bound() < Rational::one(), FlatMode::Universal),
    }
}

pub fn is_quasi_projection(pres: &Presentation, t: &Term, eps: &Rational) -> Result<QuasiProjectionWitness> {
    let x = pres.eval(t)?;
    Ok(quasi_projection_of(pres, t, &x, eps))
}

pub(crate) fn quasi_projection_of(pres: &Presentation, t: &Term, x: &Elem, eps: &Rational) -> QuasiProjectionWitness {
    let alg = pres.alg.as_ref();
    let theta = projection_threshold(eps);
    let th2 = &theta * &theta;
    let xs = alg.adjoint(x);
    let d1 = alg.two_norm_sqr(&alg.sub(x, &xs));
    let d2 = alg.two_norm_sqr(&alg.sub(x, &alg.mul(x, x)));
    let (ball, mode) = ball_check(pres, t, x);
    let exact_projection = d1.is_zero() && d2.is_zero();
    let verdict = if ball && d1 < th2 && d2 < th2 { Verdict::Accept } else { Verdict::Reject };
    QuasiProjectionWitness { term: t.clone(), epsilon: eps.clone(), defects_sqr: (d1, d2), mode, verdict, exact_projection }
}

/// Floating rejection of candidates that clearly fail; `true` means
/// "check exactly".
pub(crate) fn quasi_prefilter(num: &NumModel, m: &CMat, theta: f64) -> bool {
    let slack = theta * 1e-6 + 1e-9;
    if num.op_norm(m) > 1.0 + 1e-9 {
        return false;
    }
    let d1 = num.two_norm(&(m - m.adjoint()));
    if d1 > theta + slack {
        return false;
    }
    let d2 = num.two_norm(&(m - m * m));
    d2 <= theta + slack
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::matrix::QMat;
    use crate::presentation::Provenance;
    use crate::scalar::rat;
    use crate::term::parse_term;
    use std::sync::Arc;

    fn pres() -> Presentation {
        let a = MatrixAlgebra::full(2, vec![QMat::unit(2, 0, 0), QMat::unit(2, 0, 1)]).unwrap();
        Presentation::new(Arc::new(a), true, Provenance::MatrixBackend)
    }

    #[test]
    fn examples() {
        let p = pres();
        for eps in [rat(1, 2), rat(1, 1024)] {
            let w = is_quasi_projection(&p, &parse_term("g1", 2).unwrap(), &eps).unwrap();
            assert_eq!(w.verdict, Verdict::Accept);
            assert!(w.exact_projection);
        }
        // ½·1 has ‖x - x²‖₂ = ¼
        let w = is_quasi_projection(&p, &parse_term("(1/2)*1", 2).unwrap(), &rat(1, 2)).unwrap();
        assert_eq!(w.verdict, Verdict::Reject);
        assert_eq!(w.defects_sqr.1, rat(1, 16));
        // (1-δ)e11 + δ e12 stays in the ball; defects near δ
        let t = parse_term("(99999/100000)*g1 + (1/100000)*g2", 2).unwrap();
        let w = is_quasi_projection(&p, &t, &rat(1, 2)).unwrap();
        assert_eq!(w.verdict, Verdict::Accept);
        let w = is_quasi_projection(&p, &t, &rat(1, 64)).unwrap();
        assert_eq!(w.verdict, Verdict::Reject);
    }
}
