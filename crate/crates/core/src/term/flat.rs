//! The ♭ norm bound.

use num_traits::{One, Zero};

use super::Term;
use crate::scalar::{Gauss, Rational};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlatMode {
    /// ℓ¹ coefficient bound; valid whenever every generator is a contraction.
    Universal,
    /// Operator norm in an attached finite-dimensional model.
    Model,
}

/// An upper bound on the operator norm of a term's evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatBound {
    pub value: Rational,
    pub mode: FlatMode,
}

impl FlatBound {
    pub fn below_one(&self) -> bool {
        self.value < Rational::one()
    }

    pub fn at_most_one(&self) -> bool {
        self.value <= Rational::one()
    }
}

/// Certified operator norm of a term in some concrete model.
pub trait OpNormOracle {
    /// An upper bound `q` on the operator norm with `q - norm < 2^-k`.
    fn op_norm_upper(&self, t: &Term, k: u32) -> Result<Rational>;
}

pub fn flat_bound(t: &Term, mode: FlatMode, model: Option<&dyn OpNormOracle>, k: u32) -> Result<FlatBound> {
    let value = match mode {
        FlatMode::Universal => t.l1_bound(),
        FlatMode::Model => model.ok_or(Error::NoBackend)?.op_norm_upper(t, k)?,
    };
    Ok(FlatBound { value, mode })
}

/// `(1 - η)·t`.
pub fn scale_into_ball(t: &Term, eta: &Rational) -> Term {
    if t.is_zero() || eta.is_zero() {
        return t.clone();
    }
    t.scale(&Gauss::real(Rational::one() - eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::term::parse_term;

    #[test]
    fn universal_examples() {
        let g = parse_term("g2", 2).unwrap();
        assert_eq!(flat_bound(&g, FlatMode::Universal, None, 10).unwrap().value, rat(1, 1));
        let h = parse_term("(1/2)*g1 + (1/2)*g2", 2).unwrap();
        assert_eq!(flat_bound(&h, FlatMode::Universal, None, 10).unwrap().value, rat(1, 1));
        assert_eq!(
            flat_bound(&h, FlatMode::Model, None, 10).unwrap_err(),
            Error::NoBackend
        );
    }

    #[test]
    fn scaling() {
        let g = parse_term("g1", 1).unwrap();
        let s = scale_into_ball(&g, &rat(1, 8));
        assert_eq!(s.l1_bound(), rat(7, 8));
        assert!(scale_into_ball(&Term::zero(1), &rat(1, 8)).is_zero());
    }
}
