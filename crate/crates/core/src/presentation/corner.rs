use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{AlgRef, Algebra, Elem};
use crate::matrix::QMat;
use crate::scalar::{Gauss, Rational};

/// The corner `pAp` with unit `p`, trace `tr/tr(p)` and generators given
/// as compressed elements `p·w·p`. The unit and the generators are a
/// linear basis of the corner.
#[derive(Debug)]
pub struct CornerAlgebra {
    pub parent: AlgRef,
    pub p: Elem,
    pub tr_p: Rational,
    pub gens: Vec<Elem>,
}

impl CornerAlgebra {
    /// `p` must be an exact nonzero projection of `parent`, and each
    /// generator must satisfy `g = p g p`.
    pub fn new(parent: AlgRef, p: Elem, gens: Vec<Elem>) -> Self {
        let tr_p = parent.trace(&p).re;
        assert!(!tr_p.is_zero(), "corner by the zero projection");
        // flatten nested corners onto the root algebra
        if let Some(root) = parent.corner_root() {
            let tr_root = root.trace(&p).re;
            return Self { parent: root, p, tr_p: tr_root, gens };
        }
        Self { parent, p, tr_p, gens }
    }

    pub fn compress_in(parent: &dyn Algebra, p: &Elem, x: &Elem) -> Elem {
        parent.mul(&parent.mul(p, x), p)
    }

    fn compress(&self, x: &Elem) -> Elem {
        Self::compress_in(self.parent.as_ref(), &self.p, x)
    }
}

impl Algebra for CornerAlgebra {
    fn name(&self) -> String {
        format!("corner of {}", self.parent.name())
    }

    fn arity(&self) -> usize {
        self.gens.len()
    }

    fn known_dim(&self) -> Option<usize> {
        Some(self.gens.len() + 1)
    }

    fn generator(&self, i: usize) -> Elem {
        self.gens[i].clone()
    }

    fn unit(&self) -> Elem {
        self.p.clone()
    }

    fn zero(&self) -> Elem {
        self.parent.zero()
    }

    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        self.parent.add(a, b)
    }

    fn scale(&self, a: &Elem, c: &Gauss) -> Elem {
        self.parent.scale(a, c)
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.parent.mul(a, b)
    }

    fn adjoint(&self, a: &Elem) -> Elem {
        self.parent.adjoint(a)
    }

    fn trace(&self, a: &Elem) -> Gauss {
        self.parent.trace(a).scale(&(Rational::from_integer(1.into()) / &self.tr_p))
    }

    fn min_projection_trace(&self) -> Rational {
        self.parent.min_projection_trace() / &self.tr_p
    }

    fn op_norm_upper(&self, a: &Elem, k: u32) -> Option<Rational> {
        self.parent.op_norm_upper(a, k)
    }

    fn op_norm_at_most(&self, a: &Elem, q: &Rational) -> Option<bool> {
        self.parent.op_norm_at_most(a, q)
    }

    fn dense(&self, a: &Elem) -> Option<QMat> {
        self.parent.dense(a)
    }

    fn dense_trace_weights(&self) -> Option<Vec<f64>> {
        let f = crate::scalar::to_f64(&self.tr_p);
        self.parent.dense_trace_weights().map(|w| w.into_iter().map(|x| x / f).collect())
    }

    fn spanning_set(&self) -> Vec<Elem> {
        self.parent.spanning_set().iter().map(|x| self.compress(x)).collect()
    }

    fn elem_eq(&self, a: &Elem, b: &Elem) -> bool {
        self.parent.elem_eq(a, b)
    }

    fn is_zero_elem(&self, a: &Elem) -> bool {
        self.parent.is_zero_elem(a)
    }

    fn corner_root(&self) -> Option<AlgRef> {
        Some(Arc::clone(&self.parent))
    }
}
