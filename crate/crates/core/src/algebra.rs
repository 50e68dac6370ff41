//! Exact finite-dimensional tracial *-algebras.

use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use crate::matrix::{BlockMat, QMat};
use crate::scalar::{Gauss, Rational};
use crate::term::{Letter, Term, Word};
use crate::{Error, Result};

/// An element of one of the concrete algebras.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Elem {
    Mat(BlockMat),
    /// `a + Σ bᵢ e cᵢ` over a base algebra.
    Ext(Box<ExtElem>),
    /// Coordinates in a fixed linear basis.
    Coords(Vec<Gauss>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtElem {
    pub a: Elem,
    pub pairs: Vec<(Elem, Elem)>,
}

impl Elem {
    pub fn as_mat(&self) -> Option<&BlockMat> {
        match self {
            Elem::Mat(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_ext(&self) -> Option<&ExtElem> {
        match self {
            Elem::Ext(e) => Some(e),
            _ => None,
        }
    }
}

/// An exact tracial *-algebra with a finite list of generators.
pub trait Algebra: Send + Sync + Debug {
    fn name(&self) -> String;
    fn arity(&self) -> usize;
    /// Image of generator `i` (0-based).
    fn generator(&self, i: usize) -> Elem;
    fn unit(&self) -> Elem;
    fn zero(&self) -> Elem;
    fn add(&self, a: &Elem, b: &Elem) -> Elem;
    fn scale(&self, a: &Elem, c: &Gauss) -> Elem;
    fn mul(&self, a: &Elem, b: &Elem) -> Elem;
    fn adjoint(&self, a: &Elem) -> Elem;
    /// Exact faithful normalized trace.
    fn trace(&self, a: &Elem) -> Gauss;
    /// Lower bound on the trace of any nonzero projection.
    fn min_projection_trace(&self) -> Rational;
    /// Certified operator-norm upper bound within `2^-k`, when a concrete
    /// model is available.
    fn op_norm_upper(&self, _a: &Elem, _k: u32) -> Option<Rational> {
        None
    }
    /// Exact `‖a‖ ≤ q` when a concrete model is available.
    fn op_norm_at_most(&self, _a: &Elem, _q: &Rational) -> Option<bool> {
        None
    }
    /// Dense matrix in a faithful representation, for floating oracles.
    fn dense(&self, _a: &Elem) -> Option<QMat> {
        None
    }
    /// Per-diagonal-entry trace weights of the [`dense`](Self::dense)
    /// representation.
    fn dense_trace_weights(&self) -> Option<Vec<f64>> {
        None
    }
    /// Cheap canonical coordinates, when the representation has them; they
    /// refer to `spanning_set`, in order.
    fn direct_coords(&self, _a: &Elem) -> Option<Vec<Gauss>> {
        None
    }
    /// Elements whose span is the algebra, used to build bases.
    fn spanning_set(&self) -> Vec<Elem>;
    /// For a corner, the algebra whose elements it shares.
    fn corner_root(&self) -> Option<AlgRef> {
        None
    }
    /// Dimension of the generated algebra, when known in advance.
    fn known_dim(&self) -> Option<usize> {
        None
    }

    fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.scale(b, &-Gauss::one()))
    }

    fn inner(&self, a: &Elem, b: &Elem) -> Gauss {
        self.trace(&self.mul(&self.adjoint(a), b))
    }

    fn two_norm_sqr(&self, a: &Elem) -> Rational {
        self.inner(a, a).re
    }

    fn is_zero_elem(&self, a: &Elem) -> bool {
        self.two_norm_sqr(a).is_zero()
    }

    fn elem_eq(&self, a: &Elem, b: &Elem) -> bool {
        a == b || self.is_zero_elem(&self.sub(a, b))
    }

    fn is_projection(&self, a: &Elem) -> bool {
        self.elem_eq(a, &self.adjoint(a)) && self.elem_eq(&self.mul(a, a), a)
    }

    fn eval(&self, t: &Term) -> Result<Elem> {
        t.check_arity(self.arity())?;
        let gens: Vec<Elem> = (0..self.arity()).map(|i| self.generator(i)).collect();
        let stars: Vec<Elem> = gens.iter().map(|g| self.adjoint(g)).collect();
        let mut acc = self.zero();
        for (w, c) in t.monomials() {
            let m = eval_word(self, w, &gens, &stars);
            acc = self.add(&acc, &self.scale(&m, c));
        }
        Ok(acc)
    }
}

fn eval_word<A: Algebra + ?Sized>(alg: &A, w: &Word, gens: &[Elem], stars: &[Elem]) -> Elem {
    let mut it = w.letters().iter();
    let Some(first) = it.next() else { return alg.unit() };
    let pick = |l: &Letter| if l.is_adjoint() { &stars[l.gen()] } else { &gens[l.gen()] };
    let mut acc = pick(first).clone();
    for l in it {
        acc = alg.mul(&acc, pick(l));
    }
    acc
}

pub type AlgRef = Arc<dyn Algebra>;

/// Linearly independent elements with an exact LDL* factorization of their
/// Gram matrix in the trace inner product.
#[derive(Clone, Debug, Default)]
pub struct GramBasis {
    pub elems: Vec<Elem>,
    /// Unit lower-triangular factor, row `i` has `i` entries.
    l: Vec<Vec<Gauss>>,
    d: Vec<Rational>,
}

impl GramBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    fn inner_products(&self, alg: &dyn Algebra, x: &Elem) -> Vec<Gauss> {
        self.elems.iter().map(|b| alg.inner(b, x)).collect()
    }

    /// Forward substitution: `y` with `L D y = v`... returns `w = L^{-1} v`.
    fn forward(&self, v: &[Gauss]) -> Vec<Gauss> {
        let mut w: Vec<Gauss> = Vec::with_capacity(v.len());
        for i in 0..v.len() {
            let mut s = v[i].clone();
            for (j, lij) in self.l[i].iter().enumerate() {
                if !lij.is_zero() && !w[j].is_zero() {
                    s = &s - &(lij * &w[j]);
                }
            }
            w.push(s);
        }
        w
    }

    /// Adds `x` if independent of the current elements.
    pub fn try_add(&mut self, alg: &dyn Algebra, x: Elem) -> bool {
        let v = self.inner_products(alg, &x);
        let w = self.forward(&v);
        let mut dn = alg.two_norm_sqr(&x);
        let mut row = Vec::with_capacity(w.len());
        for (j, wj) in w.iter().enumerate() {
            // row entry: conj(w_j)/d_j  (G = L D L*)
            let r = wj.conj().scale(&(Rational::one() / &self.d[j]));
            dn -= wj.norm_sqr() / &self.d[j];
            row.push(r);
        }
        if dn.is_zero() {
            return false;
        }
        self.l.push(row);
        self.d.push(dn);
        self.elems.push(x);
        true
    }

    /// Coefficients `c` of the orthogonal projection `Σ cᵢ Bᵢ` of `x` onto
    /// the span.
    pub fn coords(&self, alg: &dyn Algebra, x: &Elem) -> Vec<Gauss> {
        let v = self.inner_products(alg, x);
        self.solve(&v)
    }

    /// Solves `G c = v`.
    pub fn solve(&self, v: &[Gauss]) -> Vec<Gauss> {
        let n = v.len();
        let w = self.forward(v);
        let mut z: Vec<Gauss> = w.iter().zip(&self.d).map(|(wi, di)| wi.scale(&(Rational::one() / di))).collect();
        // back substitution with L*
        for i in (0..n).rev() {
            let mut s = z[i].clone();
            for k in i + 1..n {
                let lki = &self.l[k][i];
                if !lki.is_zero() && !z[k].is_zero() {
                    s = &s - &(&lki.conj() * &z[k]);
                }
            }
            z[i] = s;
        }
        z
    }

    pub fn combine(&self, alg: &dyn Algebra, c: &[Gauss]) -> Elem {
        let mut acc = alg.zero();
        for (b, ci) in self.elems.iter().zip(c) {
            if !ci.is_zero() {
                acc = alg.add(&acc, &alg.scale(b, ci));
            }
        }
        acc
    }

    pub fn project(&self, alg: &dyn Algebra, x: &Elem) -> Elem {
        self.combine(alg, &self.coords(alg, x))
    }

    pub fn from_spanning(alg: &dyn Algebra, it: impl IntoIterator<Item = Elem>) -> Self {
        let mut g = Self::new();
        for x in it {
            g.try_add(alg, x);
        }
        g
    }
}

/// Words in the generators whose evaluations form a basis, found
/// breadth-first in shortlex order.
#[derive(Clone, Debug)]
pub struct WordBasis {
    pub words: Vec<Word>,
    pub gram: GramBasis,
}

impl WordBasis {
    pub fn build(alg: &dyn Algebra, max_len: usize) -> Self {
        let arity = alg.arity();
        let mut gram = GramBasis::new();
        let mut words = Vec::new();
        if gram.try_add(alg, alg.unit()) {
            words.push(Word::empty());
        }
        let full = alg.known_dim();
        let mut frontier: Vec<(Word, Elem)> = vec![(Word::empty(), alg.unit())];
        let letters: Vec<(Letter, Elem)> = (0..arity)
            .flat_map(|g| {
                let x = alg.generator(g);
                let xs = alg.adjoint(&x);
                [(Letter::new(g, false), x), (Letter::new(g, true), xs)]
            })
            .collect();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (w, x) in &frontier {
                for (l, y) in &letters {
                    let nw = w.concat(&Word(vec![*l]));
                    let ny = alg.mul(x, y);
                    if gram.try_add(alg, ny.clone()) {
                        words.push(nw.clone());
                        next.push((nw, ny));
                        if Some(gram.len()) == full {
                            return Self { words, gram };
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Self { words, gram }
    }

    /// Exact term denoting `x` (its projection onto the generated
    /// subalgebra).
    pub fn express(&self, alg: &dyn Algebra, x: &Elem) -> Term {
        let c = self.gram.coords(alg, x);
        Term::from_monomials(alg.arity(), self.words.iter().cloned().zip(c))
    }
}

/// Conditional expectation onto a subalgebra, as an exact map.
pub trait CondExp: Send + Sync + Debug {
    fn apply(&self, x: &Elem) -> Elem;
}

/// Trace-orthogonal projection onto the span of a sub-basis.
#[derive(Debug)]
pub struct ProjectionE {
    pub alg: AlgRef,
    pub basis: GramBasis,
}

impl ProjectionE {
    pub fn new(alg: AlgRef, spanning: Vec<Elem>) -> Self {
        let basis = GramBasis::from_spanning(alg.as_ref(), spanning);
        Self { alg, basis }
    }

    /// Projection onto the unital *-subalgebra generated by `gens`.
    pub fn generated(alg: AlgRef, gens: &[Elem]) -> Self {
        let mut basis = GramBasis::new();
        let mut frontier = vec![alg.unit()];
        basis.try_add(alg.as_ref(), alg.unit());
        let mut letters = Vec::new();
        for g in gens {
            letters.push(g.clone());
            letters.push(alg.adjoint(g));
        }
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for x in &frontier {
                for y in &letters {
                    let z = alg.mul(x, y);
                    if basis.try_add(alg.as_ref(), z.clone()) {
                        next.push(z);
                    }
                }
            }
            frontier = next;
        }
        Self { alg, basis }
    }
}

impl CondExp for ProjectionE {
    fn apply(&self, x: &Elem) -> Elem {
        self.basis.project(self.alg.as_ref(), x)
    }
}

/// A multi-matrix algebra ⊕ᵢ M_{dᵢ} with rational trace weights.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    pub dims: Vec<usize>,
    pub weights: Vec<Rational>,
    pub gens: Vec<BlockMat>,
    pub label: String,
}

impl MatrixAlgebra {
    pub fn new(dims: Vec<usize>, weights: Vec<Rational>, gens: Vec<BlockMat>) -> Result<Self> {
        if dims.is_empty() || dims.len() != weights.len() {
            return Err(Error::Format("block dimensions and weights differ in length".into()));
        }
        if weights.iter().any(|w| *w <= Rational::zero()) || weights.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::Format("trace weights must be positive and sum to 1".into()));
        }
        for (i, g) in gens.iter().enumerate() {
            if g.dims() != dims {
                return Err(Error::Format(format!("generator {} has wrong block shape", i + 1)));
            }
            if !g.op_norm_at_most(&Rational::one()) {
                return Err(Error::Format(format!("generator {} is not a contraction", i + 1)));
            }
        }
        Ok(Self { dims, weights, gens, label: "matrix".into() })
    }

    /// A single full matrix algebra M_d with normalized trace.
    pub fn full(d: usize, gens: Vec<QMat>) -> Result<Self> {
        Self::new(vec![d], vec![Rational::one()], gens.into_iter().map(BlockMat::single).collect())
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn elem(m: BlockMat) -> Elem {
        Elem::Mat(m)
    }

    /// Matrix units of every block.
    pub fn matrix_units(&self) -> Vec<Elem> {
        let mut out = Vec::new();
        for (b, &d) in self.dims.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    let mut m = BlockMat::zeros(&self.dims);
                    m.blocks[b][(i, j)] = Gauss::one();
                    out.push(Elem::Mat(m));
                }
            }
        }
        out
    }
}

fn mat(a: &Elem) -> &BlockMat {
    a.as_mat().expect("matrix element expected")
}

impl Algebra for MatrixAlgebra {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn arity(&self) -> usize {
        self.gens.len()
    }

    fn generator(&self, i: usize) -> Elem {
        Elem::Mat(self.gens[i].clone())
    }

    fn unit(&self) -> Elem {
        Elem::Mat(BlockMat::identity(&self.dims))
    }

    fn zero(&self) -> Elem {
        Elem::Mat(BlockMat::zeros(&self.dims))
    }

    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        Elem::Mat(mat(a).add(mat(b)))
    }

    fn scale(&self, a: &Elem, c: &Gauss) -> Elem {
        Elem::Mat(mat(a).scale(c))
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        Elem::Mat(mat(a).mul(mat(b)))
    }

    fn adjoint(&self, a: &Elem) -> Elem {
        Elem::Mat(mat(a).adjoint())
    }

    fn trace(&self, a: &Elem) -> Gauss {
        mat(a).trace(&self.weights)
    }

    fn min_projection_trace(&self) -> Rational {
        self.dims
            .iter()
            .zip(&self.weights)
            .map(|(&d, w)| w / Rational::from_integer((d as i64).into()))
            .min()
            .expect("nonempty")
    }

    fn op_norm_upper(&self, a: &Elem, k: u32) -> Option<Rational> {
        Some(mat(a).op_norm_upper(k))
    }

    fn op_norm_at_most(&self, a: &Elem, q: &Rational) -> Option<bool> {
        Some(mat(a).op_norm_at_most(q))
    }

    fn dense(&self, a: &Elem) -> Option<QMat> {
        Some(mat(a).to_dense())
    }

    fn dense_trace_weights(&self) -> Option<Vec<f64>> {
        let mut w = Vec::new();
        for (&d, wt) in self.dims.iter().zip(&self.weights) {
            let x = crate::scalar::to_f64(wt) / d as f64;
            w.extend(std::iter::repeat_n(x, d));
        }
        Some(w)
    }

    fn direct_coords(&self, a: &Elem) -> Option<Vec<Gauss>> {
        Some(mat(a).blocks.iter().flat_map(|b| b.data.iter().cloned()).collect())
    }

    fn spanning_set(&self) -> Vec<Elem> {
        self.matrix_units()
    }

    fn elem_eq(&self, a: &Elem, b: &Elem) -> bool {
        a == b
    }

    fn is_zero_elem(&self, a: &Elem) -> bool {
        mat(a).is_zero()
    }

    fn is_projection(&self, a: &Elem) -> bool {
        mat(a).is_projection()
    }
}

/// Lazily built word basis attached to an algebra.
#[derive(Debug, Default)]
pub struct LazyWordBasis(OnceLock<WordBasis>);

impl LazyWordBasis {
    pub fn get(&self, alg: &dyn Algebra) -> &WordBasis {
        self.0.get_or_init(|| WordBasis::build(alg, 64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::term::parse_term;

    fn m2_units() -> MatrixAlgebra {
        MatrixAlgebra::full(2, vec![QMat::unit(2, 0, 0), QMat::unit(2, 1, 1), QMat::unit(2, 0, 1)]).unwrap()
    }

    #[test]
    fn trace_of_matrix_unit() {
        let a = m2_units();
        let x = a.eval(&parse_term("g1", 3).unwrap()).unwrap();
        assert_eq!(a.trace(&x), Gauss::ratio(1, 2));
        assert_eq!(a.two_norm_sqr(&x), rat(1, 2));
    }

    #[test]
    fn word_basis_expresses() {
        let a = m2_units();
        let wb = WordBasis::build(&a, 8);
        assert_eq!(wb.words.len(), 4);
        let x = a.eval(&parse_term("(1/3)*g3' + g1*g3", 3).unwrap()).unwrap();
        let t = wb.express(&a, &x);
        assert_eq!(a.eval(&t).unwrap(), x);
    }

    #[test]
    fn projection_e_onto_diagonal() {
        let a: AlgRef = Arc::new(m2_units());
        let diag = ProjectionE::generated(a.clone(), &[a.generator(0)]);
        assert_eq!(diag.basis.len(), 2);
        let x = a.eval(&parse_term("g3 + g1", 3).unwrap()).unwrap();
        assert_eq!(diag.apply(&x), a.generator(0));
    }
}
