//! Presentations: an exact algebra seen through its special points, with
//! the 2-norm oracle and everything derived from it.

mod corner;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, ToPrimitive, Zero};

pub use corner::CornerAlgebra;

use num_complex::Complex64;

use crate::algebra::{AlgRef, Elem, GramBasis, LazyWordBasis, WordBasis};
use crate::numeric::{to_cmat, CMat};
use crate::point::ComputablePoint;
use crate::scalar::{pow2_neg, sqrt_approx, Gauss, Rational};
use crate::term::{flat_bound, scale_into_ball, Enumerator, FlatBound, FlatMode, OpNormOracle, Signature, Term};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    MatrixBackend,
    CornerOf(Box<Provenance>),
    InducedM1,
    InducedN,
    TowerLevel(usize),
    Diagram,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::MatrixBackend => write!(f, "matrix-backend"),
            Provenance::CornerOf(p) => write!(f, "corner-of({p})"),
            Provenance::InducedM1 => write!(f, "induced-m1"),
            Provenance::InducedN => write!(f, "induced-n"),
            Provenance::TowerLevel(n) => write!(f, "tower-level({n})"),
            Provenance::Diagram => write!(f, "diagram"),
        }
    }
}

#[derive(Clone)]
pub struct Presentation {
    pub alg: AlgRef,
    /// Whether the constant `1` counts as a special point.
    pub unit_special: bool,
    pub provenance: Provenance,
    pub sig: Signature,
    words: Arc<LazyWordBasis>,
    enumerator: Arc<OnceLock<Enumerator>>,
    numeric: Arc<OnceLock<Option<NumModel>>>,
    /// Images of the generators and of `1` as terms of the root
    /// presentation, for corners.
    root_map: Option<Arc<(Vec<Term>, Term)>>,
    parent_map: Option<Arc<(Vec<Term>, Term)>>,
}

/// Floating copy of the generators, used only to skip hopeless candidates.
#[derive(Debug)]
pub struct NumModel {
    gens: Vec<CMat>,
    stars: Vec<CMat>,
    unit: CMat,
    weights: Vec<f64>,
}

impl NumModel {
    pub fn eval(&self, t: &Term) -> CMat {
        let n = self.unit.nrows();
        let mut acc = CMat::zeros(n, n);
        for (w, c) in t.monomials() {
            let mut m = self.unit.clone();
            for l in w.letters() {
                let g = if l.is_adjoint() { &self.stars[l.gen()] } else { &self.gens[l.gen()] };
                m *= g;
            }
            acc += m * c.to_c64();
        }
        acc
    }

    pub fn trace(&self, m: &CMat) -> Complex64 {
        self.weights.iter().enumerate().map(|(i, w)| m[(i, i)] * *w).sum()
    }

    pub fn two_norm(&self, m: &CMat) -> f64 {
        self.trace(&(m.adjoint() * m)).re.max(0.0).sqrt()
    }

    pub fn op_norm(&self, m: &CMat) -> f64 {
        crate::numeric::cop_norm(m)
    }
}

impl fmt::Debug for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Presentation")
            .field("alg", &self.alg.name())
            .field("arity", &self.arity())
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl Presentation {
    pub fn new(alg: AlgRef, unit_special: bool, provenance: Provenance) -> Self {
        let sig = Signature::plain(alg.arity());
        Self {
            alg,
            unit_special,
            provenance,
            sig,
            words: Arc::default(),
            enumerator: Arc::default(),
            numeric: Arc::default(),
            root_map: None,
            parent_map: None,
        }
    }

    pub fn numeric(&self) -> Option<&NumModel> {
        self.numeric
            .get_or_init(|| {
                let weights = self.alg.dense_trace_weights()?;
                let mut gens = Vec::new();
                for i in 0..self.arity() {
                    gens.push(to_cmat(&self.alg.dense(&self.alg.generator(i))?));
                }
                let stars = gens.iter().map(|g| g.adjoint()).collect();
                let unit = to_cmat(&self.alg.dense(&self.alg.unit())?);
                Some(NumModel { gens, stars, unit, weights })
            })
            .as_ref()
    }

    /// A term of the presentation this corner was cut from, with the same value.
    pub fn to_parent(&self, t: &Term) -> Term {
        match &self.parent_map {
            Some(m) => t.substitute(&m.0, &m.1),
            None => t.clone(),
        }
    }

    /// The same point as a term of the root presentation.
    pub fn to_root(&self, t: &Term) -> Term {
        match &self.root_map {
            Some(m) => t.substitute(&m.0, &m.1),
            None => t.clone(),
        }
    }

    pub fn with_signature(mut self, sig: Signature) -> Self {
        self.sig = sig;
        self
    }

    pub fn arity(&self) -> usize {
        self.alg.arity()
    }

    pub fn enumerator(&self) -> &Enumerator {
        self.enumerator.get_or_init(|| Enumerator::new(self.arity(), self.unit_special))
    }

    pub fn word_basis(&self) -> &WordBasis {
        self.words.get(self.alg.as_ref())
    }

    pub fn eval(&self, t: &Term) -> Result<Elem> {
        if t.arity() != self.arity() {
            t.check_arity(self.arity())?;
        }
        self.alg.eval(t)
    }

    /// Exact `‖t‖₂²`.
    pub fn norm_sqr(&self, t: &Term) -> Result<Rational> {
        Ok(self.alg.two_norm_sqr(&self.eval(t)?))
    }

    /// Dyadic `q` with `|‖t‖₂ - q| < 2^-k`.
    pub fn eval_two_norm(&self, t: &Term, k: u32) -> Result<Rational> {
        Ok(sqrt_approx(&self.norm_sqr(t)?, k))
    }

    /// `tr(s* t)` within `2^-k`, by polarization over four norm queries.
    pub fn trace_inner(&self, s: &Term, t: &Term, k: u32) -> Result<Gauss> {
        if s.arity() != t.arity() {
            return Err(Error::ArityMismatch { expected: s.arity(), got: t.arity() });
        }
        let ns = self.eval_two_norm(s, 0)?;
        let nt = self.eval_two_norm(t, 0)?;
        let bound = ns + nt + Rational::from_integer(3.into());
        let two_n1 = (bound * Rational::from_integer(2.into()) + Rational::one()).ceil().to_integer();
        let extra = two_n1.bits() as u32;
        let m = k + extra + 1;
        let mut acc = Gauss::zero();
        for j in 0..4u32 {
            let st = s.add(&t.scale(&Gauss::i_pow(j)));
            let q = self.eval_two_norm(&st, m)?;
            acc = acc + Gauss::i_pow(4 - j).scale(&(&q * &q));
        }
        Ok(acc.scale(&Rational::new(1.into(), 4.into())))
    }

    /// Exact trace of a term's evaluation.
    pub fn trace_exact(&self, t: &Term) -> Result<Gauss> {
        Ok(self.alg.trace(&self.eval(t)?))
    }

    /// `tr(t)` within `2^-k` as `⟨1, t⟩`, recovering the identity by search
    /// when `1` is not special.
    pub fn trace(&self, t: &Term, k: u32, budget: u64) -> Result<Gauss> {
        let one = if self.unit_special {
            Term::one(self.arity())
        } else {
            // ‖u - 1‖₂ ‖t‖₂ < 2^-(k+1)
            let nt = self.eval_two_norm(t, 0)? + Rational::one();
            let extra = nt.ceil().to_integer().bits() as u32;
            crate::search::find_identity(self, k + 1 + extra, budget)?
        };
        self.trace_inner(&one, t, k + 1)
    }

    pub fn flat_bound(&self, t: &Term, mode: FlatMode, k: u32) -> Result<FlatBound> {
        flat_bound(t, mode, Some(self), k)
    }

    /// Exact `‖t‖ ≤ 1` in the concrete model, or the universal bound.
    pub fn in_unit_ball(&self, t: &Term) -> Result<(bool, FlatMode)> {
        let x = self.eval(t)?;
        match self.alg.op_norm_at_most(&x, &Rational::one()) {
            Some(b) => Ok((b, FlatMode::Model)),
            None => Ok((t.l1_bound() <= Rational::one(), FlatMode::Universal)),
        }
    }

    /// Presentation of the corner by an exactly known projection.
    pub fn corner(&self, p: &ComputablePoint) -> Result<Presentation> {
        let pe = match &p.exact {
            Some(e) => e.clone(),
            None => self.eval(&p.resolve(64)?)?,
        };
        if !self.alg.is_projection(&pe) {
            return Err(Error::NotProjection("corner requires an exact projection".into()));
        }
        let tr = self.alg.trace(&pe).re;
        if tr.is_zero() {
            return Err(Error::DegenerateCorner("projection has trace 0".into()));
        }
        let local = match &p.exact_term {
            Some(t) => t.clone(),
            None => self.express(&pe),
        };
        // generators p·w·p over the spanning words, kept when independent
        let parent = self.alg.as_ref();
        let mut gram = GramBasis::new();
        gram.try_add(parent, pe.clone());
        let mut gens = Vec::new();
        let mut images = Vec::new();
        let n = self.arity();
        for w in &self.word_basis().words {
            if w.is_empty() {
                continue;
            }
            let wt = Term::monomial(n, w.clone(), Gauss::one());
            let x = CornerAlgebra::compress_in(parent, &pe, &self.eval(&wt)?);
            if gram.try_add(parent, x.clone()) {
                gens.push(x);
                images.push(local.mul(&wt).mul(&local));
            }
        }
        let prov = Provenance::CornerOf(Box::new(self.provenance.clone()));
        Ok(self.sub_presentation(pe, local, gens, images, prov))
    }

    /// The presentation generated by elements `gens` of `self` (denoted by
    /// `images`) inside the corner by `unit` (denoted by `unit_term`).
    pub fn sub_presentation(
        &self,
        unit: Elem,
        unit_term: Term,
        gens: Vec<Elem>,
        images: Vec<Term>,
        provenance: Provenance,
    ) -> Presentation {
        let alg: AlgRef = Arc::new(CornerAlgebra::new(self.alg.clone(), unit, gens));
        let root_images = images.iter().map(|t| self.to_root(t)).collect();
        let root_unit = self.to_root(&unit_term);
        let mut out = Presentation::new(alg, self.unit_special, provenance);
        out.root_map = Some(Arc::new((root_images, root_unit)));
        out.parent_map = Some(Arc::new((images, unit_term)));
        out
    }


    /// An exact term for an element of the generated algebra.
    pub fn express(&self, x: &Elem) -> Term {
        self.word_basis().express(self.alg.as_ref(), x)
    }

    /// A term within `2^-k` of `x` (op-norm ≤ 1) whose model bound is < 1.
    pub fn kaplansky_approx(&self, x: &Elem, k: u32) -> Result<Term> {
        if let Some(false) = self.alg.op_norm_at_most(x, &Rational::one()) {
            return Err(Error::Invalid("element is not in the unit ball".into()));
        }
        let t = self.express(x);
        let back = self.eval(&t)?;
        if !self.alg.elem_eq(&back, x) {
            return Err(Error::Unrealizable("element outside the generated algebra".into()));
        }
        let eta = pow2_neg(k + 1);
        Ok(scale_into_ball(&t, &eta))
    }

    /// Floating op-norm estimate, for prefilters only.
    pub fn op_norm_estimate(&self, x: &Elem) -> Option<f64> {
        self.alg.dense(x).map(|d| crate::numeric::op_norm(&d))
    }
}

impl OpNormOracle for Presentation {
    fn op_norm_upper(&self, t: &Term, k: u32) -> Result<Rational> {
        let x = self.eval(t)?;
        self.alg.op_norm_upper(&x, k).ok_or(Error::NoBackend)
    }
}

/// `|q|` as f64, for reporting.
pub fn to_f64_abs(q: &Rational) -> f64 {
    q.abs().to_f64().unwrap_or(f64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::matrix::QMat;
    use crate::scalar::rat;
    use crate::term::parse_term;

    pub(crate) fn m2_pres(unit: bool) -> Presentation {
        let a = MatrixAlgebra::full(2, vec![QMat::unit(2, 0, 0), QMat::unit(2, 1, 1)]).unwrap();
        Presentation::new(Arc::new(a), unit, Provenance::MatrixBackend)
    }

    #[test]
    fn norm_examples() {
        let p = m2_pres(true);
        let one = Term::one(2);
        let q = p.eval_two_norm(&one, 10).unwrap();
        assert!((q - rat(1, 1)).abs() < pow2_neg(10));
        assert!(p.eval_two_norm(&Term::zero(2), 10).unwrap().is_zero());
        let g = parse_term("g1", 2).unwrap();
        let q = p.eval_two_norm(&g, 20).unwrap();
        assert!((crate::scalar::to_f64(&q) - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn polarization() {
        let p = m2_pres(true);
        let g1 = parse_term("g1", 2).unwrap();
        let g2 = parse_term("g2", 2).unwrap();
        let z = p.trace_inner(&g1, &g2, 12).unwrap();
        assert!(z.abs_bound() < pow2_neg(12));
        let one = Term::one(2);
        let z = p.trace_inner(&one, &one, 12).unwrap();
        assert!((z.re - rat(1, 1)).abs() < pow2_neg(12));
    }

    #[test]
    fn corner_by_unit_is_full() {
        let p = m2_pres(true);
        let c = p.corner(&ComputablePoint::from_term(Term::one(2), None)).unwrap();
        let g = parse_term("g1", 2).unwrap();
        assert_eq!(c.norm_sqr(&g).unwrap(), p.norm_sqr(&g).unwrap());
    }

    #[test]
    fn kaplansky_generator() {
        let p = m2_pres(true);
        let x = p.alg.generator(0);
        let t = p.kaplansky_approx(&x, 5).unwrap();
        let b = p.flat_bound(&t, FlatMode::Model, 10).unwrap();
        assert!(b.below_one());
    }
}
