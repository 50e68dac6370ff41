//! Inclusions `N ⊆ M`, conditional expectations, index estimates and
//! Pimsner-Popa bases.

mod index;
mod pp;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

pub use index::{index_pp_inf, pp_inf_search, pp_ratio, IndexEstimate, IndexMethod, PositiveCandidates};
pub use pp::{
    cond_exp_from_basis, construct_pp_basis, index_from_basis, pp_expand, verify_pp_basis, ClauseResult, PPBasis,
    PPCertificate,
};

use crate::algebra::{CondExp, Elem, ProjectionE};
use crate::numeric::{to_cmat, CMat};
use crate::presentation::Presentation;
use crate::scalar::Rational;
use crate::term::Term;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondExpSource {
    Declared,
    Basis,
    Backend,
}

impl fmt::Display for CondExpSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CondExpSource::Declared => "declared",
            CondExpSource::Basis => "basis",
            CondExpSource::Backend => "backend",
        })
    }
}

/// Float orthonormal basis of `N`, for prefilters.
#[derive(Debug)]
pub struct NumCondExp {
    basis: Vec<CMat>,
    weights: Vec<f64>,
}

impl NumCondExp {
    fn tr(&self, m: &CMat) -> Complex64 {
        self.weights.iter().enumerate().map(|(i, w)| m[(i, i)] * *w).sum()
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for b in &self.basis {
            out += b * self.tr(&(b.adjoint() * x));
        }
        out
    }

    /// `‖E(x)‖₂²`.
    pub fn norm_sqr(&self, x: &CMat) -> f64 {
        self.basis.iter().map(|b| self.tr(&(b.adjoint() * x)).norm_sqr()).sum()
    }
}

/// A unital inclusion `N ⊆ M` with `N` generated by the images of its
/// generators in `M`.
#[derive(Clone)]
pub struct Inclusion {
    pub ambient: Presentation,
    pub sub_gens: Vec<Term>,
    pub declared: Option<Arc<dyn CondExp>>,
    pub index: Option<Rational>,
    pub priority: Vec<CondExpSource>,
    pub label: String,
    pub basis: Option<Arc<PPBasis>>,
    backend: Arc<OnceLock<Arc<ProjectionE>>>,
    numeric: Arc<OnceLock<Option<NumCondExp>>>,
    sub_words: Arc<OnceLock<Vec<(Term, Elem)>>>,
}

impl fmt::Debug for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Inclusion")
            .field("label", &self.label)
            .field("sub_gens", &self.sub_gens.len())
            .field("index", &self.index)
            .field("priority", &self.priority)
            .finish()
    }
}

impl Inclusion {
    pub fn new(ambient: Presentation, sub_gens: Vec<Term>) -> Result<Self> {
        for t in &sub_gens {
            t.check_arity(ambient.arity())?;
        }
        Ok(Self {
            ambient,
            sub_gens,
            declared: None,
            index: None,
            priority: vec![CondExpSource::Declared, CondExpSource::Basis, CondExpSource::Backend],
            label: "inclusion".into(),
            basis: None,
            backend: Arc::default(),
            numeric: Arc::default(),
            sub_words: Arc::default(),
        })
    }

    pub fn with_declared(mut self, e: Arc<dyn CondExp>) -> Self {
        self.declared = Some(e);
        self
    }

    pub fn with_index(mut self, index: Rational) -> Self {
        self.index = Some(index);
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_priority(mut self, p: Vec<CondExpSource>) -> Self {
        self.priority = p;
        self
    }

    pub fn with_basis(mut self, b: PPBasis) -> Self {
        self.basis = Some(Arc::new(b));
        self
    }

    /// The trivial inclusion `M ⊆ M`.
    pub fn trivial(ambient: Presentation) -> Self {
        let n = ambient.arity();
        let gens = (0..n).map(|i| Term::gen(n, i)).collect();
        Self::new(ambient, gens).expect("own generators").with_index(Rational::from_integer(1.into()))
    }

    pub fn sub_elems(&self) -> Result<Vec<Elem>> {
        self.sub_gens.iter().map(|t| self.ambient.eval(t)).collect()
    }

    /// Least-squares expectation onto the span of `N` in the backend.
    pub fn backend(&self) -> Result<Arc<ProjectionE>> {
        if let Some(b) = self.backend.get() {
            return Ok(b.clone());
        }
        let gens = self.sub_elems()?;
        let b = Arc::new(ProjectionE::generated(self.ambient.alg.clone(), &gens));
        Ok(self.backend.get_or_init(|| b).clone())
    }

    /// Words in the generators of `N`, as terms of `M`, whose values form a
    /// basis of `N`.
    pub fn sub_words(&self) -> Result<&[(Term, Elem)]> {
        if let Some(w) = self.sub_words.get() {
            return Ok(w);
        }
        let alg = self.ambient.alg.as_ref();
        let n = self.ambient.arity();
        let gens = self.sub_elems()?;
        let mut letters: Vec<(Term, Elem)> = Vec::new();
        for (t, g) in self.sub_gens.iter().zip(&gens) {
            letters.push((t.clone(), g.clone()));
            letters.push((t.adjoint(), alg.adjoint(g)));
        }
        let mut basis = crate::algebra::GramBasis::new();
        let one = (Term::one(n), alg.unit());
        basis.try_add(alg, one.1.clone());
        let mut out = vec![one.clone()];
        let mut frontier = vec![one];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (t, x) in &frontier {
                for (lt, lx) in &letters {
                    let z = alg.mul(x, lx);
                    if basis.try_add(alg, z.clone()) {
                        let zt = t.mul(lt);
                        out.push((zt.clone(), z.clone()));
                        next.push((zt, z));
                    }
                }
            }
            frontier = next;
        }
        Ok(self.sub_words.get_or_init(|| out))
    }

    pub fn sub_dim(&self) -> Result<usize> {
        Ok(self.backend()?.basis.len())
    }

    pub fn cond_exp_backend(&self, x: &Elem) -> Result<Elem> {
        Ok(self.backend()?.apply(x))
    }

    pub fn cond_exp_via(&self, src: CondExpSource, x: &Elem) -> Result<Elem> {
        match src {
            CondExpSource::Declared => Ok(self.declared.as_ref().ok_or(Error::NoCondExp)?.apply(x)),
            CondExpSource::Backend => self.cond_exp_backend(x),
            CondExpSource::Basis => {
                let b = self.basis.as_ref().ok_or(Error::NoCondExp)?;
                pp::cond_exp_elem_from_basis(self, b, x, 40)
            }
        }
    }

    pub fn available(&self, src: CondExpSource) -> bool {
        match src {
            CondExpSource::Declared => self.declared.is_some(),
            CondExpSource::Basis => self.basis.is_some(),
            CondExpSource::Backend => true,
        }
    }

    /// `E_N(x)` from the first available source in priority order.
    pub fn cond_exp(&self, x: &Elem) -> Result<Elem> {
        let src = self.priority.iter().copied().find(|s| self.available(*s)).ok_or(Error::NoCondExp)?;
        self.cond_exp_via(src, x)
    }

    /// A term within `2^-k` of `E_N(t)`; exact in finite backends.
    pub fn cond_exp_presented(&self, t: &Term, _k: u32) -> Result<Term> {
        let x = self.ambient.eval(t)?;
        Ok(self.ambient.express(&self.cond_exp(&x)?))
    }

    pub fn cond_exp_term(&self, t: &Term) -> Result<Term> {
        self.cond_exp_presented(t, 0)
    }

    pub fn numeric(&self) -> Option<&NumCondExp> {
        self.numeric
            .get_or_init(|| {
                self.ambient.numeric()?;
                let alg = self.ambient.alg.as_ref();
                let weights = alg.dense_trace_weights()?;
                let b = self.backend().ok()?;
                let mut basis: Vec<CMat> = Vec::new();
                let tr = |m: &CMat| -> Complex64 { weights.iter().enumerate().map(|(i, w)| m[(i, i)] * *w).sum() };
                for e in &b.basis.elems {
                    let mut v = to_cmat(&alg.dense(e)?);
                    for u in &basis {
                        let c = tr(&(u.adjoint() * &v));
                        v -= u * c;
                    }
                    let n = tr(&(v.adjoint() * &v)).re.sqrt();
                    if n > 1e-12 {
                        basis.push(v / Complex64::new(n, 0.0));
                    }
                }
                Some(NumCondExp { basis, weights })
            })
            .as_ref()
    }

    /// Integer part of the declared index.
    pub fn index_floor(&self) -> Result<usize> {
        let i = self.index.as_ref().ok_or(Error::NoIndex)?;
        i.floor().to_integer().try_into().map_err(|_| Error::Resource("index too large".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::matrix::QMat;
    use crate::presentation::Provenance;
    use crate::scalar::Gauss;
    use crate::term::parse_term;

    /// M₂ ⊂ M₂⊗M₂ with N generated by g1 = e₁₂⊗1.
    pub(crate) fn amp() -> Inclusion {
        let i2 = QMat::identity(2);
        let gens = vec![
            QMat::unit(2, 0, 1).kron(&i2),
            i2.kron(&QMat::unit(2, 0, 1)),
        ];
        let a = MatrixAlgebra::full(4, gens).unwrap();
        let p = Presentation::new(Arc::new(a), true, Provenance::MatrixBackend);
        Inclusion::new(p, vec![parse_term("g1", 2).unwrap()]).unwrap()
    }

    #[test]
    fn backend_expectation_axioms() {
        let inc = amp();
        let p = &inc.ambient;
        assert_eq!(inc.sub_dim().unwrap(), 4);
        // a ⊗ b ↦ a·tr(b)
        let x = p.eval(&parse_term("g1*g2", 2).unwrap()).unwrap();
        assert!(p.alg.is_zero_elem(&inc.cond_exp(&x).unwrap()));
        let y = p.eval(&parse_term("g1*g2*g2'", 2).unwrap()).unwrap();
        let g1 = p.eval(&parse_term("g1", 2).unwrap()).unwrap();
        let half = p.alg.scale(&g1, &Gauss::ratio(1, 2));
        assert!(p.alg.elem_eq(&inc.cond_exp(&y).unwrap(), &half));
        // bimodule property
        let n1 = p.eval(&parse_term("g1 + (2/3)*g1'*g1", 2).unwrap()).unwrap();
        let z = p.eval(&parse_term("g2 + g1*g2' + 1", 2).unwrap()).unwrap();
        let lhs = inc.cond_exp(&p.alg.mul(&p.alg.mul(&n1, &z), &n1)).unwrap();
        let rhs = p.alg.mul(&p.alg.mul(&n1, &inc.cond_exp(&z).unwrap()), &n1);
        assert!(p.alg.elem_eq(&lhs, &rhs));
        assert_eq!(inc.cond_exp_term(&Term::one(2)).unwrap(), Term::one(2));
    }

    #[test]
    fn numeric_expectation_matches() {
        let inc = amp();
        let ne = inc.numeric().unwrap();
        let t = parse_term("g1*g2 + (1/2)*g2'*g2 + g1'", 2).unwrap();
        let x = inc.ambient.eval(&t).unwrap();
        let ex = inc.cond_exp(&x).unwrap();
        let exact = inc.ambient.alg.two_norm_sqr(&ex);
        let xd = to_cmat(&inc.ambient.alg.dense(&x).unwrap());
        assert!((ne.norm_sqr(&xd) - crate::scalar::to_f64(&exact)).abs() < 1e-12);
    }
}
