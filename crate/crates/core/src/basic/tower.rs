use std::sync::Arc;

use num_traits::{One, Zero};

use super::algebra::{BaseExpectation, BasicConstructionAlgebra, ConcreteM1};
use crate::algebra::{AlgRef, CondExp, Elem, GramBasis};
use crate::presentation::{Presentation, Provenance};
use crate::scalar::{pow2_neg, Gauss, Rational};
use crate::search::SearchConfig;
use crate::subfactor::{pp_inf_search, IndexEstimate, IndexMethod, Inclusion, PositiveCandidates};
use crate::term::{Enumerator, Signature, Term};
use crate::{Error, Result};

/// `E_N` of an inclusion as a plain expectation.
#[derive(Debug)]
struct InclusionE(Inclusion);

impl CondExp for InclusionE {
    fn apply(&self, x: &Elem) -> Elem {
        self.0.cond_exp(x).expect("conditional expectation")
    }
}

/// `M₁` for `N ⊆ M` together with the inclusion `M ⊆ M₁`.
#[derive(Clone, Debug)]
pub struct InducedM1 {
    pub algebra: Arc<BasicConstructionAlgebra>,
    pub presentation: Presentation,
    /// `M ⊆ M₁`, with `E_M` declared.
    pub inclusion: Inclusion,
}

fn level_inclusion(
    alg: Arc<BasicConstructionAlgebra>,
    unit_special: bool,
    base: usize,
    level: usize,
    index: &Rational,
) -> Result<(Presentation, Inclusion)> {
    let r: AlgRef = alg.clone();
    let prov = if level == 1 { Provenance::InducedM1 } else { Provenance::TowerLevel(level) };
    let pres = Presentation::new(r, unit_special, prov).with_signature(Signature { base, jones: level });
    let n = pres.arity();
    let gens = (0..n - 1).map(|i| Term::gen(n, i)).collect();
    let inc = Inclusion::new(pres.clone(), gens)?
        .with_declared(Arc::new(BaseExpectation(alg)))
        .with_index(index.clone())
        .with_label(&format!("M{} in M{}", level - 1, level));
    Ok((pres, inc))
}

/// The presentation of `M₁` induced by an inclusion with known index and
/// expectation. Generators are those of `M` followed by `e`.
pub fn induce_m1(inc: &Inclusion, concrete: Option<ConcreteM1>) -> Result<InducedM1> {
    let index = inc.index.clone().ok_or(Error::NoIndex)?;
    if index.is_zero() {
        return Err(Error::Invalid("zero index".into()));
    }
    let mut bca = BasicConstructionAlgebra::new(
        inc.ambient.alg.clone(),
        Arc::new(InclusionE(inc.clone())),
        Rational::one() / &index,
    )
    .with_label(&format!("basic construction of {}", inc.label));
    if let Some(c) = concrete {
        bca = bca.with_concrete(c);
    }
    let algebra = Arc::new(bca);
    let base = inc.ambient.arity();
    let (presentation, inclusion) = level_inclusion(algebra.clone(), inc.ambient.unit_special, base, 1, &index)?;
    Ok(InducedM1 { algebra, presentation, inclusion })
}

/// The presentation of `N` whose special points are `E_N` of words of `M`.
pub fn induce_n_presentation(inc: &Inclusion) -> Result<Presentation> {
    let m = &inc.ambient;
    let alg = m.alg.as_ref();
    let n = m.arity();
    let mut gram = GramBasis::new();
    gram.try_add(alg, alg.unit());
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for w in &m.word_basis().words {
        if w.is_empty() {
            continue;
        }
        let wt = Term::monomial(n, w.clone(), Gauss::one());
        let x = inc.cond_exp(&m.eval(&wt)?)?;
        if gram.try_add(alg, x.clone()) {
            images.push(m.express(&x));
            gens.push(x);
        }
    }
    Ok(m.sub_presentation(alg.unit(), Term::one(n), gens, images, Provenance::InducedN))
}

/// One level `M_{n-1} ⊆ M_n` of the Jones tower.
#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub level: usize,
    pub presentation: Presentation,
    pub inclusion: Inclusion,
    pub index: Rational,
}

/// Iterated basic construction to the given depth; level `n` adds `eₙ`.
pub fn jones_tower(inc: &Inclusion, depth: usize, concrete: Option<ConcreteM1>) -> Result<Vec<TowerLevel>> {
    let m1 = induce_m1(inc, concrete)?;
    let index = inc.index.clone().ok_or(Error::NoIndex)?;
    let base = inc.ambient.arity();
    let mut out = vec![TowerLevel { level: 1, presentation: m1.presentation, inclusion: m1.inclusion, index: index.clone() }];
    let mut prev = m1.algebra;
    for level in 2..=depth {
        let r: AlgRef = prev.clone();
        let alg = Arc::new(
            BasicConstructionAlgebra::new(r, Arc::new(BaseExpectation(prev.clone())), Rational::one() / &index)
                .with_label(&format!("M{level}")),
        );
        let (presentation, inclusion) = level_inclusion(alg.clone(), inc.ambient.unit_special, base, level, &index)?;
        out.push(TowerLevel { level, presentation, inclusion, index: index.clone() });
        prev = alg;
    }
    Ok(out)
}

/// Index lower bounds from trace queries alone: the declared index and any
/// basis are ignored.
pub fn index_jump_estimate(inc: &Inclusion, cfg: SearchConfig) -> Result<IndexEstimate> {
    let mut j = inc.clone();
    j.basis = None;
    j.index = None;
    let mut est = pp_inf_search(&j, cfg, PositiveCandidates::default())?;
    est.method = IndexMethod::Jump;
    Ok(est)
}

/// The test points `z` against which a candidate `y ≈ E_N(x)` is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZSet {
    /// A word basis of `N`.
    Spanning,
    /// The first `n` words of the word basis of `N`.
    Words(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpSource {
    /// Term index in the enumeration of terms over the generators of `N`.
    Enumerated(u64),
    /// Trace-orthogonal solution against the z-set.
    Gram,
}

#[derive(Clone, Debug)]
pub struct JumpExpectation {
    /// Candidate, as a term of `M`.
    pub term: Term,
    pub source: JumpSource,
    pub z_count: usize,
    /// Whether the z-set spans `N`; only then is the candidate within
    /// `2^-k` of `E_N(x)` in 2-norm.
    pub spanning: bool,
    /// `max |tr((x - y) z)|²` over the z-set.
    pub residual: Rational,
}

const ENUM_PREFIX: u64 = 4096;

/// Searches `y ∈ N^†` with `|tr((x - y) z)| < 2^-k` for `z` in the z-set.
/// A prefix of the enumeration of `N`-terms is scanned first, then the
/// trace-orthogonal solution on the z-set is tried.
pub fn cond_exp_jump_search(inc: &Inclusion, t: &Term, k: u32, z: ZSet, cfg: SearchConfig) -> Result<JumpExpectation> {
    let m = &inc.ambient;
    let alg = m.alg.as_ref();
    let x = m.eval(t)?;
    let words = inc.sub_words()?;
    let zs: Vec<Elem> = match z {
        ZSet::Spanning => words.iter().map(|(_, e)| alg.adjoint(e)).collect(),
        ZSet::Words(n) => words.iter().take(n).map(|(_, e)| alg.adjoint(e)).collect(),
    };
    let tol = pow2_neg(2 * k);
    let residual = |y: &Elem| -> Rational {
        let d = alg.sub(&x, y);
        let mut r = Rational::zero();
        for z in &zs {
            let v = alg.trace(&alg.mul(&d, z)).norm_sqr();
            if v > r {
                r = v;
            }
        }
        r
    };
    let mut gram = GramBasis::new();
    let mut kept = Vec::new();
    for (i, z) in zs.iter().enumerate() {
        if gram.try_add(alg, alg.adjoint(z)) {
            kept.push(i);
        }
    }
    let spanning = gram.len() == inc.sub_dim()?;
    let z_count = zs.len();

    let en = Enumerator::new(inc.sub_gens.len(), true);
    let one = Term::one(m.arity());
    let prefix = cfg.budget.min(ENUM_PREFIX);
    for i in 0..prefix {
        let s = en.term_at(i)?.substitute(&inc.sub_gens, &one);
        let y = m.eval(&s)?;
        let r = residual(&y);
        if r < tol {
            return Ok(JumpExpectation { term: s, source: JumpSource::Enumerated(i), z_count, spanning, residual: r });
        }
    }
    let c = gram.coords(alg, &x);
    let mut term = Term::zero(m.arity());
    for (ci, &i) in c.iter().zip(&kept) {
        term = term.add(&words[i].0.scale(ci));
    }
    let y = m.eval(&term)?;
    let r = residual(&y);
    if r < tol {
        Ok(JumpExpectation { term, source: JumpSource::Gram, z_count, spanning, residual: r })
    } else {
        Err(Error::BudgetExhausted { budget: prefix + 1, stage: "jump expectation".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{amplification_m2, fixed_point_flip};
    use crate::scalar::rat;
    use crate::term::parse_with;

    #[test]
    fn depth_two_tower() {
        let g = amplification_m2();
        let levels = jones_tower(&g.inclusion, 2, g.concrete.clone()).unwrap();
        assert_eq!(levels.len(), 2);
        let m2 = &levels[1].presentation;
        let sig = Signature { base: 4, jones: 2 };
        let t = |s: &str| parse_with(s, sig).unwrap();
        let a = m2.alg.as_ref();
        let e1 = m2.eval(&t("e1")).unwrap();
        assert_eq!(a.trace(&e1).re, rat(1, 4));
        assert_eq!(a.trace(&m2.eval(&t("e2")).unwrap()).re, rat(1, 4));
        let lhs = m2.eval(&t("e1*e2*e1")).unwrap();
        assert!(a.elem_eq(&lhs, &a.scale(&e1, &Gauss::ratio(1, 4))));
        assert!(a.elem_eq(&m2.eval(&t("e1*e2*e2*e1")).unwrap(), &a.scale(&e1, &Gauss::ratio(1, 4))));
        // M₁ inside M₂ agrees with M₁ on its own
        let m1 = &levels[0].presentation;
        let x = parse_with("g1*e*g3 + e*g4*e", Signature::extended(4)).unwrap();
        assert_eq!(m1.norm_sqr(&x).unwrap(), m2.norm_sqr(&x.with_arity(6)).unwrap());
    }

    #[test]
    fn jump_expectation() {
        let g = amplification_m2();
        let inc = &g.inclusion;
        let cfg = SearchConfig { budget: 256, workers: 1 };
        let t = parse_with("g1 + g3", Signature::plain(4)).unwrap();
        let r = cond_exp_jump_search(inc, &parse_with("g1", Signature::plain(4)).unwrap(), 10, ZSet::Spanning, cfg).unwrap();
        assert!(matches!(r.source, JumpSource::Enumerated(_)));
        let r = cond_exp_jump_search(inc, &t.mul(&t), 10, ZSet::Spanning, cfg).unwrap();
        assert!(r.spanning);
        let want = inc.cond_exp(&inc.ambient.eval(&t.mul(&t)).unwrap()).unwrap();
        assert_eq!(inc.ambient.eval(&r.term).unwrap(), want);
        let r = cond_exp_jump_search(inc, &t, 10, ZSet::Words(1), cfg).unwrap();
        assert!(!r.spanning);
    }

    #[test]
    fn jump_index_is_monotone() {
        let g = fixed_point_flip();
        let est = index_jump_estimate(&g.inclusion, SearchConfig { budget: 4000, workers: 2 }).unwrap();
        assert_eq!(est.method, IndexMethod::Jump);
        assert!(est.history.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(est.inv_upper >= rat(1, 2));
    }

    #[test]
    fn induced_n_generates_sub() {
        let g = amplification_m2();
        let n = induce_n_presentation(&g.inclusion).unwrap();
        assert_eq!(n.word_basis().words.len(), 4);
        let root = n.to_root(&Term::gen(n.arity(), 0));
        assert_eq!(g.inclusion.cond_exp_term(&root).unwrap(), root);
    }
}
