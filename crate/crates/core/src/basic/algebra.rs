use std::sync::Arc;


use crate::algebra::{AlgRef, Algebra, CondExp, Elem, ExtElem};
use crate::matrix::QMat;
use crate::numeric::op_norm;
use crate::scalar::{Gauss, Rational};

/// A matrix model of `M₁` on which `M` acts by `x ↦ dense(x) ⊗ 1_m`, with
/// the Jones projection given explicitly. The model is a full matrix
/// algebra carrying its normalized trace.
#[derive(Clone, Debug)]
pub struct ConcreteM1 {
    pub m: usize,
    pub e: QMat,
}

impl ConcreteM1 {
    pub fn lift(&self, x: &QMat) -> QMat {
        x.kron(&QMat::identity(self.m))
    }
}

/// The basic construction `⟨M, e⟩` with elements `a + Σ bᵢ e cᵢ`
/// (`a, bᵢ, cᵢ ∈ M`) and the product rule `(b e c)(b′ e c′) = b E(c b′) e c′`.
/// Generators are those of `M` followed by `e`.
#[derive(Debug)]
pub struct BasicConstructionAlgebra {
    pub base: AlgRef,
    pub cond_exp: Arc<dyn CondExp>,
    /// `[M:N]⁻¹ = tr(e)`.
    pub tau: Rational,
    pub concrete: Option<ConcreteM1>,
    pub label: String,
    base_span: Vec<Elem>,
}

fn ext(a: &Elem) -> &ExtElem {
    a.as_ext().expect("basic-construction element expected")
}

fn mk(a: Elem, pairs: Vec<(Elem, Elem)>) -> Elem {
    Elem::Ext(Box::new(ExtElem { a, pairs }))
}

impl BasicConstructionAlgebra {
    pub fn new(base: AlgRef, cond_exp: Arc<dyn CondExp>, tau: Rational) -> Self {
        let base_span = base.spanning_set();
        Self { base, cond_exp, tau, concrete: None, label: "basic construction".into(), base_span }
    }

    pub fn with_concrete(mut self, c: ConcreteM1) -> Self {
        self.concrete = Some(c);
        self
    }

    pub fn with_label(mut self, l: &str) -> Self {
        self.label = l.into();
        self
    }

    /// Embeds an element of `M`.
    pub fn embed(&self, x: Elem) -> Elem {
        mk(x, Vec::new())
    }

    pub fn e(&self) -> Elem {
        mk(self.base.zero(), vec![(self.base.unit(), self.base.unit())])
    }

    /// `E_M(a + Σ bᵢ e cᵢ) = a + τ Σ bᵢcᵢ`, as an element of `M`.
    pub fn expect_base(&self, x: &Elem) -> Elem {
        let b = self.base.as_ref();
        let x = ext(x);
        let mut s = b.zero();
        for (p, q) in &x.pairs {
            s = b.add(&s, &b.mul(p, q));
        }
        b.add(&x.a, &b.scale(&s, &Gauss::real(self.tau.clone())))
    }

    /// Merges pairs through the base coordinates: `Σ bᵢ e cᵢ = Σⱼ Uⱼ e (Σᵢ βᵢⱼ cᵢ)`.
    fn compress(&self, pairs: Vec<(Elem, Elem)>) -> Vec<(Elem, Elem)> {
        let b = self.base.as_ref();
        if pairs.len() <= 1 {
            return pairs.into_iter().filter(|(p, q)| !b.is_zero_elem(p) && !b.is_zero_elem(q)).collect();
        }
        let Some(first) = b.direct_coords(&pairs[0].0) else {
            return pairs;
        };
        let mut acc: Vec<Option<Elem>> = vec![None; first.len()];
        for (p, q) in &pairs {
            let c = b.direct_coords(p).expect("coordinates");
            for (j, cj) in c.iter().enumerate() {
                if cj.is_zero() {
                    continue;
                }
                let t = b.scale(q, cj);
                acc[j] = Some(match acc[j].take() {
                    Some(s) => b.add(&s, &t),
                    None => t,
                });
            }
        }
        acc.into_iter()
            .enumerate()
            .filter_map(|(j, q)| q.filter(|q| !b.is_zero_elem(q)).map(|q| (self.base_span[j].clone(), q)))
            .collect()
    }

    fn concrete_dense(&self, x: &Elem) -> Option<QMat> {
        let c = self.concrete.as_ref()?;
        let x = ext(x);
        let d = |y: &Elem| self.base.dense(y).map(|m| c.lift(&m));
        let mut out = d(&x.a)?;
        for (p, q) in &x.pairs {
            out = out.add(&d(p)?.mul(&c.e).mul(&d(q)?));
        }
        Some(out)
    }
}

impl Algebra for BasicConstructionAlgebra {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn arity(&self) -> usize {
        self.base.arity() + 1
    }

    fn generator(&self, i: usize) -> Elem {
        if i == self.base.arity() {
            self.e()
        } else {
            self.embed(self.base.generator(i))
        }
    }

    fn unit(&self) -> Elem {
        self.embed(self.base.unit())
    }

    fn zero(&self) -> Elem {
        self.embed(self.base.zero())
    }

    fn add(&self, x: &Elem, y: &Elem) -> Elem {
        let (x, y) = (ext(x), ext(y));
        let mut pairs = x.pairs.clone();
        pairs.extend(y.pairs.iter().cloned());
        let n = pairs.len();
        let pairs = if n > self.base_span.len() { self.compress(pairs) } else { pairs };
        mk(self.base.add(&x.a, &y.a), pairs)
    }

    fn scale(&self, x: &Elem, c: &Gauss) -> Elem {
        let x = ext(x);
        if c.is_zero() {
            return self.zero();
        }
        let pairs = x.pairs.iter().map(|(p, q)| (p.clone(), self.base.scale(q, c))).collect();
        mk(self.base.scale(&x.a, c), pairs)
    }

    fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        let b = self.base.as_ref();
        let (x, y) = (ext(x), ext(y));
        let a = b.mul(&x.a, &y.a);
        let mut pairs = Vec::new();
        for (p, q) in &y.pairs {
            pairs.push((b.mul(&x.a, p), q.clone()));
        }
        for (p, q) in &x.pairs {
            pairs.push((p.clone(), b.mul(q, &y.a)));
        }
        for (p, q) in &x.pairs {
            for (p2, q2) in &y.pairs {
                let mid = self.cond_exp.apply(&b.mul(q, p2));
                pairs.push((b.mul(p, &mid), q2.clone()));
            }
        }
        mk(a, self.compress(pairs))
    }

    fn adjoint(&self, x: &Elem) -> Elem {
        let b = self.base.as_ref();
        let x = ext(x);
        let pairs = x.pairs.iter().map(|(p, q)| (b.adjoint(q), b.adjoint(p))).collect();
        mk(b.adjoint(&x.a), pairs)
    }

    fn trace(&self, x: &Elem) -> Gauss {
        let b = self.base.as_ref();
        let x = ext(x);
        let mut s = Gauss::zero();
        for (p, q) in &x.pairs {
            s = &s + &b.trace(&b.mul(q, p));
        }
        &b.trace(&x.a) + &s.scale(&self.tau)
    }

    fn min_projection_trace(&self) -> Rational {
        self.base.min_projection_trace() * &self.tau
    }

    fn op_norm_upper(&self, x: &Elem, k: u32) -> Option<Rational> {
        let d = self.concrete_dense(x)?;
        let h = op_norm(&d);
        Some(d.op_norm_upper(k, Some(h)))
    }

    fn op_norm_at_most(&self, x: &Elem, q: &Rational) -> Option<bool> {
        Some(self.concrete_dense(x)?.op_norm_at_most(q))
    }

    fn dense(&self, x: &Elem) -> Option<QMat> {
        self.concrete_dense(x)
    }

    fn dense_trace_weights(&self) -> Option<Vec<f64>> {
        let c = self.concrete.as_ref()?;
        let n = c.e.rows;
        Some(vec![1.0 / n as f64; n])
    }

    fn spanning_set(&self) -> Vec<Elem> {
        let mut out: Vec<Elem> = self.base_span.iter().map(|u| self.embed(u.clone())).collect();
        for u in &self.base_span {
            for v in &self.base_span {
                out.push(mk(self.base.zero(), vec![(u.clone(), v.clone())]));
            }
        }
        out
    }
}

/// `E_M` on `M₁`, with values embedded in `M₁`: the expectation used when
/// `M ⊆ M₁` is itself the bottom of the next basic construction.
#[derive(Debug)]
pub struct BaseExpectation(pub Arc<BasicConstructionAlgebra>);

impl CondExp for BaseExpectation {
    fn apply(&self, x: &Elem) -> Elem {
        self.0.embed(self.0.expect_base(x))
    }
}
