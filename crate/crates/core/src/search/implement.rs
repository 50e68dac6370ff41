use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use super::projection::projection_with_trace_exact;
use super::quasi::{ball_check, Verdict};
use super::{least_witness, SearchConfig};
use crate::algebra::Elem;
use crate::numeric::{polar_implement, to_cmat, CMat};
use crate::point::ComputablePoint;
use crate::presentation::Presentation;
use crate::scalar::{pow2_neg, Gauss, Rational};
use crate::term::{FlatMode, Term};
use crate::{Error, Result};

/// Enumeration prefix scanned for an exact implement before the
/// constructive stream takes over.
const PREFIX: u64 = 4096;
const MAX_REFINE: usize = 80;

/// `ε¹⁶/11¹⁶`.
pub fn implement_threshold(eps: &Rational) -> Rational {
    let r = eps / Rational::from_integer(11.into());
    let r2 = &r * &r;
    let r4 = &r2 * &r2;
    let r8 = &r4 * &r4;
    &r8 * &r8
}

#[derive(Clone, Debug)]
pub struct QuasiImplementWitness {
    pub term: Term,
    pub epsilon: Rational,
    /// Exact squared defects `‖x*x - p‖₂²` and `‖xx* - q‖₂²`.
    pub defects_sqr: (Rational, Rational),
    pub mode: FlatMode,
    pub verdict: Verdict,
    pub exact_implement: bool,
}

/// A pair of exact projections of `pres` with their terms.
#[derive(Clone, Debug)]
pub struct ProjPair {
    pub p: (Term, Elem),
    pub q: (Term, Elem),
}

fn exact_of(pres: &Presentation, pt: &ComputablePoint) -> Result<(Term, Elem)> {
    let t = match &pt.exact_term {
        Some(t) => t.clone(),
        None => pt.resolve(64)?,
    };
    let e = match &pt.exact {
        Some(e) => e.clone(),
        None => pres.eval(&t)?,
    };
    if !pres.alg.is_projection(&e) {
        return Err(Error::NotProjection("implement endpoints must be exact projections".into()));
    }
    Ok((t, e))
}

pub fn is_quasi_implement(
    pres: &Presentation,
    t: &Term,
    p: &Elem,
    q: &Elem,
    eps: &Rational,
) -> Result<QuasiImplementWitness> {
    let x = pres.eval(t)?;
    Ok(quasi_implement_of(pres, t, &x, p, q, eps))
}

pub(crate) fn quasi_implement_of(
    pres: &Presentation,
    t: &Term,
    x: &Elem,
    p: &Elem,
    q: &Elem,
    eps: &Rational,
) -> QuasiImplementWitness {
    let alg = pres.alg.as_ref();
    let delta = implement_threshold(eps);
    let d2 = &delta * &delta;
    let xs = alg.adjoint(x);
    let a = alg.two_norm_sqr(&alg.sub(&alg.mul(&xs, x), p));
    let b = alg.two_norm_sqr(&alg.sub(&alg.mul(x, &xs), q));
    let exact_implement = a.is_zero() && b.is_zero();
    let (ball, mode) = ball_check(pres, t, x);
    // an exact partial isometry has norm 1 whatever the mode can certify
    let ball = ball || (exact_implement && mode == FlatMode::Universal && t.l1_bound() <= Rational::one());
    let verdict = if ball && a < d2 && b < d2 { Verdict::Accept } else { Verdict::Reject };
    QuasiImplementWitness { term: t.clone(), epsilon: eps.clone(), defects_sqr: (a, b), mode, verdict, exact_implement }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageSource {
    Enumerated(u64),
    Refined(usize),
}

#[derive(Clone, Debug)]
pub struct ImplementStage {
    pub witness: QuasiImplementWitness,
    pub elem: Elem,
    pub source: StageSource,
}

struct Refiner {
    x: Elem,
    iterations: usize,
}

/// Chained `εₙ = 2⁻ⁿ` quasi-implements of `p ~ q`. Stages come from an
/// enumeration prefix when it holds an exact implement, otherwise from a
/// deterministic stream: the least-index term `t` whose compression `q t p`
/// has full support, rescaled into the ball and refined by Newton-Schulz
/// steps on a dyadic grid.
#[derive(Clone)]
pub struct ImplementChain {
    pres: Presentation,
    pair: ProjPair,
    cfg: SearchConfig,
    stages: Arc<Mutex<Vec<ImplementStage>>>,
    refiner: Arc<Mutex<Option<Refiner>>>,
}

impl std::fmt::Debug for ImplementChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImplementChain").field("p", &self.pair.p.0).field("q", &self.pair.q.0).finish()
    }
}

impl ImplementChain {
    pub fn pair(&self) -> &ProjPair {
        &self.pair
    }

    pub fn eps(n: usize) -> Rational {
        pow2_neg(n as u32)
    }

    pub fn stage(&self, n: usize) -> Result<ImplementStage> {
        assert!(n >= 1);
        let mut stages = self.stages.lock().expect("stages");
        while stages.len() < n {
            let m = stages.len() + 1;
            if let Some(last) = stages.last() {
                if last.witness.exact_implement {
                    let mut s = last.clone();
                    s.witness.epsilon = Self::eps(m);
                    stages.push(s);
                    continue;
                }
            }
            let s = if m == 1 {
                match self.enumerated_exact()? {
                    Some(s) => s,
                    None => self.refined(m)?,
                }
            } else {
                self.refined(m)?
            };
            if let Some(prev) = stages.last() {
                let bound = Self::eps(m) + Self::eps(m - 1);
                let d = self.pres.alg.two_norm_sqr(&self.pres.alg.sub(&s.elem, &prev.elem));
                if d >= &bound * &bound {
                    return Err(Error::Resource(format!("implement stage {m} left the chain tolerance")));
                }
            }
            stages.push(s);
        }
        Ok(stages[n - 1].clone())
    }

    fn enumerated_exact(&self) -> Result<Option<ImplementStage>> {
        let (p, q) = (&self.pair.p.1, &self.pair.q.1);
        let cfg = SearchConfig::new(self.cfg.budget.min(PREFIX), self.cfg.workers);
        let num = self.pres.numeric();
        let dense = num.and_then(|_| Some((to_cmat(&self.pres.alg.dense(p)?), to_cmat(&self.pres.alg.dense(q)?))));
        let eps = Self::eps(1);
        let found = least_witness(&self.pres, cfg, "implement prefix", |t| {
            if let (Some(nm), Some((pd, qd))) = (num, &dense) {
                let x = nm.eval(t);
                let xs = x.adjoint();
                if (&xs * &x - pd).norm() > 1e-9 || (&x * &xs - qd).norm() > 1e-9 {
                    return None;
                }
            }
            let x = self.pres.eval(t).ok()?;
            let w = quasi_implement_of(&self.pres, t, &x, p, q, &eps);
            (w.exact_implement && w.verdict == Verdict::Accept).then_some((w, x))
        });
        match found {
            Ok((i, _, (witness, elem))) => Ok(Some(ImplementStage { witness, elem, source: StageSource::Enumerated(i) })),
            Err(Error::BudgetExhausted { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn seed(&self) -> Result<Elem> {
        let alg = self.pres.alg.as_ref();
        let (pt, pe) = &self.pair.p;
        let (qt, qe) = &self.pair.q;
        let nm = self.pres.numeric().ok_or(Error::NoBackend)?;
        let pd = to_cmat(&alg.dense(pe).ok_or(Error::NoBackend)?);
        let qd = to_cmat(&alg.dense(qe).ok_or(Error::NoBackend)?);
        let (_, t, _) = least_witness(&self.pres, self.cfg, "implement seed", |t| {
            let y = nm.eval(&qt.mul(t).mul(pt));
            let u = polar_implement(&y, &pd, &qd).ok()?;
            let ok = (&u * u.adjoint() - &qd).norm() < 1e-6 && (u.adjoint() * &u - &pd).norm() < 1e-6;
            ok.then_some(())
        })?;
        let y = alg.mul(&alg.mul(qe, &self.pres.eval(&t)?), pe);
        // scale so every singular value lies in (0, 1]
        let yd: CMat = to_cmat(&alg.dense(&y).ok_or(Error::NoBackend)?);
        let norm = crate::numeric::cop_norm(&yd);
        let c = Rational::new(1.into(), (((norm * 1.01) * 1024.0).ceil() as i64).max(1).into())
            * Rational::from_integer(1024.into());
        Ok(alg.scale(&y, &Gauss::real(c)))
    }

    fn refined(&self, n: usize) -> Result<ImplementStage> {
        let alg = self.pres.alg.as_ref();
        let (p, q) = (&self.pair.p.1, &self.pair.q.1);
        let eps = Self::eps(n);
        let grid_bits = 16 * n as u32 + 64;
        let mut guard = self.refiner.lock().expect("refiner");
        if guard.is_none() {
            *guard = Some(Refiner { x: self.seed()?, iterations: 0 });
        }
        let r = guard.as_mut().expect("refiner");
        for _ in 0..MAX_REFINE {
            let t = self.pres.express(&r.x);
            let w = quasi_implement_of(&self.pres, &t, &r.x, p, q, &eps);
            if w.verdict == Verdict::Accept {
                return Ok(ImplementStage { witness: w, elem: r.x.clone(), source: StageSource::Refined(r.iterations) });
            }
            // x ← ½ x (3p − x*x), then back onto the grid and into q·M·p
            let xx = alg.mul(&alg.adjoint(&r.x), &r.x);
            let inner = alg.sub(&alg.scale(p, &Gauss::from_i64(3)), &xx);
            let next = alg.scale(&alg.mul(&r.x, &inner), &Gauss::ratio(1, 2));
            let rounded = self.pres.eval(&round_term(&self.pres.express(&next), grid_bits))?;
            let mut x = alg.mul(&alg.mul(q, &rounded), p);
            if alg.op_norm_at_most(&x, &Rational::one()) == Some(false) {
                x = alg.scale(&x, &Gauss::real(Rational::one() - pow2_neg(grid_bits)));
            }
            r.x = x;
            r.iterations += 1;
        }
        Err(Error::Resource(format!("implement refinement did not reach stage {n}")))
    }

    /// Point whose `k`-resolution is stage `k + 2`.
    pub fn point(&self) -> Result<ComputablePoint> {
        let s1 = self.stage(1)?;
        if s1.witness.exact_implement {
            return Ok(ComputablePoint::from_term(s1.witness.term, Some(s1.elem)));
        }
        let me = self.clone();
        Ok(ComputablePoint::new(move |k| Ok(me.stage(k as usize + 2)?.witness.term)))
    }
}

fn round_rational(q: &Rational, bits: u32) -> Rational {
    let s = Rational::from_integer(num_bigint::BigInt::one() << bits);
    (q * &s).round() / s
}

fn round_term(t: &Term, bits: u32) -> Term {
    Term::from_monomials(
        t.arity(),
        t.monomials().map(|(w, c)| (w.clone(), Gauss::new(round_rational(&c.re, bits), round_rational(&c.im, bits)))),
    )
}

/// Chained implement of `p ~ q`; requires `tr(p) = tr(q)` exactly.
pub fn find_implement(
    pres: &Presentation,
    p: &ComputablePoint,
    q: &ComputablePoint,
    cfg: SearchConfig,
) -> Result<ImplementChain> {
    let pair = ProjPair { p: exact_of(pres, p)?, q: exact_of(pres, q)? };
    let (tp, tq) = (pres.alg.trace(&pair.p.1), pres.alg.trace(&pair.q.1));
    if tp != tq {
        return Err(Error::TraceMismatch(format!("tr(p) = {} but tr(q) = {}", tp.re, tq.re)));
    }
    let chain = ImplementChain {
        pres: pres.clone(),
        stages: Arc::default(),
        refiner: Arc::default(),
        cfg,
        pair: pair.clone(),
    };
    if pres.alg.elem_eq(&pair.p.1, &pair.q.1) {
        let w = quasi_implement_of(pres, &pair.p.0, &pair.p.1, &pair.p.1, &pair.q.1, &ImplementChain::eps(1));
        chain.stages.lock().expect("stages").push(ImplementStage {
            witness: w,
            elem: pair.p.1.clone(),
            source: StageSource::Refined(0),
        });
    }
    chain.stage(1)?;
    Ok(chain)
}

/// Implement of `p ~ q′` for some `q′ ≤ q` with `tr(q′) = tr(p)`.
pub fn find_subequivalence(
    pres: &Presentation,
    p: &ComputablePoint,
    q: &ComputablePoint,
    cfg: SearchConfig,
) -> Result<ImplementChain> {
    let (_, pe) = exact_of(pres, p)?;
    let (qt, qe) = exact_of(pres, q)?;
    let (tp, tq) = (pres.alg.trace(&pe).re, pres.alg.trace(&qe).re);
    if tp > tq {
        return Err(Error::TraceMismatch(format!("tr(p) = {tp} exceeds tr(q) = {tq}")));
    }
    if tp == tq {
        return find_implement(pres, p, q, cfg);
    }
    if tp.is_zero() {
        let z = ComputablePoint::from_term(Term::zero(pres.arity()), Some(pres.alg.zero()));
        return find_implement(pres, p, &z, cfg);
    }
    let corner = pres.corner(&ComputablePoint::from_term(qt.clone(), Some(qe)))?;
    let stages = projection_with_trace_exact(&corner, &(&tp / &tq), cfg)?;
    let last = stages.last().expect("nonempty");
    let q2 = pres.express(&last.elem);
    find_implement(pres, p, &ComputablePoint::from_term(q2, Some(last.elem.clone())), cfg)
}

/// Polar part of `q x p` in the concrete model, used as a ground truth.
pub fn polar_oracle(pres: &Presentation, x: &Elem, p: &Elem, q: &Elem) -> Result<CMat> {
    let d = |e: &Elem| pres.alg.dense(e).map(|m| to_cmat(&m)).ok_or(Error::NoBackend);
    polar_implement(&d(x)?, &d(p)?, &d(q)?)
}

/// Float distance from the polar oracle, for validation.
pub fn polar_distance(pres: &Presentation, x: &Elem, p: &Elem, q: &Elem) -> Result<f64> {
    let v = polar_oracle(pres, x, p, q)?;
    let xd = to_cmat(&pres.alg.dense(x).ok_or(Error::NoBackend)?);
    let nm = pres.numeric().ok_or(Error::NoBackend)?;
    Ok(nm.two_norm(&(xd - v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::matrix::QMat;
    use crate::presentation::Provenance;
    use crate::scalar::rat;

    fn m2() -> Presentation {
        let a = MatrixAlgebra::full(2, vec![QMat::unit(2, 0, 0), QMat::unit(2, 1, 0)]).unwrap();
        Presentation::new(Arc::new(a), true, Provenance::MatrixBackend)
    }

    fn pt(p: &Presentation, s: &str) -> ComputablePoint {
        let t = crate::term::parse_with(s, p.sig).unwrap();
        let e = p.eval(&t).unwrap();
        ComputablePoint::from_term(t, Some(e))
    }

    #[test]
    fn matrix_unit_implement() {
        let p = m2();
        let ch = find_implement(&p, &pt(&p, "g1"), &pt(&p, "g2*g2'"), SearchConfig::default()).unwrap();
        let s = ch.stage(3).unwrap();
        assert!(s.witness.exact_implement);
        assert_eq!(s.elem, p.eval(&Term::gen(2, 1)).unwrap());
    }

    #[test]
    fn trace_mismatch() {
        let p = m2();
        let err = find_implement(&p, &pt(&p, "g1"), &pt(&p, "1"), SearchConfig::default()).unwrap_err();
        assert!(matches!(err, Error::TraceMismatch(_)));
    }

    #[test]
    fn threshold_value() {
        assert_eq!(implement_threshold(&rat(11, 2)), pow2_neg(16));
    }

    #[test]
    fn refined_irrational_implement() {
        // p = e11, q = projection onto (1,1)/√2: implements have entries 1/√2
        let p = m2();
        let q = pt(&p, "(1/2)*1 + (1/2)*g2 + (1/2)*g2'");
        let ch = find_implement(&p, &pt(&p, "g1"), &q, SearchConfig::new(20_000, 1)).unwrap();
        let s = ch.stage(2).unwrap();
        assert!(matches!(s.source, StageSource::Refined(_)));
        assert!(polar_distance(&p, &s.elem, &ch.pair.p.1, &ch.pair.q.1).unwrap() < 0.25);
    }
}
