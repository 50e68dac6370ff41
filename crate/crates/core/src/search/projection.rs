use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use super::quasi::{projection_threshold, quasi_prefilter, quasi_projection_of, QuasiProjectionWitness, Verdict};
use super::{least_witness, SearchConfig};
use crate::algebra::Elem;
use crate::numeric::{nearest_projection, to_cmat, CMat};
use crate::point::ComputablePoint;
use crate::presentation::{NumModel, Presentation};
use crate::scalar::{pow2_neg, to_f64, Gauss, Rational};
use crate::term::Term;
use crate::{Error, Result};

fn dist_sqr(pres: &Presentation, a: &Elem, b: &Elem) -> Rational {
    pres.alg.two_norm_sqr(&pres.alg.sub(a, b))
}

/// `|z - λ|² < r²`, exactly.
fn trace_within(z: &Gauss, lambda: &Rational, r: &Rational) -> bool {
    let d = &z.re - lambda;
    &d * &d + &z.im * &z.im < r * r
}

/// Least-index ε-quasi-projection passing `extra`.
pub fn find_projection_near(
    pres: &Presentation,
    cfg: SearchConfig,
    eps: &Rational,
    extra: impl Fn(&Term, &Elem, &QuasiProjectionWitness) -> bool + Sync,
) -> Result<(u64, QuasiProjectionWitness)> {
    find_projection_filtered(pres, cfg, eps, "find_projection_near", &|_, _| true, &extra)
}

type NumPred<'a> = &'a (dyn Fn(&NumModel, &CMat) -> bool + Sync);
type ExactPred<'a> = &'a (dyn Fn(&Term, &Elem, &QuasiProjectionWitness) -> bool + Sync);

fn find_projection_filtered(
    pres: &Presentation,
    cfg: SearchConfig,
    eps: &Rational,
    stage: &str,
    num_pred: NumPred<'_>,
    extra: ExactPred<'_>,
) -> Result<(u64, QuasiProjectionWitness)> {
    let theta = to_f64(&projection_threshold(eps));
    let num = pres.numeric();
    let (i, _, w) = least_witness(pres, cfg, stage, |t| {
        if let Some(nm) = num {
            let m = nm.eval(t);
            if !quasi_prefilter(nm, &m, theta) || !num_pred(nm, &m) {
                return None;
            }
        }
        let x = pres.eval(t).ok()?;
        let w = quasi_projection_of(pres, t, &x, eps);
        (w.verdict == Verdict::Accept && extra(t, &x, &w)).then_some(w)
    })?;
    Ok((i, w))
}

#[derive(Clone, Debug)]
pub struct ProjectionStage {
    pub index: u64,
    pub witness: QuasiProjectionWitness,
    pub elem: Elem,
}

/// The chained quasi-projection search converging to a projection with
/// trace near `λ`: stage `n` is an `εₙ`-quasi-projection, `εₙ = 2^{-n-k-2}`.
#[derive(Clone)]
pub struct ProjChain {
    pres: Presentation,
    lambda: Rational,
    k: u32,
    cfg: SearchConfig,
    /// Exact projections with trace in `[lo, hi)` are accepted at stage 1.
    window: Option<(Rational, Rational)>,
    stages: Arc<Mutex<Vec<ProjectionStage>>>,
}

impl std::fmt::Debug for ProjChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjChain").field("lambda", &self.lambda).field("k", &self.k).finish()
    }
}

impl ProjChain {
    pub fn new(pres: &Presentation, lambda: Rational, k: u32, cfg: SearchConfig) -> Self {
        Self { pres: pres.clone(), lambda, k, cfg, window: None, stages: Arc::default() }
    }

    pub fn with_window(mut self, lo: Rational, hi: Rational) -> Self {
        self.window = Some((lo, hi));
        self
    }

    pub fn eps(&self, n: usize) -> Rational {
        pow2_neg(n as u32 + self.k + 2)
    }

    /// Stage `n ≥ 1`, computed on demand.
    pub fn stage(&self, n: usize) -> Result<ProjectionStage> {
        assert!(n >= 1);
        let mut stages = self.stages.lock().expect("stages");
        while stages.len() < n {
            let m = stages.len() + 1;
            // a stage that is an exact projection satisfies every later stage
            if let Some(last) = stages.last() {
                if last.witness.exact_projection {
                    let s = last.clone();
                    stages.push(s);
                    continue;
                }
            }
            let eps = self.eps(m);
            let slack: Rational = (1..m).map(|i| self.eps(i)).sum::<Rational>() * Rational::from_integer(2.into());
            let radius = &eps + &slack;
            let prev = stages.last().cloned();
            let move_bound = prev.as_ref().map(|_| &eps + self.eps(m - 1));
            let lambda = self.lambda.clone();
            let window = if m == 1 { self.window.clone() } else { None };
            let lam_f = to_f64(&lambda);
            let rad_f = to_f64(&radius);
            let win_f = window.as_ref().map(|(a, b)| (to_f64(a), to_f64(b)));
            let num_pred = move |nm: &NumModel, x: &CMat| {
                let tr = nm.trace(x).re;
                let near = (tr - lam_f).abs() < rad_f + 1e-9;
                let inwin = win_f.is_some_and(|(a, b)| tr > a - 1e-9 && tr < b + 1e-9);
                near || inwin
            };
            let pres = &self.pres;
            let exact_pred = |_: &Term, x: &Elem, w: &QuasiProjectionWitness| {
                let tr = pres.alg.trace(x);
                let ok_trace = trace_within(&tr, &lambda, &radius)
                    || (w.exact_projection
                        && window.as_ref().is_some_and(|(a, b)| tr.im.is_zero() && &tr.re >= a && &tr.re < b));
                if !ok_trace {
                    return false;
                }
                match (&prev, &move_bound) {
                    (Some(p), Some(mb)) => dist_sqr(pres, x, &p.elem) < mb * mb,
                    _ => true,
                }
            };
            let stage_name = format!("projection chain stage {m}");
                        let (index, witness) =
                find_projection_filtered(&self.pres, self.cfg, &eps, &stage_name, &num_pred, &exact_pred)?;
            let elem = self.pres.eval(&witness.term)?;
            stages.push(ProjectionStage { index, witness, elem });
        }
        Ok(stages[n - 1].clone())
    }

    /// The limit, when stage 1 (hence every stage) is an exact projection
    /// or the chain has stabilized by stage `max_stage`.
    pub fn exact_limit(&self, max_stage: usize) -> Result<Option<ProjectionStage>> {
        for n in 1..=max_stage {
            let s = self.stage(n)?;
            if s.witness.exact_projection {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    /// Point whose `k'`-resolution is a stage within `2^-k'` of the limit.
    pub fn point(&self) -> ComputablePoint {
        if let Ok(Some(s)) = self.exact_limit(1) {
            return ComputablePoint::from_term(s.witness.term.clone(), Some(s.elem));
        }
        let me = self.clone();
        ComputablePoint::new(move |kk| {
            // distance to the limit is below 3εₙ
            let n = (kk as i64 - me.k as i64 + 1).max(1) as usize;
            Ok(me.stage(n)?.witness.term)
        })
    }
}

/// A projection of trace within `2^-k` of `λ`.
pub fn projection_with_trace_approx(
    pres: &Presentation,
    lambda: &Rational,
    k: u32,
    cfg: SearchConfig,
) -> Result<ProjChain> {
    if *lambda < Rational::zero() || *lambda > Rational::one() {
        return Err(Error::Invalid("λ must lie in [0, 1]".into()));
    }
    let chain = ProjChain::new(pres, lambda.clone(), k, cfg);
    chain.stage(1)?;
    Ok(chain)
}

/// One step of the decreasing chain: a term of the presentation searched,
/// its exact element and trace.
#[derive(Clone, Debug)]
pub struct ExactStage {
    pub term: Term,
    pub elem: Elem,
    pub trace: Rational,
    pub search_index: Option<u64>,
}

/// Projection of trace exactly `λ` by nested corners. Returns the decreasing
/// chain `p₀ = 1 ≥ p₁ ≥ …`, whose last entry has trace `λ`.
pub fn projection_with_trace_exact(pres: &Presentation, lambda: &Rational, cfg: SearchConfig) -> Result<Vec<ExactStage>> {
    if *lambda <= Rational::zero() || *lambda >= Rational::one() {
        if lambda.is_one() {
            let one = Term::one(pres.arity());
            let elem = pres.eval(&one)?;
            return Ok(vec![ExactStage { term: one, elem, trace: Rational::one(), search_index: None }]);
        }
        return Err(Error::Invalid("λ must lie in (0, 1)".into()));
    }
    let one = Term::one(pres.arity());
    let elem = pres.eval(&one)?;
    let trace = pres.alg.trace(&elem).re;
    let mut chain = vec![ExactStage { term: one, elem, trace, search_index: None }];
    for n in 0..64usize {
        let cur = chain.last().expect("nonempty").clone();
        if cur.trace == *lambda {
            return Ok(chain);
        }
        let point = ComputablePoint::from_term(cur.term.clone(), Some(cur.elem.clone()));
        let corner = pres.corner(&point)?;
        let target = lambda / &cur.trace;
        let mut k = n as u32 + 1;
        while &target + pow2_neg(k) >= Rational::one() {
            k += 1;
        }
        let center = &target + pow2_neg(k + 1);
        let ch = ProjChain::new(&corner, center, k + 1, cfg).with_window(target.clone(), &target + pow2_neg(k));
        let limit = ch.exact_limit(4)?.ok_or_else(|| {
            Error::NotProjection(format!("stage {} did not settle on an exact projection", n + 1))
        })?;
        // back to a short term of `pres`
        let local = pres.express(&limit.elem);
        let tr = pres.alg.trace(&limit.elem).re;
        chain.push(ExactStage { term: local, elem: limit.elem, trace: tr, search_index: Some(limit.index) });
    }
    Err(Error::Unrealizable(format!(
        "trace {} not reached; last stage has trace {}",
        lambda,
        chain.last().expect("nonempty").trace
    )))
}

/// Mutually orthogonal exact projections `p₁..p_{n+1}`, `n = ⌊1/λ⌋`, with
/// `tr(pᵢ) = λ` for `i ≤ n`, as terms of `pres` with their elements.
pub fn orthogonal_projection_family(
    pres: &Presentation,
    lambda: &Rational,
    cfg: SearchConfig,
) -> Result<Vec<(Term, Elem)>> {
    if *lambda <= Rational::zero() || *lambda > Rational::one() {
        return Err(Error::Invalid("λ must lie in (0, 1]".into()));
    }
    let n = (Rational::one() / lambda).floor().to_integer();
    let n: usize = n.try_into().map_err(|_| Error::Resource("too many projections".into()))?;
    let alg = pres.alg.as_ref();
    let mut out: Vec<(Term, Elem)> = Vec::new();
    let mut sum_e = alg.zero();
    for _ in 0..n {
        let q_t = pres.express(&alg.sub(&alg.unit(), &sum_e));
        let q_e = alg.sub(&alg.unit(), &sum_e);
        let tr_q = alg.trace(&q_e).re;
        let sub = if out.is_empty() { None } else { Some(pres.corner(&ComputablePoint::from_term(q_t, Some(q_e)))?) };
        let stages = projection_with_trace_exact(sub.as_ref().unwrap_or(pres), &(lambda / &tr_q), cfg)?;
        let last = stages.last().expect("nonempty").clone();
        let t = match &sub {
            Some(_) => pres.express(&last.elem),
            None => last.term,
        };
        sum_e = alg.add(&sum_e, &last.elem);
        out.push((t, last.elem));
    }
    let rest = alg.sub(&alg.unit(), &sum_e);
    out.push((pres.express(&rest), rest));
    Ok(out)
}

/// A term within `2^-k` of the identity, found as `x x* x` for the least
/// `x` with the quasi-projection and trace conditions.
pub fn find_identity(pres: &Presentation, k: u32, budget: u64) -> Result<Term> {
    let eps = pow2_neg(2 * k + 3);
    let theta = to_f64(&projection_threshold(&eps));
    let num = pres.numeric();
    let cfg = SearchConfig::new(budget, 1);
    let (_, t, _) = least_witness(pres, cfg, "find_identity", |x| {
        let y = x.mul(&x.adjoint()).mul(x);
        if let Some(nm) = num {
            let m = nm.eval(&y);
            if !quasi_prefilter(nm, &m, theta) || (nm.trace(&m).re - 1.0).abs() > to_f64(&eps) + 1e-9 {
                return None;
            }
        }
        let ye = pres.eval(&y).ok()?;
        let w = quasi_projection_of(pres, &y, &ye, &eps);
        (w.verdict == Verdict::Accept && trace_within(&pres.alg.trace(&ye), &Rational::one(), &eps)).then_some(())
    })?;
    Ok(t.mul(&t.adjoint()).mul(&t))
}

/// Spectral rounding of `x*x` at ½ in the concrete model.
pub fn nearest_projection_oracle(pres: &Presentation, x: &Elem) -> Result<CMat> {
    let d = pres.alg.dense(x).ok_or(Error::NoBackend)?;
    nearest_projection(&to_cmat(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::matrix::QMat;
    use crate::presentation::Provenance;
    use crate::scalar::rat;

    fn m4_diag() -> Presentation {
        // M4 with diagonal matrix units e11, e22 and a shift
        let mut s = QMat::zeros(4, 4);
        for i in 0..4 {
            s[((i + 1) % 4, i)] = Gauss::one();
        }
        let a = MatrixAlgebra::full(4, vec![QMat::unit(4, 0, 0), s]).unwrap();
        Presentation::new(Arc::new(a), true, Provenance::MatrixBackend)
    }

    #[test]
    fn exact_trace_quarter_and_family() {
        let p = m4_diag();
        let cfg = SearchConfig::new(100_000, 2);
        let chain = projection_with_trace_exact(&p, &rat(1, 4), cfg).unwrap();
        let last = chain.last().unwrap();
        assert_eq!(last.trace, rat(1, 4));
        assert!(p.alg.is_projection(&p.eval(&last.term).unwrap()));
        let fam = orthogonal_projection_family(&p, &rat(1, 4), cfg).unwrap();
        assert_eq!(fam.len(), 5);
        for (i, (ti, ei)) in fam.iter().enumerate() {
            assert_eq!(&p.eval(ti).unwrap(), ei);
            for (tj, _) in fam.iter().skip(i + 1) {
                let prod = p.eval(&ti.mul(tj)).unwrap();
                assert!(p.alg.is_zero_elem(&prod));
            }
        }
        assert!(p.alg.is_zero_elem(&fam[4].1));
    }

    #[test]
    fn identity_search() {
        let p = m4_diag();
        let t = find_identity(&p, 3, 10_000).unwrap();
        assert_eq!(t, Term::one(2));
    }

    #[test]
    fn approx_trace_half() {
        let p = m4_diag();
        let ch = projection_with_trace_approx(&p, &rat(1, 2), 4, SearchConfig::new(100_000, 1)).unwrap();
        let s = ch.stage(1).unwrap();
        let tr = p.alg.trace(&s.elem).re;
        assert!((tr - rat(1, 2)) < pow2_neg(4) && (rat(1, 2) - p.alg.trace(&s.elem).re) < pow2_neg(4));
    }
}
