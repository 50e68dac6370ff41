use num_traits::Zero;

use super::Inclusion;
use crate::algebra::{Elem, GramBasis};
use crate::point::ComputablePoint;
use crate::presentation::Presentation;
use crate::scalar::{to_f64, Rational};
use crate::search::{find_implement, find_subequivalence, orthogonal_projection_family, SearchConfig};
use crate::term::Term;
use crate::{Error, Result};

/// `m₁ … m_{n+1}` with the points `E_N(mⱼ)` and `E_N(m*_{n+1} m_{n+1})`.
#[derive(Clone, Debug)]
pub struct PPBasis {
    pub n: usize,
    pub m: Vec<ComputablePoint>,
    pub e_m: Vec<ComputablePoint>,
    pub e_last: ComputablePoint,
}

/// Exact point for a term of `M`, carrying its value.
fn exact_point(inc: &Inclusion, t: Term) -> Result<ComputablePoint> {
    let e = inc.ambient.eval(&t)?;
    Ok(ComputablePoint::from_term(t, Some(e)))
}

impl PPBasis {
    /// A basis given by exact terms; the expectation points are computed
    /// from the inclusion. `m` holds `m₁ … m_{n+1}`.
    pub fn from_terms(inc: &Inclusion, n: usize, m: Vec<Term>) -> Result<Self> {
        if m.len() != n + 1 {
            return Err(Error::Invalid(format!("expected {} basis elements, got {}", n + 1, m.len())));
        }
        let alg = inc.ambient.alg.as_ref();
        let mut pts = Vec::new();
        let mut e_m = Vec::new();
        for t in &m {
            let x = inc.ambient.eval(t)?;
            e_m.push(exact_point(inc, inc.ambient.express(&inc.cond_exp(&x)?))?);
            pts.push(ComputablePoint::from_term(t.clone(), Some(x)));
        }
        let last = pts[n].exact.clone().expect("exact");
        let f = inc.cond_exp(&alg.mul(&alg.adjoint(&last), &last))?;
        let e_last = exact_point(inc, inc.ambient.express(&f))?;
        Ok(Self { n, m: pts, e_m, e_last })
    }

    /// A basis whose expectation points are also given as terms; nothing
    /// is recomputed.
    pub fn from_stored(inc: &Inclusion, m: Vec<Term>, e_m: Vec<Term>, e_last: Term) -> Result<Self> {
        if m.is_empty() || e_m.len() != m.len() {
            return Err(Error::Invalid("basis and expectation lists differ in length".into()));
        }
        let pts = |ts: Vec<Term>| ts.into_iter().map(|t| exact_point(inc, t)).collect::<Result<Vec<_>>>();
        let n = m.len() - 1;
        Ok(Self { n, m: pts(m)?, e_m: pts(e_m)?, e_last: exact_point(inc, e_last)? })
    }

    /// Terms of all stored points at precision `k`.
    pub fn resolve(&self, k: u32) -> Result<(Vec<Term>, Vec<Term>, Term)> {
        let m = self.m.iter().map(|p| p.resolve(k)).collect::<Result<Vec<_>>>()?;
        let e = self.e_m.iter().map(|p| p.resolve(k)).collect::<Result<Vec<_>>>()?;
        Ok((m, e, self.e_last.resolve(k)?))
    }

    pub fn is_exact(&self) -> bool {
        self.m.iter().chain(&self.e_m).chain(std::iter::once(&self.e_last)).all(|p| p.exact_term.is_some())
    }
}

#[derive(Clone, Debug)]
pub struct ClauseResult {
    pub name: String,
    /// `‖residual‖₂`, rounded up to a float.
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct PPCertificate {
    pub clauses: Vec<ClauseResult>,
    pub index: Rational,
    pub tolerance: Rational,
    pub precision: u32,
    pub terms: Vec<Term>,
    pub e_terms: Vec<Term>,
    pub e_last: Term,
}

impl PPCertificate {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.clauses.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

fn clause(name: String, sq: &Rational, tol: &Rational) -> ClauseResult {
    ClauseResult { name, residual: to_f64(sq).sqrt(), passed: *sq <= tol * tol }
}

/// `tr(Σ_{j=1}^{n+1} mⱼ mⱼ*)`.
pub fn index_from_basis(inc: &Inclusion, b: &PPBasis, k: u32) -> Result<Rational> {
    let alg = inc.ambient.alg.as_ref();
    let mut s = Rational::zero();
    for p in &b.m {
        let x = inc.ambient.eval(&p.resolve(k)?)?;
        s += alg.trace(&alg.mul(&x, &alg.adjoint(&x))).re;
    }
    Ok(s)
}

/// Checks each defining clause at tolerance `tol` (2-norm residuals), using
/// the stored points at precision `k`. With `m1`, a presentation of the
/// basic construction whose last generator is `e`, also checks
/// `Σ mⱼ e mⱼ* = 1`.
pub fn verify_pp_basis(
    inc: &Inclusion,
    b: &PPBasis,
    tol: &Rational,
    k: u32,
    m1: Option<&Presentation>,
) -> Result<PPCertificate> {
    let alg = inc.ambient.alg.as_ref();
    let (mt, et, lt) = b.resolve(k)?;
    let m: Vec<Elem> = mt.iter().map(|t| inc.ambient.eval(t)).collect::<Result<_>>()?;
    let n = b.n;
    let mut clauses = Vec::new();
    let e_of = |x: &Elem| inc.cond_exp(x);
    for j in 0..=n {
        for l in 0..=n {
            let g = e_of(&alg.mul(&alg.adjoint(&m[j]), &m[l]))?;
            if j == l && j < n {
                let r = alg.two_norm_sqr(&alg.sub(&g, &alg.unit()));
                clauses.push(clause(format!("E(m{}*m{}) = 1", j + 1, j + 1), &r, tol));
            } else if j != l && j < l {
                clauses.push(clause(format!("E(m{}*m{}) = 0", j + 1, l + 1), &alg.two_norm_sqr(&g), tol));
            }
        }
    }
    let index = match &inc.index {
        Some(i) => i.clone(),
        None => index_from_basis(inc, b, k)?,
    };
    let f = e_of(&alg.mul(&alg.adjoint(&m[n]), &m[n]))?;
    let r = alg.two_norm_sqr(&alg.sub(&alg.mul(&f, &f), &f));
    clauses.push(clause(format!("E(m{}*m{}) is a projection", n + 1, n + 1), &r, tol));
    let dt = alg.trace(&f).re - (&index - Rational::from_integer((n as i64).into()));
    clauses.push(clause(format!("tr E(m{}*m{}) = index - {n}", n + 1, n + 1), &(&dt * &dt), tol));
    for (j, t) in et.iter().enumerate() {
        let r = alg.two_norm_sqr(&alg.sub(&inc.ambient.eval(t)?, &e_of(&m[j])?));
        clauses.push(clause(format!("stored E(m{}) is E(m{})", j + 1, j + 1), &r, tol));
    }
    let r = alg.two_norm_sqr(&alg.sub(&inc.ambient.eval(&lt)?, &f));
    clauses.push(clause("stored E(m*m) for the last element".into(), &r, tol));
    let from_basis = index_from_basis(inc, b, k)?;
    let di = &from_basis - &index;
    clauses.push(clause("tr(sum mj mj*) = index".into(), &(&di * &di), tol));
    if let Some(m1) = m1 {
        let a1 = m1.arity();
        let e = Term::gen(a1, a1 - 1);
        let mut s = Term::zero(a1);
        for t in &mt {
            let t1 = t.with_arity(a1);
            s = s.add(&t1.mul(&e).mul(&t1.adjoint()));
        }
        let x = m1.eval(&s)?;
        let r = m1.alg.two_norm_sqr(&m1.alg.sub(&x, &m1.alg.unit()));
        clauses.push(clause("sum mj e mj* = 1".into(), &r, tol));
    }
    Ok(PPCertificate { clauses, index, tolerance: tol.clone(), precision: k, terms: mt, e_terms: et, e_last: lt })
}

/// `xⱼ = E_N(mⱼ* t)`, so that `t = Σ mⱼ xⱼ`.
pub fn pp_expand(inc: &Inclusion, b: &PPBasis, t: &Term, k: u32) -> Result<Vec<Term>> {
    let alg = inc.ambient.alg.as_ref();
    let x = inc.ambient.eval(t)?;
    let mut out = Vec::new();
    for p in &b.m {
        let m = inc.ambient.eval(&p.resolve(k)?)?;
        out.push(inc.ambient.express(&inc.cond_exp(&alg.mul(&alg.adjoint(&m), &x))?));
    }
    Ok(out)
}

/// `E_N(x)` assembled from the stored points only: `x` is written as
/// `Σ_{j≤n} mⱼyⱼ + m_{n+1} f y_{n+1}` with `yⱼ` in the span of `N`
/// (least squares in the trace inner product, no expectation used) and
/// then `E_N(x) = Σ E(mⱼ)yⱼ + E(m_{n+1}) f y_{n+1}`.
pub(crate) fn cond_exp_elem_from_basis(inc: &Inclusion, b: &PPBasis, x: &Elem, k: u32) -> Result<Elem> {
    let alg = inc.ambient.alg.as_ref();
    let (mt, et, lt) = b.resolve(k)?;
    let ev = |t: &Term| inc.ambient.eval(t);
    let m: Vec<Elem> = mt.iter().map(ev).collect::<Result<_>>()?;
    let em: Vec<Elem> = et.iter().map(ev).collect::<Result<_>>()?;
    let f = ev(&lt)?;
    let words = inc.sub_words()?;
    let n = b.n;
    let mut gram = GramBasis::new();
    let mut labels = Vec::new();
    for j in 0..=n {
        let left = if j < n { m[j].clone() } else { alg.mul(&m[n], &f) };
        for (w, (_, nw)) in words.iter().enumerate() {
            if gram.try_add(alg, alg.mul(&left, nw)) {
                labels.push((j, w));
            }
        }
    }
    let c = gram.coords(alg, x);
    let mut out = alg.zero();
    for ((j, w), cj) in labels.iter().zip(&c) {
        if cj.is_zero() {
            continue;
        }
        let nw = &words[*w].1;
        let left = if *j < n { em[*j].clone() } else { alg.mul(&em[n], &f) };
        out = alg.add(&out, &alg.scale(&alg.mul(&left, nw), cj));
    }
    Ok(out)
}

pub fn cond_exp_from_basis(inc: &Inclusion, b: &PPBasis, t: &Term, k: u32) -> Result<Term> {
    let x = inc.ambient.eval(t)?;
    Ok(inc.ambient.express(&cond_exp_elem_from_basis(inc, b, &x, k)?))
}

/// Basis from the basic construction: orthogonal projections `gⱼ` of trace
/// `tr(e)` in `M₁`, partial isometries `vⱼ` from `e` onto them, and
/// `mⱼ` with `vⱼ e = mⱼ e`. `m1` must have the generators of `M` followed
/// by `e`.
pub fn construct_pp_basis(inc: &Inclusion, m1: &Presentation, cfg: SearchConfig) -> Result<PPBasis> {
    let a1 = m1.arity();
    let e_t = Term::gen(a1, a1 - 1);
    let e_x = m1.eval(&e_t)?;
    let lambda = m1.alg.trace(&e_x).re;
    if lambda.is_zero() {
        return Err(Error::NoIndex);
    }
    let fam = orthogonal_projection_family(m1, &lambda, cfg)?;
    let n = fam.len() - 1;
    let e_pt = ComputablePoint::from_term(e_t.clone(), Some(e_x));
    let mut m = Vec::new();
    for (j, (gt, gx)) in fam.into_iter().enumerate() {
        let g_pt = ComputablePoint::from_term(gt, Some(gx.clone()));
        let v = if j < n {
            find_implement(m1, &e_pt, &g_pt, cfg)?.point()?
        } else if m1.alg.is_zero_elem(&gx) {
            ComputablePoint::from_term(Term::zero(a1), Some(m1.alg.zero()))
        } else {
            // w*w = g, ww* ≤ e; v = w*
            let w = find_subequivalence(m1, &g_pt, &e_pt, cfg)?.point()?;
            adjoint_point(m1, w)
        };
        m.push(strip_point(inc, m1, v));
    }
    let m = m.into_iter().map(|p| settle(p, inc)).collect::<Result<Vec<_>>>()?;
    let mut e_m = Vec::new();
    for p in &m {
        if let Some(x) = &p.exact {
            e_m.push(exact_point(inc, inc.ambient.express(&inc.cond_exp(x)?))?);
            continue;
        }
        let (inc2, p2) = (inc.clone(), p.clone());
        e_m.push(ComputablePoint::new(move |k| inc2.cond_exp_presented(&p2.resolve(k + 1)?, k)));
    }
    let e_last = match &m[n].exact {
        Some(x) => {
            let alg = inc.ambient.alg.as_ref();
            exact_point(inc, inc.ambient.express(&inc.cond_exp(&alg.mul(&alg.adjoint(x), x))?))?
        }
        None => {
            let (inc2, p2) = (inc.clone(), m[n].clone());
            ComputablePoint::new(move |k| {
                let t = p2.resolve(k + 4)?;
                inc2.cond_exp_presented(&t.adjoint().mul(&t), k)
            })
        }
    };
    Ok(PPBasis { n, m, e_m, e_last })
}

fn adjoint_point(m1: &Presentation, w: ComputablePoint) -> ComputablePoint {
    if let Some(t) = &w.exact_term {
        let t = t.adjoint();
        let x = w.exact.as_ref().map(|x| m1.alg.adjoint(x));
        return ComputablePoint::from_term(t, x);
    }
    ComputablePoint::new(move |k| Ok(w.resolve(k)?.adjoint()))
}

fn strip_point(inc: &Inclusion, m1: &Presentation, v: ComputablePoint) -> ComputablePoint {
    let (inc2, m12) = (inc.clone(), m1.clone());
    if v.exact_term.is_some() {
        if let Ok(t) = crate::basic::strip_e(inc, m1, &v, 0) {
            return ComputablePoint::from_term(t, None);
        }
    }
    ComputablePoint::new(move |k| crate::basic::strip_e(&inc2, &m12, &v, k))
}

/// Attaches the value of an exact point.
fn settle(p: ComputablePoint, inc: &Inclusion) -> Result<ComputablePoint> {
    if let Some(t) = p.exact_term.clone() {
        let x = inc.ambient.eval(&t)?;
        return Ok(ComputablePoint::from_term(t, Some(x)));
    }
    Ok(p)
}
