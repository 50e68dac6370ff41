use std::collections::BTreeMap;
use std::fmt;

use crate::point::ComputablePoint;
use crate::presentation::Presentation;
use crate::scalar::{Gauss, Rational};
use crate::subfactor::Inclusion;
use crate::term::{Letter, Signature, Term, Word};
use crate::{Error, Result};

/// One summand `head · E(arg₁) ⋯ E(arg_r) · e · c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub head: Word,
    pub e_args: Vec<Word>,
    pub c: Term,
}

/// `a + Σ bᵢ e cᵢ` with each `bᵢ` a word of `M` times expectations of words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub a: Term,
    pub summands: Vec<Summand>,
    /// Number of `e` symbols before and after each rewrite, per monomial.
    pub e_counts: Vec<Vec<usize>>,
}

fn split_on_e(w: &Word, base: usize) -> Vec<Word> {
    let mut parts = vec![Vec::new()];
    for l in w.letters() {
        if l.gen() == base {
            parts.push(Vec::new());
        } else {
            parts.last_mut().expect("nonempty").push(*l);
        }
    }
    parts.into_iter().map(Word).collect()
}

/// Rewrites with `e* = e`, `e² = e` and `e x e → E(x) e` from the left until
/// each monomial has at most one `e`. `base` is the arity of `M`.
pub fn to_normal_form(t: &Term, base: usize) -> Result<NormalForm> {
    t.check_arity(base + 1)?;
    let mut a = Term::zero(base);
    let mut grouped: BTreeMap<(Word, Vec<Word>), Term> = BTreeMap::new();
    let mut e_counts = Vec::new();
    for (w, c) in t.monomials() {
        let parts = split_on_e(w, base);
        if parts.len() == 1 {
            a.add_monomial(parts[0].clone(), c);
            e_counts.push(vec![0]);
            continue;
        }
        // e e = e: empty interior parts disappear
        let mut counts = vec![parts.len() - 1];
        let head = parts[0].clone();
        let tail = parts[parts.len() - 1].clone();
        let mut args = Vec::new();
        let mut e_left = parts.len() - 1;
        for mid in &parts[1..parts.len() - 1] {
            e_left -= 1;
            counts.push(e_left);
            if !mid.is_empty() {
                args.push(mid.clone());
            }
        }
        e_counts.push(counts);
        grouped.entry((head, args)).or_insert_with(|| Term::zero(base)).add_monomial(tail, c);
    }
    let summands = grouped
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((head, e_args), c)| Summand { head, e_args, c })
        .collect();
    Ok(NormalForm { a, summands, e_counts })
}

impl NormalForm {
    pub fn base(&self) -> usize {
        self.a.arity()
    }

    /// `bᵢ` as a term of `M`, with the expectations evaluated.
    pub fn b_term(&self, inc: &Inclusion, s: &Summand) -> Result<Term> {
        let n = self.base();
        let mut b = Term::monomial(n, s.head.clone(), Gauss::one());
        for w in &s.e_args {
            let ew = inc.cond_exp_term(&Term::monomial(n, w.clone(), Gauss::one()))?;
            b = b.mul(&ew);
        }
        Ok(b)
    }

    /// The normal form as an extended term, with each `E(w)` replaced by a
    /// term of `M`.
    pub fn to_term(&self, inc: &Inclusion) -> Result<Term> {
        let n = self.base();
        let e = Term::gen(n + 1, n);
        let mut out = self.a.with_arity(n + 1);
        for s in &self.summands {
            let b = self.b_term(inc, s)?.with_arity(n + 1);
            out = out.add(&b.mul(&e).mul(&s.c.with_arity(n + 1)));
        }
        Ok(out)
    }

    /// `z = a + Σ bᵢ E(cᵢ)`, so that `z e = x e`.
    pub fn strip(&self, inc: &Inclusion) -> Result<Term> {
        let mut z = self.a.clone();
        for s in &self.summands {
            z = z.add(&self.b_term(inc, s)?.mul(&inc.cond_exp_term(&s.c)?));
        }
        Ok(z)
    }

    /// `tr(a) + τ Σ tr(bᵢcᵢ)`.
    pub fn trace(&self, inc: &Inclusion, tau: &Rational) -> Result<Gauss> {
        let p = &inc.ambient;
        let mut s = Gauss::zero();
        for sm in &self.summands {
            s = &s + &p.trace_exact(&self.b_term(inc, sm)?.mul(&sm.c))?;
        }
        Ok(&p.trace_exact(&self.a)? + &s.scale(tau))
    }

    pub fn display(&self, sig: Signature) -> NormalFormDisplay<'_> {
        NormalFormDisplay { nf: self, sig }
    }
}

pub struct NormalFormDisplay<'a> {
    nf: &'a NormalForm,
    sig: Signature,
}

impl fmt::Display for NormalFormDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plain = Signature::plain(self.nf.base());
        let word = |w: &Word| -> Vec<String> { w.letters().iter().map(|l: &Letter| self.sig.letter_name(*l)).collect() };
        let mut parts = Vec::new();
        if !self.nf.a.is_zero() {
            parts.push(self.nf.a.display(plain));
        }
        for s in &self.nf.summands {
            let mut f = word(&s.head);
            f.extend(s.e_args.iter().map(|a| format!("E({})", word(a).join("*"))));
            f.push("e".into());
            let single = s.c.len() == 1 && s.c.monomials().all(|(_, c)| *c == Gauss::one());
            if single {
                let (w, _) = s.c.monomials().next().expect("one monomial");
                f.extend(word(w));
            } else {
                f.push(format!("({})", s.c.display(plain)));
            }
            parts.push(f.join("*"));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// `τ = tr(e)` in a presentation of `M₁` whose last generator is `e`.
pub fn jones_trace(m1: &Presentation) -> Result<Rational> {
    let a = m1.arity();
    let e = m1.eval(&Term::gen(a, a - 1))?;
    Ok(m1.alg.trace(&e).re)
}

/// The `y ∈ M` with `v e = y e`, within `2^-k`: `v` is resolved closely
/// enough in `M₁`, put in normal form and stripped of `e`.
pub fn strip_e(inc: &Inclusion, m1: &Presentation, v: &ComputablePoint, k: u32) -> Result<Term> {
    let base = inc.ambient.arity();
    if m1.arity() != base + 1 {
        return Err(Error::ArityMismatch { expected: base + 1, got: m1.arity() });
    }
    let tau = jones_trace(m1)?;
    let index_bits = (Rational::from_integer(1.into()) / &tau).ceil().to_integer().bits() as u32;
    let x = v.resolve(2 * k + 2 + index_bits)?;
    let nf = to_normal_form(&x, base)?;
    let z = nf.strip(inc)?;
    let ze = inc.ambient.eval(&z)?;
    Ok(inc.ambient.express(&ze))
}

/// `tr(t)` in `M₁` through the normal form.
pub fn m1_trace(inc: &Inclusion, tau: &Rational, t: &Term) -> Result<Gauss> {
    to_normal_form(t, inc.ambient.arity())?.trace(inc, tau)
}

/// `‖t‖₂²` in `M₁` through the normal form of `t*t`.
pub fn m1_norm_sqr(inc: &Inclusion, tau: &Rational, t: &Term) -> Result<Rational> {
    Ok(m1_trace(inc, tau, &t.adjoint().mul(t))?.re)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::induce_m1;
    use crate::gallery::amplification_m2;
    use crate::scalar::rat;
    use crate::term::parse_with;

    fn ext(s: &str) -> Term {
        parse_with(s, Signature::extended(4)).unwrap()
    }

    #[test]
    fn single_rewrites() {
        let nf = to_normal_form(&ext("e*g1*e"), 4).unwrap();
        assert_eq!(nf.display(Signature::extended(4)).to_string(), "E(g1)*e");
        assert_eq!(nf.e_counts, vec![vec![2, 1]]);
        let nf = to_normal_form(&ext("e*e"), 4).unwrap();
        assert_eq!(nf.display(Signature::extended(4)).to_string(), "e");
        let nf = to_normal_form(&ext("g3*e*g1*g2*e*g4 + 2*g1"), 4).unwrap();
        assert_eq!(nf.display(Signature::extended(4)).to_string(), "(2)*g1 + g3*E(g1*g2)*e*g4");
    }

    #[test]
    fn normal_form_matches_concrete_model() {
        let g = amplification_m2();
        let m1 = induce_m1(&g.inclusion, g.concrete.clone()).unwrap();
        let p = &m1.presentation;
        let alg = p.alg.as_ref();
        for s in ["e*g3*e", "g1*e*g3*g4*e*g2' + e*g4*e*e*g3*e", "(1/2)*e*g3 - e*g4*g3*e*g1", "g3*g4*e"] {
            let t = ext(s);
            let nf = to_normal_form(&t, 4).unwrap();
            let lhs = alg.dense(&p.eval(&t).unwrap()).unwrap();
            let rhs = alg.dense(&p.eval(&nf.to_term(&g.inclusion).unwrap()).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "{s}");
            let tau = rat(1, 4);
            assert_eq!(nf.trace(&g.inclusion, &tau).unwrap(), alg.dense(&p.eval(&t).unwrap()).unwrap().trace().scale(&rat(1, 8)));
        }
    }

    #[test]
    fn jones_projection_norm() {
        let g = amplification_m2();
        let tau = rat(1, 4);
        assert_eq!(m1_norm_sqr(&g.inclusion, &tau, &ext("e")).unwrap(), tau);
        assert_eq!(m1_norm_sqr(&g.inclusion, &tau, &ext("e*g3*e")).unwrap(), rat(0, 1));
    }

    #[test]
    fn strip_e_recovers_coefficient() {
        let g = amplification_m2();
        let m1 = induce_m1(&g.inclusion, g.concrete.clone()).unwrap();
        let v = ext("g1*e*g3*g3 + g2");
        let z = strip_e(&g.inclusion, &m1.presentation, &ComputablePoint::from_term(v.clone(), None), 8).unwrap();
        let e = ext("e");
        let lhs = m1.presentation.eval(&z.with_arity(5).mul(&e)).unwrap();
        let rhs = m1.presentation.eval(&v.mul(&e)).unwrap();
        assert!(m1.presentation.alg.elem_eq(&lhs, &rhs));
    }
}
