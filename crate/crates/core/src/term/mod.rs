//! Rational *-polynomial points over a finite generator list.
//!
//! A [`Term`] is kept in canonical flattened form: a map from words to
//! nonzero Gaussian-rational coefficients, words ordered shortlex. Two terms
//! are equal iff they denote the same formal *-polynomial.

mod enumerate;
mod flat;
mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::{Gauss, Rational};

pub use enumerate::{Enumerator, SizeCounts};
pub use flat::{flat_bound, scale_into_ball, FlatBound, FlatMode, OpNormOracle};
pub use parse::{parse_expr, parse_term, parse_with, Expr};

/// Generator `gen` or its adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u32);

impl Letter {
    pub fn new(gen: usize, adjoint: bool) -> Self {
        Letter((gen as u32) << 1 | adjoint as u32)
    }

    pub fn gen(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_adjoint(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn star(self) -> Self {
        Letter(self.0 ^ 1)
    }
}

/// A monomial word, ordered shortlex (length first, then lexicographic).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn star(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.star()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// How generator indices are printed. Indices `0..base` print as
/// `g1, g2, ...`; indices from `base` on are Jones projections and print
/// as `e` (single level) or `e1, e2, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub base: usize,
    pub jones: usize,
}

impl Signature {
    pub fn plain(arity: usize) -> Self {
        Self { base: arity, jones: 0 }
    }

    pub fn extended(base: usize) -> Self {
        Self { base, jones: 1 }
    }

    pub fn arity(&self) -> usize {
        self.base + self.jones
    }

    pub fn letter_name(&self, l: Letter) -> String {
        let g = l.gen();
        let mut s = if g < self.base {
            format!("g{}", g + 1)
        } else if self.jones == 1 {
            "e".to_string()
        } else {
            format!("e{}", g - self.base + 1)
        };
        if l.is_adjoint() {
            s.push('\'');
        }
        s
    }
}

/// Canonical flattened *-polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    arity: usize,
    mons: BTreeMap<Word, Gauss>,
}

impl Term {
    pub fn zero(arity: usize) -> Self {
        Self {
            arity,
            mons: BTreeMap::new(),
        }
    }

    pub fn one(arity: usize) -> Self {
        Self::scalar(arity, Gauss::one())
    }

    pub fn scalar(arity: usize, c: Gauss) -> Self {
        Self::monomial(arity, Word::empty(), c)
    }

    pub fn gen(arity: usize, i: usize) -> Self {
        assert!(i < arity, "generator {i} out of range for arity {arity}");
        Self::monomial(arity, Word(vec![Letter::new(i, false)]), Gauss::one())
    }

    pub fn monomial(arity: usize, w: Word, c: Gauss) -> Self {
        let mut t = Self::zero(arity);
        if !c.is_zero() {
            t.mons.insert(w, c);
        }
        t
    }

    pub fn from_monomials(arity: usize, it: impl IntoIterator<Item = (Word, Gauss)>) -> Self {
        let mut t = Self::zero(arity);
        for (w, c) in it {
            t.add_monomial(w, &c);
        }
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Same polynomial viewed over a larger generator list.
    pub fn with_arity(&self, arity: usize) -> Self {
        assert!(arity >= self.arity);
        Self {
            arity,
            mons: self.mons.clone(),
        }
    }

    /// Same polynomial over the first `arity` generators, which must
    /// contain every generator used.
    pub fn restrict(&self, arity: usize) -> crate::Result<Self> {
        if (arity..self.arity).any(|g| self.uses_generator(g)) {
            return Err(crate::Error::ArityMismatch { expected: arity, got: self.arity });
        }
        Ok(Self { arity, mons: self.mons.clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.mons.is_empty()
    }

    pub fn len(&self) -> usize {
        self.mons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mons.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Word, &Gauss)> {
        self.mons.iter()
    }

    pub fn degree(&self) -> usize {
        self.mons.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn coefficient(&self, w: &Word) -> Gauss {
        self.mons.get(w).cloned().unwrap_or_default()
    }

    pub fn uses_generator(&self, g: usize) -> bool {
        self.mons.keys().any(|w| w.0.iter().any(|l| l.gen() == g))
    }

    pub fn add_monomial(&mut self, w: Word, c: &Gauss) {
        if c.is_zero() {
            return;
        }
        let entry = self.mons.entry(w);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Term) -> Term {
        let mut t = self.clone();
        t.arity = t.arity.max(other.arity);
        for (w, c) in &other.mons {
            t.add_monomial(w.clone(), c);
        }
        t
    }

    pub fn sub(&self, other: &Term) -> Term {
        self.add(&other.scale(&-Gauss::one()))
    }

    pub fn scale(&self, c: &Gauss) -> Term {
        if c.is_zero() {
            return Term::zero(self.arity);
        }
        Term {
            arity: self.arity,
            mons: self.mons.iter().map(|(w, a)| (w.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Term) -> Term {
        let mut t = Term::zero(self.arity.max(other.arity));
        for (w1, c1) in &self.mons {
            for (w2, c2) in &other.mons {
                t.add_monomial(w1.concat(w2), &(c1 * c2));
            }
        }
        t
    }

    pub fn adjoint(&self) -> Term {
        Term {
            arity: self.arity,
            mons: self.mons.iter().map(|(w, c)| (w.star(), c.conj())).collect(),
        }
    }

    /// `Σ |coefficient|`, bounded above by `|re| + |im|` per coefficient.
    pub fn l1_bound(&self) -> Rational {
        self.mons.values().map(Gauss::abs_bound).sum()
    }

    /// Enumeration size: Σ over monomials of (degree + coefficient height).
    pub fn size(&self) -> u64 {
        self.mons.iter().map(|(w, c)| w.len() as u64 + c.cost()).sum()
    }

    /// Replace every letter by a term. `images[g]` is the image of
    /// generator `g`; adjoints map to adjoint images; the empty word maps to
    /// `unit`.
    pub fn substitute(&self, images: &[Term], unit: &Term) -> Term {
        let arity = unit.arity();
        let stars: Vec<Term> = images.iter().map(Term::adjoint).collect();
        let mut out = Term::zero(arity);
        for (w, c) in &self.mons {
            let mut acc = unit.clone();
            for l in &w.0 {
                let img = if l.is_adjoint() { &stars[l.gen()] } else { &images[l.gen()] };
                acc = acc.mul(img);
            }
            out = out.add(&acc.scale(c));
        }
        out
    }

    pub fn check_arity(&self, arity: usize) -> crate::Result<()> {
        if let Some(g) = self
            .mons
            .keys()
            .flat_map(|w| w.0.iter().map(|l| l.gen()))
            .find(|&g| g >= arity)
        {
            return Err(crate::Error::GeneratorOutOfRange { index: g + 1, arity });
        }
        Ok(())
    }

    /// Re-parsable text with explicit `(a/b + c/d i)` coefficients.
    pub fn to_canonical_text(&self, sig: Signature) -> String {
        if self.mons.is_empty() {
            return "(0/1 + 0/1 i)*1".to_string();
        }
        let parts: Vec<String> = self
            .mons
            .iter()
            .map(|(w, c)| {
                let body = if w.is_empty() {
                    "1".to_string()
                } else {
                    w.0.iter().map(|l| sig.letter_name(*l)).collect::<Vec<_>>().join("*")
                };
                format!("{}*{}", c.literal(), body)
            })
            .collect();
        parts.join(" + ")
    }

    /// Human-readable text, also re-parsable.
    pub fn display(&self, sig: Signature) -> String {
        if self.mons.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (w, c)) in self.mons.iter().enumerate() {
            let body = if w.is_empty() {
                "1".to_string()
            } else {
                w.0.iter().map(|l| sig.letter_name(*l)).collect::<Vec<_>>().join("*")
            };
            let neg_one = *c == -Gauss::one();
            if i > 0 {
                s.push_str(if neg_one { " - " } else { " + " });
            } else if neg_one {
                s.push('-');
            }
            if *c == Gauss::one() || neg_one {
                s.push_str(&body);
            } else if c.is_real() {
                s.push_str(&format!("({})*{}", c.re, body));
            } else {
                s.push_str(&format!("{}*{}", c.literal(), body));
            }
        }
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display(Signature::plain(self.arity)))
    }
}

/// Lexicographic order on the monomial sequence, used for deterministic
/// tie-breaking only.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mons.iter().cmp(other.mons.iter())
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_is_involution() {
        let t = parse_term("(1/2 + 1/3 i)*g1*g2' + g2*g2 - 1", 2).unwrap();
        assert_eq!(t.adjoint().adjoint(), t);
        assert_ne!(t.adjoint(), t);
    }

    #[test]
    fn shortlex_order() {
        let a = Word(vec![Letter::new(1, false)]);
        let b = Word(vec![Letter::new(0, false), Letter::new(0, false)]);
        assert!(a < b);
        assert!(Word::empty() < a);
    }

    #[test]
    fn substitution() {
        let t = parse_term("g1*g2 + 1", 2).unwrap();
        let p = parse_term("g1", 2).unwrap();
        let images = vec![parse_term("g2", 2).unwrap(), parse_term("g1'", 2).unwrap()];
        let s = t.substitute(&images, &p);
        assert_eq!(s, parse_term("g1*g2*g1' + g1", 2).unwrap());
    }
}
