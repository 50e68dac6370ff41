//! Temperley-Lieb-Jones diagram algebras with the Markov trace.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::GalleryItem;
use crate::algebra::{AlgRef, Algebra, Elem};
use crate::presentation::{Presentation, Provenance};
use crate::scalar::{Gauss, Rational};
use crate::subfactor::Inclusion;
use crate::term::Term;
use crate::{Error, Result};

pub const TLJ_WIDTH_CAP: usize = 8;

pub fn catalan(n: usize) -> u64 {
    let mut c = 1u64;
    for i in 0..n as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// A planar perfect matching of `k` top points (`0..k`) and `k` bottom
/// points (`k..2k`, bottom `i` below top `i`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagram(pub Vec<u8>);

impl fmt::Debug for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{:?}", self.0)
    }
}

impl Diagram {
    pub fn width(&self) -> usize {
        self.0.len() / 2
    }

    pub fn identity(k: usize) -> Self {
        Diagram((0..2 * k).map(|p| ((p + k) % (2 * k)) as u8).collect())
    }

    /// Cup-cap joining strands `i-1, i` (1-based `i`) at top and bottom.
    pub fn cup_cap(k: usize, i: usize) -> Self {
        let mut d = Self::identity(k);
        let (a, b) = (i - 1, i);
        d.0[a] = b as u8;
        d.0[b] = a as u8;
        d.0[k + a] = (k + b) as u8;
        d.0[k + b] = (k + a) as u8;
        d
    }

    pub fn flip(&self) -> Self {
        let k = self.width();
        let sw = |p: usize| if p < k { p + k } else { p - k };
        Diagram((0..2 * k).map(|p| sw(self.0[sw(p)] as usize) as u8).collect())
    }

    /// `self` stacked on top of `other`, with the number of closed loops.
    pub fn compose(&self, other: &Diagram) -> (Diagram, u32) {
        let k = self.width();
        let (a, b) = (&self.0, &other.0);
        let mut out = vec![0u8; 2 * k];
        let mut done = vec![false; 2 * k];
        let mut mid = vec![false; k];
        for start in 0..2 * k {
            if done[start] {
                continue;
            }
            // walk from an outer point until another outer point
            let (mut in_a, mut p) = (start < k, start);
            let end = loop {
                if in_a {
                    let q = a[p] as usize;
                    if q < k {
                        break q;
                    }
                    mid[q - k] = true;
                    in_a = false;
                    p = q - k;
                } else {
                    let q = b[p] as usize;
                    if q >= k {
                        break q;
                    }
                    mid[q] = true;
                    in_a = true;
                    p = k + q;
                }
            };
            out[start] = end as u8;
            out[end] = start as u8;
            done[start] = true;
            done[end] = true;
        }
        let mut loops = 0;
        for j in 0..k {
            if mid[j] {
                continue;
            }
            loops += 1;
            let mut m = j;
            loop {
                mid[m] = true;
                m = a[k + m] as usize - k;
                mid[m] = true;
                m = b[m] as usize;
                if m == j {
                    break;
                }
            }
        }
        (Diagram(out), loops)
    }

    /// Loops of the trace closure joining top `i` to bottom `i`.
    pub fn closure_loops(&self) -> u32 {
        let k = self.width();
        let mut seen = vec![false; 2 * k];
        let mut loops = 0;
        for s in 0..2 * k {
            if seen[s] {
                continue;
            }
            loops += 1;
            let mut p = s;
            loop {
                seen[p] = true;
                let q = self.0[p] as usize;
                seen[q] = true;
                p = if q < k { q + k } else { q - k };
                if p == s {
                    break;
                }
            }
        }
        loops
    }
}

/// All planar matchings of width `k`, in a fixed order.
fn diagrams(k: usize) -> Vec<Diagram> {
    // circle order: top 0..k, then bottom k-1..0
    let point = |pos: usize| if pos < k { pos } else { k + (2 * k - 1 - pos) };
    fn rec(pos: &[usize], out: &mut Vec<Vec<(usize, usize)>>) {
        if pos.is_empty() {
            out.push(Vec::new());
            return;
        }
        for j in (1..pos.len()).step_by(2) {
            let mut inner = Vec::new();
            rec(&pos[1..j], &mut inner);
            let mut outer = Vec::new();
            rec(&pos[j + 1..], &mut outer);
            for i in &inner {
                for o in &outer {
                    let mut m = vec![(pos[0], pos[j])];
                    m.extend_from_slice(i);
                    m.extend_from_slice(o);
                    out.push(m);
                }
            }
        }
    }
    let pos: Vec<usize> = (0..2 * k).map(point).collect();
    let mut ms = Vec::new();
    rec(&pos, &mut ms);
    let mut out: Vec<Diagram> = ms
        .into_iter()
        .map(|m| {
            let mut d = vec![0u8; 2 * k];
            for (x, y) in m {
                d[x] = y as u8;
                d[y] = x as u8;
            }
            Diagram(d)
        })
        .collect();
    out.sort();
    out
}

/// The TLJ algebra of width `k` with loop value `δ`, in the diagram basis.
/// Generators are `eᵢ = δ⁻¹ Uᵢ`, `i = 1..k-1`.
pub struct TLAlgebra {
    pub k: usize,
    pub delta: Rational,
    pub diagrams: Vec<Diagram>,
    index: HashMap<Diagram, usize>,
    traces: Vec<Rational>,
    flips: Vec<usize>,
    delta_pow: Vec<Rational>,
}

impl fmt::Debug for TLAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TLAlgebra(k={}, delta={})", self.k, self.delta)
    }
}

fn rpow(x: &Rational, e: i64) -> Rational {
    let mut r = Rational::one();
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

impl TLAlgebra {
    pub fn new(k: usize, delta: Rational) -> Result<Self> {
        if !(2..=TLJ_WIDTH_CAP).contains(&k) {
            return Err(Error::Invalid(format!("TLJ width must be in 2..={TLJ_WIDTH_CAP}")));
        }
        if delta.is_zero() {
            return Err(Error::Invalid("loop value must be nonzero".into()));
        }
        let diagrams = diagrams(k);
        let index: HashMap<Diagram, usize> = diagrams.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
        let traces = diagrams.iter().map(|d| rpow(&delta, d.closure_loops() as i64 - k as i64)).collect();
        let flips = diagrams.iter().map(|d| index[&d.flip()]).collect();
        let delta_pow = (0..=k as i64).map(|e| rpow(&delta, e)).collect();
        Ok(Self { k, delta, diagrams, index, traces, flips, delta_pow })
    }

    /// `t = δ⁻²`.
    pub fn t(&self) -> Rational {
        rpow(&self.delta, -2)
    }

    pub fn dim(&self) -> usize {
        self.diagrams.len()
    }

    pub fn diagram(&self, d: &Diagram) -> Elem {
        let mut c = vec![Gauss::zero(); self.dim()];
        c[self.index[d]] = Gauss::one();
        Elem::Coords(c)
    }

    pub fn e(&self, i: usize) -> Elem {
        self.scale(&self.diagram(&Diagram::cup_cap(self.k, i)), &Gauss::real(self.delta.recip()))
    }

    /// `(D, c)` with `e_{w₁}⋯e_{wₙ} = c·D`; every word in the `eᵢ` is a
    /// multiple of one diagram.
    pub fn word(&self, w: &[usize]) -> (Diagram, Rational) {
        let mut d = Diagram::identity(self.k);
        let mut c = Rational::one();
        let dinv = self.delta.recip();
        for &i in w {
            let (n, loops) = d.compose(&Diagram::cup_cap(self.k, i));
            d = n;
            c = c * &self.delta_pow[loops as usize] * &dinv;
        }
        (d, c)
    }

    pub fn diagram_trace(&self, d: &Diagram) -> Rational {
        self.traces[self.index[d]].clone()
    }
}

fn coords(x: &Elem) -> &[Gauss] {
    match x {
        Elem::Coords(c) => c,
        _ => panic!("diagram coordinates expected"),
    }
}

impl Algebra for TLAlgebra {
    fn name(&self) -> String {
        format!("TLJ width {} delta {}", self.k, self.delta)
    }

    fn arity(&self) -> usize {
        self.k - 1
    }

    fn generator(&self, i: usize) -> Elem {
        self.e(i + 1)
    }

    fn unit(&self) -> Elem {
        self.diagram(&Diagram::identity(self.k))
    }

    fn zero(&self) -> Elem {
        Elem::Coords(vec![Gauss::zero(); self.dim()])
    }

    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        Elem::Coords(coords(a).iter().zip(coords(b)).map(|(x, y)| x + y).collect())
    }

    fn scale(&self, a: &Elem, c: &Gauss) -> Elem {
        Elem::Coords(coords(a).iter().map(|x| x * c).collect())
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let (a, b) = (coords(a), coords(b));
        let mut out = vec![Gauss::zero(); self.dim()];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                let (d, loops) = self.diagrams[i].compose(&self.diagrams[j]);
                let c = (x * y).scale(&self.delta_pow[loops as usize]);
                out[self.index[&d]] += &c;
            }
        }
        Elem::Coords(out)
    }

    fn adjoint(&self, a: &Elem) -> Elem {
        let mut out = vec![Gauss::zero(); self.dim()];
        for (i, x) in coords(a).iter().enumerate() {
            out[self.flips[i]] = x.conj();
        }
        Elem::Coords(out)
    }

    fn trace(&self, a: &Elem) -> Gauss {
        let mut t = Gauss::zero();
        for (x, w) in coords(a).iter().zip(&self.traces) {
            if !x.is_zero() {
                t += &x.scale(w);
            }
        }
        t
    }

    /// Lower bound `δ⁻ᵏ`, valid for `δ ≥ 2`.
    fn min_projection_trace(&self) -> Rational {
        rpow(&self.delta, -(self.k as i64))
    }

    fn direct_coords(&self, a: &Elem) -> Option<Vec<Gauss>> {
        Some(coords(a).to_vec())
    }

    fn spanning_set(&self) -> Vec<Elem> {
        self.diagrams.iter().map(|d| self.diagram(d)).collect()
    }

    fn elem_eq(&self, a: &Elem, b: &Elem) -> bool {
        a == b
    }

    fn is_zero_elem(&self, a: &Elem) -> bool {
        coords(a).iter().all(Gauss::is_zero)
    }
}

/// A TLJ algebra with the inclusion `P_t ⊂ P`, `P_t` generated by
/// `e₂, …, e_{k-1}`.
#[derive(Clone, Debug)]
pub struct Tlj {
    pub alg: Arc<TLAlgebra>,
    pub item: GalleryItem,
}

#[derive(Clone, Debug, Default)]
pub struct RelationReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl Tlj {
    /// Projection, braid-type, commutation relations for all `eᵢ`.
    pub fn check_relations(&self) -> RelationReport {
        let a = self.alg.as_ref();
        let t = Gauss::real(a.t());
        let mut r = RelationReport::default();
        let mut check = |ok: bool, what: String| {
            r.checked += 1;
            if !ok {
                r.failures.push(what);
            }
        };
        let n = a.k - 1;
        for i in 1..=n {
            let ei = a.e(i);
            check(a.mul(&ei, &ei) == ei && a.adjoint(&ei) == ei, format!("e{i} is a projection"));
            for j in 1..=n {
                let ej = a.e(j);
                if i.abs_diff(j) == 1 {
                    let lhs = a.mul(&a.mul(&ei, &ej), &ei);
                    check(lhs == a.scale(&ei, &t), format!("e{i} e{j} e{i} = t e{i}"));
                } else if i.abs_diff(j) >= 2 {
                    check(a.mul(&ei, &ej) == a.mul(&ej, &ei), format!("e{i} e{j} = e{j} e{i}"));
                }
            }
        }
        r
    }
}

pub fn tlj(k: usize, delta: Rational) -> Result<Tlj> {
    let alg = Arc::new(TLAlgebra::new(k, delta)?);
    let r: AlgRef = alg.clone();
    let pres = Presentation::new(r, true, Provenance::Diagram);
    let n = k - 1;
    let sub = (1..n).map(|i| Term::gen(n, i)).collect();
    let inc = Inclusion::new(pres, sub)?.with_label(&format!("TLJ P_t in P width {k}"));
    let item = GalleryItem {
        name: "tlj".into(),
        inclusion: inc,
        concrete: None,
        notes: vec![
            "finite width: the index 1/t is attained only in the limit".into(),
            "positivity of the trace is asserted only at delta = 2".into(),
        ],
    };
    Ok(Tlj { alg, item })
}

#[derive(Clone, Debug)]
pub struct MarkovReport {
    pub i: usize,
    pub max_len: usize,
    pub t: Rational,
    pub words: u64,
    /// First failing word, as generator indices.
    pub failure: Option<Vec<usize>>,
}

impl MarkovReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `tr(w eᵢ) = t tr(w)` for all words `w` on `e₁, …, e_{i-1}` of
/// length at most `max_len`.
pub fn verify_markov(tl: &TLAlgebra, i: usize, max_len: usize) -> Result<MarkovReport> {
    verify_markov_with(tl, i, max_len, &tl.t())
}

/// As [`verify_markov`] against a given `t`.
pub fn verify_markov_with(tl: &TLAlgebra, i: usize, max_len: usize, t: &Rational) -> Result<MarkovReport> {
    if i == 0 || i >= tl.k {
        return Err(Error::Invalid(format!("e{i} is not a generator at width {}", tl.k)));
    }
    let ei = Diagram::cup_cap(tl.k, i);
    let dinv = tl.delta.recip();
    let mut report = MarkovReport { i, max_len, t: t.clone(), words: 0, failure: None };
    // depth-first over words, carrying (diagram, coefficient)
    let mut stack: Vec<(Vec<usize>, Diagram, Rational)> = vec![(Vec::new(), Diagram::identity(tl.k), Rational::one())];
    while let Some((w, d, c)) = stack.pop() {
        report.words += 1;
        let (de, loops) = d.compose(&ei);
        let lhs = &c * &tl.delta_pow[loops as usize] * &dinv * tl.diagram_trace(&de);
        let rhs = t * &c * tl.diagram_trace(&d);
        if lhs != rhs {
            report.failure = Some(w);
            return Ok(report);
        }
        if w.len() < max_len {
            for j in (1..i).rev() {
                let (n, l) = d.compose(&Diagram::cup_cap(tl.k, j));
                let mut w2 = w.clone();
                w2.push(j);
                stack.push((w2, n, &c * &tl.delta_pow[l as usize] * &dinv));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn diagram_counts_are_catalan() {
        for k in 2..=6 {
            assert_eq!(diagrams(k).len() as u64, catalan(k));
        }
    }

    #[test]
    fn cup_cap_square_has_one_loop() {
        let u = Diagram::cup_cap(4, 2);
        let (d, l) = u.compose(&u);
        assert_eq!((d, l), (u, 1));
        assert_eq!(Diagram::identity(3).closure_loops(), 3);
    }

    #[test]
    fn relations_at_width_4() {
        let t = tlj(4, rat(2, 1)).unwrap();
        let r = t.check_relations();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(t.alg.t(), rat(1, 4));
        assert_eq!(t.alg.trace(&t.alg.e(1)), Gauss::ratio(1, 4));
    }

    #[test]
    fn markov_and_negative_control() {
        let t = tlj(5, rat(2, 1)).unwrap();
        assert!(verify_markov(&t.alg, 4, 4).unwrap().passed());
        assert!(!verify_markov_with(&t.alg, 4, 4, &rat(1, 3)).unwrap().passed());
    }

    #[test]
    fn expectation_of_e1() {
        let t = tlj(4, rat(2, 1)).unwrap();
        let inc = &t.item.inclusion;
        let e1 = t.alg.e(1);
        let ex = inc.cond_exp(&e1).unwrap();
        assert_eq!(ex, t.alg.scale(&t.alg.unit(), &Gauss::ratio(1, 4)));
    }
}
