//! Canonical enumeration of rational points.
//!
//! Terms are listed by size (Σ over monomials of word length plus
//! coefficient height, see [`Term::size`]). Within a size, a term is
//! ordered by its first (shortlex-least) monomial word, then by that
//! monomial's coefficient (height ascending, then the fixed order of
//! [`gauss_of_cost`]), then recursively by the remaining monomials.
//! Index 0 is the zero term. The order is fixed: every search returns the
//! least-index witness in it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{Letter, Term, Word};
use crate::scalar::{gauss_of_cost, Gauss};
use crate::{Error, Result};

/// Largest size handled; counts beyond it are not needed for any budget
/// that fits in memory.
const MAX_SIZE: u64 = 40;

type Count = u128;

fn sat_add(a: Count, b: Count) -> Count {
    a.saturating_add(b)
}

fn sat_mul(a: Count, b: Count) -> Count {
    a.saturating_mul(b)
}

/// Number of terms of each size, exposed for documentation and tests.
#[derive(Clone, Debug)]
pub struct SizeCounts(pub Vec<Count>);

#[derive(Default)]
struct Tables {
    /// (group, size) -> completions starting at the first word of `group`.
    group_start: HashMap<(usize, u64), Count>,
}

/// Index ↔ term bijection for one generator count and unit convention.
#[derive(Clone)]
pub struct Enumerator {
    arity: usize,
    unit: bool,
    coef_lists: Arc<Vec<Vec<Gauss>>>,
    /// tuple_counts[j][t]: ordered j-tuples of nonzero coefficients with total height t.
    tuple_counts: Arc<Vec<Vec<Count>>>,
    tables: Arc<Mutex<Tables>>,
}

impl std::fmt::Debug for Enumerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Enumerator")
            .field("arity", &self.arity)
            .field("unit", &self.unit)
            .finish()
    }
}

impl Enumerator {
    /// `unit` says whether the empty word (the constant `1`) is available.
    pub fn new(arity: usize, unit: bool) -> Self {
        let coef_lists: Vec<Vec<Gauss>> = (0..=MAX_SIZE).map(gauss_of_cost).collect();
        let max = MAX_SIZE as usize;
        let mut tuple_counts = vec![vec![0 as Count; max + 1]; max + 1];
        tuple_counts[0][0] = 1;
        for j in 1..=max {
            for t in 0..=max {
                let mut acc: Count = 0;
                for c in 1..=t {
                    let prev = tuple_counts[j - 1][t - c];
                    if prev > 0 {
                        acc = sat_add(acc, sat_mul(prev, coef_lists[c].len() as Count));
                    }
                }
                tuple_counts[j][t] = acc;
            }
        }
        Self {
            arity,
            unit,
            coef_lists: Arc::new(coef_lists),
            tuple_counts: Arc::new(tuple_counts),
            tables: Arc::new(Mutex::new(Tables::default())),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn has_unit(&self) -> bool {
        self.unit
    }

    fn letters(&self) -> Count {
        2 * self.arity as Count
    }

    /// Number of words of length `len`.
    fn group_len(&self, len: usize) -> Count {
        if len == 0 {
            return self.unit as Count;
        }
        let mut w: Count = 1;
        for _ in 0..len {
            w = sat_mul(w, self.letters());
        }
        w
    }

    fn binom(m: Count, j: usize) -> Count {
        let mut acc: Count = 1;
        for i in 0..j as Count {
            if m < i + 1 {
                return 0;
            }
            // acc * (m - i) / (i + 1) stays integral
            let num = sat_mul(acc, m - i);
            if num == Count::MAX {
                return Count::MAX;
            }
            acc = num / (i + 1);
        }
        acc
    }

    /// Completions using the last `m` words of group `len` and all longer
    /// words, with total size exactly `r`.
    fn suffix_count(&self, len: usize, m: Count, r: u64) -> Count {
        if r == 0 {
            return 1;
        }
        if len as u64 + 1 > r {
            return 0;
        }
        let per = len as u64 + 1;
        let mut total: Count = 0;
        let mut j = 0usize;
        while (j as u64) * per <= r {
            let ways = Self::binom(m, j);
            if ways == 0 && j > 0 {
                break;
            }
            for b in (j as u64 * per)..=r {
                let t = (b - j as u64 * len as u64) as usize;
                let tuples = self.tuple_counts[j][t];
                if tuples == 0 {
                    continue;
                }
                let rest = self.group_start_count(len + 1, r - b);
                total = sat_add(total, sat_mul(ways, sat_mul(tuples, rest)));
            }
            j += 1;
        }
        total
    }

    fn group_start_count(&self, len: usize, r: u64) -> Count {
        if r == 0 {
            return 1;
        }
        if len >= 1 && len as u64 + 1 > r {
            return 0;
        }
        if let Some(v) = self.tables.lock().expect("tables").group_start.get(&(len, r)) {
            return *v;
        }
        let v = self.suffix_count(len, self.group_len(len), r);
        self.tables.lock().expect("tables").group_start.insert((len, r), v);
        v
    }

    /// Completions from word position `pos` of group `len`.
    fn from_pos(&self, len: usize, pos: Count, r: u64) -> Count {
        let w = self.group_len(len);
        if pos >= w {
            return self.group_start_count(len + 1, r);
        }
        if pos == 0 {
            return self.group_start_count(len, r);
        }
        self.suffix_count(len, w - pos, r)
    }

    fn word_at(&self, len: usize, mut pos: Count) -> Word {
        let l = self.letters();
        let mut v = vec![Letter(0); len];
        for i in (0..len).rev() {
            v[i] = Letter((pos % l) as u32);
            pos /= l;
        }
        Word(v)
    }

    fn word_pos(&self, w: &Word) -> Count {
        let l = self.letters();
        w.0.iter().fold(0, |acc, x| acc * l + x.0 as Count)
    }

    /// Number of terms of size exactly `s`.
    pub fn count_of_size(&self, s: u64) -> Count {
        self.group_start_count(0, s)
    }

    pub fn size_counts(&self, up_to: u64) -> SizeCounts {
        SizeCounts((0..=up_to).map(|s| self.count_of_size(s)).collect())
    }

    /// Index of the first term of size `s`.
    pub fn size_offset(&self, s: u64) -> Count {
        (0..s).fold(0, |acc, t| sat_add(acc, self.count_of_size(t)))
    }

    /// The term at enumeration index `n`.
    pub fn term_at(&self, n: u64) -> Result<Term> {
        let mut idx = n as Count;
        for s in 0..=MAX_SIZE {
            let c = self.count_of_size(s);
            if idx < c {
                return Ok(self.unrank(s, idx));
            }
            idx -= c;
        }
        Err(Error::Resource(format!("index {n} beyond enumerated sizes")))
    }

    /// Least index of `t`; the inverse of [`term_at`](Self::term_at).
    pub fn index_of(&self, t: &Term) -> Result<u64> {
        if t.arity() > self.arity {
            t.check_arity(self.arity)?;
        }
        let s = t.size();
        if s > MAX_SIZE {
            return Err(Error::Resource(format!("term size {s} exceeds {MAX_SIZE}")));
        }
        if !self.unit && t.monomials().any(|(w, _)| w.is_empty()) {
            return Err(Error::Invalid("the constant 1 is not a special point here".into()));
        }
        let mut idx = self.size_offset(s);
        let (mut len, mut pos, mut r) = (0usize, 0 as Count, s);
        for (w, c) in t.monomials() {
            let (wl, wp) = (w.len(), self.word_pos(w));
            // terms whose first word lies in [cursor, w)
            idx = sat_add(idx, self.from_pos(len, pos, r) - self.from_pos(wl, wp, r));
            let cost = c.cost();
            for cc in 1..cost {
                let rem = r - wl as u64 - cc;
                idx = sat_add(
                    idx,
                    sat_mul(self.coef_lists[cc as usize].len() as Count, self.from_pos(wl, wp + 1, rem)),
                );
            }
            let k = self.coef_lists[cost as usize]
                .iter()
                .position(|g| g == c)
                .expect("coefficient in its cost list") as Count;
            let rem = r - wl as u64 - cost;
            idx = sat_add(idx, sat_mul(k, self.from_pos(wl, wp + 1, rem)));
            len = wl;
            pos = wp + 1;
            r = rem;
        }
        u64::try_from(idx).map_err(|_| Error::Resource("index overflow".into()))
    }

    fn unrank(&self, s: u64, mut idx: Count) -> Term {
        let mut t = Term::zero(self.arity);
        let (mut len, mut pos, mut r) = (0usize, 0 as Count, s);
        while r > 0 {
            // find group holding the first word
            loop {
                let here = self.from_pos(len, pos, r);
                let next_group = self.group_start_count(len + 1, r);
                let in_group = here - next_group;
                if idx < in_group {
                    break;
                }
                idx -= in_group;
                len += 1;
                pos = 0;
            }
            // binary search: largest q with from_pos(q) >= here - idx
            let here = self.from_pos(len, pos, r);
            let target = here - idx;
            let (mut lo, mut hi) = (pos, self.group_len(len) - 1);
            while lo < hi {
                let mid = lo + (hi - lo).div_ceil(2);
                if self.from_pos(len, mid, r) >= target {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            let q = lo;
            idx -= here - self.from_pos(len, q, r);
            let mut chosen = None;
            'coef: for cc in 1..=(r - len as u64) {
                let rem = r - len as u64 - cc;
                let each = self.from_pos(len, q + 1, rem);
                for g in &self.coef_lists[cc as usize] {
                    if idx < each {
                        chosen = Some((g.clone(), rem));
                        break 'coef;
                    }
                    idx -= each;
                }
            }
            let (g, rem) = chosen.expect("rank within range");
            t.add_monomial(self.word_at(len, q), &g);
            pos = q + 1;
            r = rem;
        }
        t
    }

    /// Calls `f(index, term)` for indices in `start..end` in order until it
    /// returns `false`.
    pub fn visit_range(&self, start: u64, end: u64, mut f: impl FnMut(u64, Term) -> bool) {
        let mut idx = start;
        let mut base: u64 = 0;
        for s in 0..=MAX_SIZE {
            let c = self.count_of_size(s);
            let c64 = u64::try_from(c).unwrap_or(u64::MAX);
            let size_end = base.saturating_add(c64);
            if idx < size_end {
                let mut go = true;
                let skip = (idx - base) as Count;
                let limit = (end.min(size_end) - idx) as Count;
                let mut emitted: Count = 0;
                self.dfs(
                    s,
                    0,
                    0,
                    Term::zero(self.arity),
                    &mut (skip as Count),
                    &mut |t| {
                        if emitted >= limit {
                            return false;
                        }
                        emitted += 1;
                        go = f(idx, t);
                        idx += 1;
                        go
                    },
                );
                if !go || idx >= end {
                    return;
                }
            }
            base = size_end;
            if base >= end {
                return;
            }
        }
    }

    fn dfs(
        &self,
        r: u64,
        len: usize,
        pos: Count,
        prefix: Term,
        skip: &mut Count,
        emit: &mut dyn FnMut(Term) -> bool,
    ) -> bool {
        if r == 0 {
            if *skip > 0 {
                *skip -= 1;
                return true;
            }
            return emit(prefix);
        }
        let total = self.from_pos(len, pos, r);
        if *skip >= total {
            *skip -= total;
            return true;
        }
        let (mut len, mut pos) = (len, pos);
        loop {
            if len > 0 && len as u64 + 1 > r {
                return true;
            }
            let w = self.group_len(len);
            if pos >= w {
                len += 1;
                pos = 0;
                continue;
            }
            // jump over whole first-word positions covered by skip
            let here = self.from_pos(len, pos, r);
            let group_rest = here - self.group_start_count(len + 1, r);
            if *skip >= group_rest {
                *skip -= group_rest;
                len += 1;
                pos = 0;
                continue;
            }
            if *skip > 0 {
                let target = here - *skip;
                let (mut lo, mut hi) = (pos, w - 1);
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    if self.from_pos(len, mid, r) >= target {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                *skip -= here - self.from_pos(len, lo, r);
                pos = lo;
            }
            let word = self.word_at(len, pos);
            for cc in 1..=(r - len as u64) {
                let rem = r - len as u64 - cc;
                let each = self.from_pos(len, pos + 1, rem);
                if each == 0 {
                    continue;
                }
                for g in &self.coef_lists[cc as usize] {
                    if *skip >= each {
                        *skip -= each;
                        continue;
                    }
                    let mut next = prefix.clone();
                    next.add_monomial(word.clone(), g);
                    if !self.dfs(rem, len, pos + 1, next, skip, emit) {
                        return false;
                    }
                }
            }
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn base_cases() {
        let e = Enumerator::new(1, true);
        assert!(e.term_at(0).unwrap().is_zero());
        assert_eq!(e.term_at(1).unwrap(), Term::one(1));
        assert_eq!(e.index_of(&Term::one(1)).unwrap(), 1);
        // size 1: four unit scalars
        assert_eq!(e.count_of_size(1), 4);
    }

    #[test]
    fn rank_unrank_agree() {
        for (arity, unit) in [(1, true), (2, true), (2, false)] {
            let e = Enumerator::new(arity, unit);
            let mut seen = std::collections::HashSet::new();
            e.visit_range(0, 3000, |i, t| {
                assert_eq!(e.term_at(i).unwrap(), t, "index {i}");
                assert_eq!(e.index_of(&t).unwrap(), i);
                assert!(seen.insert(t));
                true
            });
            assert_eq!(seen.len(), 3000);
        }
    }

    #[test]
    fn visit_from_offset() {
        let e = Enumerator::new(2, true);
        let mut got = Vec::new();
        e.visit_range(777, 790, |i, t| {
            got.push((i, t));
            true
        });
        assert_eq!(got.len(), 13);
        for (i, t) in got {
            assert_eq!(e.term_at(i).unwrap(), t);
        }
    }

    #[test]
    fn no_unit_means_no_constant() {
        let e = Enumerator::new(2, false);
        assert!(e.index_of(&parse_term("1", 2).unwrap()).is_err());
        e.visit_range(0, 500, |_, t| {
            assert!(t.monomials().all(|(w, _)| !w.is_empty()));
            true
        });
    }
}
