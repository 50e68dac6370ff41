use num_traits::One;
use rayon::prelude::*;

use super::{pp, Inclusion};
use crate::algebra::Elem;
use crate::numeric::CMat;
use crate::scalar::{pow2_neg, to_f64, Gauss, Rational};
use crate::search::{pool, SearchConfig};
use crate::term::Term;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexMethod {
    PpInf,
    BasisTrace,
    Declared,
    Jump,
}

impl std::fmt::Display for IndexMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IndexMethod::PpInf => "pp-inf-formula",
            IndexMethod::BasisTrace => "basis-trace",
            IndexMethod::Declared => "declared",
            IndexMethod::Jump => "jump",
        })
    }
}

/// Index information: `inv_upper` is a certified upper bound on `[M:N]⁻¹`
/// (so `1/inv_upper` bounds the index below); `upper` is an upper bound on
/// the index when one is known.
#[derive(Clone, Debug)]
pub struct IndexEstimate {
    pub method: IndexMethod,
    pub inv_upper: Rational,
    pub lower: Rational,
    pub upper: Option<Rational>,
    pub converged: bool,
    /// `(candidate, term index, power, term)` realizing `inv_upper`.
    pub witness: Option<(u64, u64, u32, Term)>,
    /// Running values `(candidate, ratio)` at each improvement.
    pub history: Vec<(u64, Rational)>,
    pub candidates: u64,
}

/// Positive points `(y*y)^(2^j) + 2^-m·1`, ordered by the term index of `y`
/// and then by `j < powers`.
#[derive(Clone, Copy, Debug)]
pub struct PositiveCandidates {
    pub powers: u32,
    pub shift_bits: u32,
}

impl Default for PositiveCandidates {
    fn default() -> Self {
        Self { powers: 4, shift_bits: 64 }
    }
}

impl PositiveCandidates {
    pub fn split(&self, c: u64) -> (u64, u32) {
        (c / self.powers as u64, (c % self.powers as u64) as u32)
    }

    pub fn exact(&self, inc: &Inclusion, y: &Term, j: u32) -> Result<Elem> {
        let alg = inc.ambient.alg.as_ref();
        let ye = inc.ambient.eval(y)?;
        let mut x = alg.mul(&alg.adjoint(&ye), &ye);
        for _ in 0..j {
            x = alg.mul(&x, &x);
        }
        Ok(alg.add(&x, &alg.scale(&alg.unit(), &Gauss::real(pow2_neg(self.shift_bits)))))
    }

    fn numeric(&self, m: &CMat, j: u32) -> CMat {
        let mut x = m.adjoint() * m;
        for _ in 0..j {
            let n = x.norm().max(1e-300);
            x = &x / num_complex::Complex64::new(n, 0.0);
            x = &x * &x;
        }
        x
    }
}

/// `‖E(x)‖₂² / ‖x‖₂²`, exactly.
pub fn pp_ratio(inc: &Inclusion, x: &Elem) -> Result<Rational> {
    let alg = inc.ambient.alg.as_ref();
    let ex = inc.cond_exp(x)?;
    Ok(alg.two_norm_sqr(&ex) / alg.two_norm_sqr(x))
}

/// Running minimum of `‖E(x)‖₂²/‖x‖₂²` over the first `budget` positive
/// candidates: a non-increasing upper bound for `[M:N]⁻¹`.
pub fn pp_inf_search(inc: &Inclusion, cfg: SearchConfig, pc: PositiveCandidates) -> Result<IndexEstimate> {
    let en = inc.ambient.enumerator();
    let num = inc.ambient.numeric().zip(inc.numeric());
    let mut best = Rational::one();
    let mut best_f = 1.0f64;
    let mut witness = None;
    let mut history = Vec::new();
    const CHUNK: u64 = 4096;
    let term_budget = cfg.budget.div_ceil(pc.powers as u64);
    let mut start = 0;
    while start < term_budget {
        let end = (start + CHUNK).min(term_budget);
        let ids: Vec<u64> = (start..end).collect();
        let score = |i: &u64| -> (u64, Term, Vec<f64>) {
            let t = en.term_at(*i).expect("index in range");
            let r = match num {
                Some((nm, ne)) => {
                    let m = nm.eval(&t);
                    (0..pc.powers)
                        .map(|j| {
                            let x = pc.numeric(&m, j);
                            let d = nm.two_norm(&x).powi(2);
                            if d < 1e-200 { 1.0 } else { ne.norm_sqr(&x) / d }
                        })
                        .collect()
                }
                None => vec![f64::NEG_INFINITY; pc.powers as usize],
            };
            (*i, t, r)
        };
        let scored: Vec<(u64, Term, Vec<f64>)> = if cfg.workers <= 1 {
            ids.iter().map(score).collect()
        } else {
            pool(cfg.workers).install(|| ids.par_iter().map(score).collect())
        };
        for (i, t, rs) in scored {
            for (j, rf) in rs.into_iter().enumerate() {
                let c = i * pc.powers as u64 + j as u64;
                if c >= cfg.budget || t.is_zero() {
                    continue;
                }
                if rf > best_f - 1e-9 * best_f.abs() && rf.is_finite() {
                    continue;
                }
                let x = pc.exact(inc, &t, j as u32)?;
                let r = pp_ratio(inc, &x)?;
                if r < best {
                    best_f = to_f64(&r);
                    best = r.clone();
                    witness = Some((c, i, j as u32, t.clone()));
                    history.push((c, r));
                }
            }
        }
        start = end;
    }
    let upper = match &inc.basis {
        Some(b) => Some(pp::index_from_basis(inc, b, 40)?),
        None => None,
    };
    let lower = Rational::one() / &best;
    let converged = upper.as_ref().is_some_and(|u| *u == lower);
    Ok(IndexEstimate {
        method: IndexMethod::PpInf,
        inv_upper: best,
        lower,
        upper,
        converged,
        witness,
        history,
        candidates: cfg.budget,
    })
}

pub fn index_pp_inf(inc: &Inclusion, cfg: SearchConfig) -> Result<IndexEstimate> {
    pp_inf_search(inc, cfg, PositiveCandidates::default())
}

