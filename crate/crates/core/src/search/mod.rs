//! Certified searches over the canonical enumeration of rational points.
//!
//! Every search returns the witness of least enumeration index among those
//! accepted by an exact check. Work is split into fixed chunks processed in
//! waves; the least hit of the first wave containing a hit is returned, so
//! the answer does not depend on the worker count.

mod implement;
mod projection;
mod quasi;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub use implement::{
    find_implement, find_subequivalence, implement_threshold, is_quasi_implement, polar_distance, polar_oracle, ImplementStage, ProjPair, StageSource, ImplementChain, QuasiImplementWitness,
};
pub use projection::{
    find_identity, find_projection_near, ExactStage, nearest_projection_oracle, orthogonal_projection_family,
    projection_with_trace_approx, projection_with_trace_exact, ProjChain, ProjectionStage,
};
pub use quasi::{is_quasi_projection, QuasiProjectionWitness, Verdict};

use crate::presentation::Presentation;
use crate::term::Term;
use crate::{Error, Result};

const CHUNK: u64 = 512;

/// Search limits shared by all procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Enumeration indices `0..budget` are examined.
    pub budget: u64,
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { budget: 200_000, workers: 1 }
    }
}

impl SearchConfig {
    pub fn new(budget: u64, workers: usize) -> Self {
        Self { budget, workers: workers.max(1) }
    }
}

pub(crate) fn pool(workers: usize) -> Arc<rayon::ThreadPool> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let mut map = POOLS.get_or_init(Default::default).lock().expect("pool map");
    map.entry(workers)
        .or_insert_with(|| {
            Arc::new(rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool"))
        })
        .clone()
}

/// Least index in `0..cfg.budget` whose term passes `accept`.
pub fn least_witness<W: Send>(
    pres: &Presentation,
    cfg: SearchConfig,
    stage: &str,
    accept: impl Fn(&Term) -> Option<W> + Sync,
) -> Result<(u64, Term, W)> {
    let en = pres.enumerator();
    let scan = |start: u64| -> Option<(u64, Term, W)> {
        let end = (start + CHUNK).min(cfg.budget);
        let mut hit = None;
        en.visit_range(start, end, |i, t| match accept(&t) {
            Some(w) => {
                hit = Some((i, t, w));
                false
            }
            None => true,
        });
        hit
    };
    let wave = CHUNK * (cfg.workers as u64) * 2;
    let mut start = 0;
    while start < cfg.budget {
        let starts: Vec<u64> = (start..(start + wave).min(cfg.budget)).step_by(CHUNK as usize).collect();
        let hits: Vec<Option<(u64, Term, W)>> = if cfg.workers <= 1 {
            let mut out = Vec::new();
            for s in starts {
                let h = scan(s);
                let stop = h.is_some();
                out.push(h);
                if stop {
                    break;
                }
            }
            out
        } else {
            use rayon::prelude::*;
            pool(cfg.workers).install(|| starts.par_iter().map(|&s| scan(s)).collect())
        };
        if let Some(best) = hits.into_iter().flatten().min_by_key(|h| h.0) {
            return Ok(best);
        }
        start += wave;
    }
    Err(Error::BudgetExhausted { budget: cfg.budget, stage: stage.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::matrix::QMat;
    use crate::presentation::Provenance;

    #[test]
    fn least_index_is_worker_independent() {
        let a = MatrixAlgebra::full(2, vec![QMat::unit(2, 0, 1), QMat::unit(2, 1, 1)]).unwrap();
        let p = Presentation::new(Arc::new(a), true, Provenance::MatrixBackend);
        let pred = |t: &Term| (t.len() == 3 && t.degree() == 2).then_some(());
        let a1 = least_witness(&p, SearchConfig::new(50_000, 1), "t", pred).unwrap();
        let a4 = least_witness(&p, SearchConfig::new(50_000, 4), "t", pred).unwrap();
        assert_eq!(a1.0, a4.0);
        assert_eq!(a1.1, a4.1);
        assert!(matches!(
            least_witness(&p, SearchConfig::new(10, 2), "t", |_| None::<()>),
            Err(Error::BudgetExhausted { .. })
        ));
    }
}
