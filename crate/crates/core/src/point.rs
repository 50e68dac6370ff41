//! Computable points: precision-indexed resolvers returning terms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::algebra::Elem;
use crate::term::Term;
use crate::Result;

type Resolver = dyn Fn(u32) -> Result<Term> + Send + Sync;

/// `resolve(k)` is a term within `2^-k` of the point in 2-norm.
#[derive(Clone)]
pub struct ComputablePoint {
    resolver: Arc<Resolver>,
    cache: Arc<Mutex<BTreeMap<u32, Term>>>,
    /// The exact element, when known (backend-certified points).
    pub exact: Option<Elem>,
    /// Set when every resolution is the same exact term.
    pub exact_term: Option<Term>,
}

impl fmt::Debug for ComputablePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComputablePoint")
            .field("exact_term", &self.exact_term)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ComputablePoint {
    pub fn new(resolver: impl Fn(u32) -> Result<Term> + Send + Sync + 'static) -> Self {
        Self { resolver: Arc::new(resolver), cache: Arc::default(), exact: None, exact_term: None }
    }

    /// A point given exactly by a term.
    pub fn from_term(t: Term, exact: Option<Elem>) -> Self {
        let tt = t.clone();
        Self {
            resolver: Arc::new(move |_| Ok(tt.clone())),
            cache: Arc::default(),
            exact,
            exact_term: Some(t),
        }
    }

    pub fn with_exact(mut self, e: Elem) -> Self {
        self.exact = Some(e);
        self
    }

    pub fn resolve(&self, k: u32) -> Result<Term> {
        if let Some(t) = &self.exact_term {
            return Ok(t.clone());
        }
        if let Some(t) = self.cache.lock().expect("cache").get(&k) {
            return Ok(t.clone());
        }
        let t = (self.resolver)(k)?;
        self.cache.lock().expect("cache").insert(k, t.clone());
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn memoizes() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let p = ComputablePoint::new(move |_| {
            c.fetch_add(1, Ordering::SeqCst);
            Ok(Term::one(1))
        });
        p.resolve(3).unwrap();
        p.resolve(3).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }
}
