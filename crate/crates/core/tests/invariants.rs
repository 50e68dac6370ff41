use num_traits::{Signed, Zero};
use proptest::prelude::*;

use vnwb_core::basic::m1_trace;
use vnwb_core::gallery::amplification_m2;
use vnwb_core::scalar::rat;
use vnwb_core::term::parse_term;
use vnwb_core::{Certificate, Enumerator, Status, Term};

const INDEX_RANGE: u64 = 400_000;

fn term_at(arity: usize, n: u64) -> Term {
    Enumerator::new(arity, true).term_at(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_is_a_bijection(n in 0..INDEX_RANGE) {
        let en = Enumerator::new(3, true);
        let t = en.term_at(n).unwrap();
        prop_assert_eq!(en.index_of(&t).unwrap(), n);
    }

    #[test]
    fn display_parses_back(n in 0..INDEX_RANGE) {
        let t = term_at(4, n);
        prop_assert_eq!(parse_term(&t.to_string(), 4).unwrap(), t);
    }

    #[test]
    fn star_algebra_laws(a in 0..INDEX_RANGE, b in 0..INDEX_RANGE, c in 0..INDEX_RANGE) {
        let (s, t, u) = (term_at(3, a), term_at(3, b), term_at(3, c));
        prop_assert_eq!(s.mul(&t).adjoint(), t.adjoint().mul(&s.adjoint()));
        prop_assert_eq!(s.mul(&t).mul(&u), s.mul(&t.mul(&u)));
        prop_assert_eq!(s.mul(&t.add(&u)), s.mul(&t).add(&s.mul(&u)));
        prop_assert_eq!(s.adjoint().adjoint(), s.clone());
        prop_assert!(s.sub(&s).is_zero());
    }

    #[test]
    fn backend_trace_is_tracial_and_positive(a in 0..INDEX_RANGE, b in 0..INDEX_RANGE) {
        let p = amplification_m2().inclusion.ambient;
        let (s, t) = (term_at(4, a), term_at(4, b));
        prop_assert_eq!(p.trace_exact(&s.mul(&t)).unwrap(), p.trace_exact(&t.mul(&s)).unwrap());
        let n = p.trace_exact(&t.adjoint().mul(&t)).unwrap();
        prop_assert!(n.im.is_zero() && !n.re.is_negative());
        prop_assert_eq!(n.re, p.norm_sqr(&t).unwrap());
    }

    #[test]
    fn m1_trace_is_tracial(a in 0..INDEX_RANGE, b in 0..INDEX_RANGE) {
        let g = amplification_m2();
        let tau = rat(1, 4);
        let (s, t) = (term_at(5, a), term_at(5, b));
        let st = m1_trace(&g.inclusion, &tau, &s.mul(&t)).unwrap();
        let ts = m1_trace(&g.inclusion, &tau, &t.mul(&s)).unwrap();
        prop_assert_eq!(st, ts);
        let n = m1_trace(&g.inclusion, &tau, &t.adjoint().mul(&t)).unwrap();
        prop_assert!(n.im.is_zero() && !n.re.is_negative());
    }

    #[test]
    fn certificate_text_round_trips(
        kind in "[a-z]{1,12}",
        partial in any::<bool>(),
        fields in prop::collection::vec(("[a-z][a-z0-9-]{0,10}", "[ -~]{0,40}"), 0..8),
    ) {
        let mut c = Certificate::new(&kind, "vnwb-backend v1\ndims 1\n".into());
        if partial {
            c.status = Status::Partial;
        }
        for (k, v) in &fields {
            c.push(k, v.trim());
        }
        let back = Certificate::parse(&c.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), c.to_text());
    }
}
