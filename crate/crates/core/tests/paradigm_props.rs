mod common;

use proppkit::annotation::FunctionSequence;
use proppkit::paradigm::{
    matches, mine, parse_pattern, support, Connector, Fraction, MineOptions, ParadigmPattern, PatternElement,
};
use proptest::prelude::*;

fn element() -> impl Strategy<Value = PatternElement> {
    prop_oneof![
        common::small_symbol().prop_map(PatternElement::Symbol),
        (common::small_symbol(), common::small_symbol())
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(a, b)| PatternElement::alt([a, b]).unwrap()),
    ]
}

fn pattern() -> impl Strategy<Value = ParadigmPattern> {
    (prop::collection::vec(element(), 2..5), any::<bool>()).prop_map(|(els, linear)| {
        let c = if linear { Connector::Linear } else { Connector::Nonlinear };
        let n = els.len();
        ParadigmPattern::new(els, vec![c; n - 1]).unwrap()
    })
}

proptest! {
    #[test]
    fn matcher_equals_exhaustive_search(seq in common::sequence(9), p in pattern()) {
        prop_assert_eq!(matches(&seq, &p).unwrap().matched, common::brute_force_match(&seq.symbols, &p));
    }

    #[test]
    fn matches_are_anchored(seq in common::sequence(9), p in pattern()) {
        let m = matches(&seq, &p).unwrap();
        if m.matched {
            prop_assert!(p.start().accepts(seq.symbols[0]));
            prop_assert!(p.end().accepts(*seq.symbols.last().unwrap()));
            prop_assert!(m.bindings.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn dropping_an_interior_keeps_matches(seq in common::sequence(9), p in pattern()) {
        if matches(&seq, &p).unwrap().matched {
            for i in 0..p.interior().len() {
                prop_assert!(matches(&seq, &p.without_interior(i)).unwrap().matched);
            }
        }
    }

    #[test]
    fn widening_keeps_matches(seq in common::sequence(9), p in pattern(), extra in common::symbol(), at in 0usize..5) {
        let at = at % p.elements().len();
        if matches(&seq, &p).unwrap().matched {
            prop_assert!(matches(&seq, &p.widened(at, extra)).unwrap().matched);
        }
    }

    #[test]
    fn canonical_round_trip(p in pattern()) {
        let text = p.to_string();
        let back = parse_pattern(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn mined_patterns_meet_their_threshold(
        seqs in prop::collection::vec(common::sequence(7), 1..25),
        num in 1u64..=10,
        max_alt in 1usize..4,
    ) {
        let t = Fraction::new(num, 10);
        if let Ok(m) = mine(&seqs, MineOptions { min_support: t, max_alt }) {
            let s = support(&seqs, &m.pattern).unwrap();
            prop_assert!(s.fraction() >= t);
            prop_assert_eq!(s, m.support);
            let linear = m.pattern.connectors().iter().all(|c| *c == Connector::Linear);
            prop_assert_eq!(linear && !m.pattern.interior().is_empty() || m.pattern.interior().is_empty(), true);
        }
    }
}

#[test]
fn alternation_order_is_irrelevant() {
    assert_eq!(parse_pattern("(A)->{S/O}").unwrap(), parse_pattern("(A)->{O/S}").unwrap());
    let seq: FunctionSequence = "A-O".parse().unwrap();
    assert!(matches(&seq, &parse_pattern("(A)->{S/O}").unwrap()).unwrap().matched);
}
