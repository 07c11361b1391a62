mod common;

use proppkit::annotation::{AnnotatedSegment, Annotation, FunctionSequence, Genre};
use proppkit::homogenization::{
    analyze_episodes, edit_distance, frequency_profile, lcs_length, sample_windows, seq_similarity, EpisodeSet,
    FrequencyProfile, SampleOptions,
};
use proppkit::taxonomy::{FunctionSymbol, FUNCTION_COUNT};
use proptest::prelude::*;

fn corpus() -> impl Strategy<Value = Vec<AnnotatedSegment>> {
    prop::collection::vec((0usize..6, 1usize..80, prop::collection::vec((0usize..80, common::symbol()), 0..6)), 1..30)
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (novel, len, anns))| {
                    let mut annotations: Vec<Annotation> = anns
                        .into_iter()
                        .map(|(o, symbol)| Annotation { offset: o % (len + 1), symbol })
                        .collect();
                    annotations.sort_by_key(|a| a.offset);
                    AnnotatedSegment {
                        id: format!("s{i}"),
                        genre: Genre::Fantasy,
                        clean_text: "字".repeat(len),
                        annotations,
                        rationale: None,
                        annotator_id: None,
                        novel: Some(format!("n{novel}")),
                    }
                })
                .collect()
        })
}

proptest! {
    #[test]
    fn edit_distance_matches_reference(a in prop::collection::vec(common::small_symbol(), 0..12), b in prop::collection::vec(common::small_symbol(), 0..12)) {
        prop_assert_eq!(edit_distance(&a, &b), strsim::generic_levenshtein(&a, &b));
        prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
        prop_assert!(lcs_length(&a, &b) <= a.len().min(b.len()));
    }

    #[test]
    fn similarity_symmetric_and_bounded(a in common::sequence(10), b in common::sequence(10)) {
        let s = seq_similarity(&a, &b).unwrap();
        prop_assert_eq!(s, seq_similarity(&b, &a).unwrap());
        prop_assert!(s <= 1.into());
        prop_assert_eq!(seq_similarity(&a, &a).unwrap(), 1.into());
    }

    #[test]
    fn episode_order_is_irrelevant(eps in prop::collection::vec(common::sequence(8), 2..6), rot in 0usize..6) {
        let a = analyze_episodes(&EpisodeSet::new(eps.clone()).unwrap()).unwrap();
        let mut r = eps.clone();
        let k = rot % r.len();
        r.rotate_left(k);
        r.reverse();
        let b = analyze_episodes(&EpisodeSet::new(r).unwrap()).unwrap();
        prop_assert!((a.mean_similarity - b.mean_similarity).abs() < 1e-12);
        prop_assert_eq!(a.first_marker_consistency, b.first_marker_consistency);
        prop_assert_eq!(a.last_marker_consistency, b.last_marker_consistency);
        prop_assert_eq!(a.distinct_ratio, b.distinct_ratio);
    }

    #[test]
    fn profile_partition(seqs in prop::collection::vec(prop::collection::vec(common::symbol(), 0..20).prop_map(FunctionSequence::new), 0..20)) {
        let p = frequency_profile(&seqs);
        prop_assert_eq!(p.total, seqs.iter().map(|s| s.len()).sum::<usize>());
        prop_assert_eq!(p.common_set.len() + p.rare_set.len(), FUNCTION_COUNT);
        let mean = p.total as f64 / FUNCTION_COUNT as f64;
        for s in FunctionSymbol::ALL {
            prop_assert_eq!(p.is_common(s), p.count(s) as f64 > mean);
            prop_assert_ne!(p.common_set.contains(&s), p.rare_set.contains(&s));
        }
    }

    #[test]
    fn windows_are_deterministic_and_in_bounds(c in corpus(), seed in any::<u64>(), chars in 1usize..50) {
        let opts = SampleOptions { groups: 2, novels_per_group: 1, chars, seed };
        let a = sample_windows(&c, opts);
        let b = sample_windows(&c, opts);
        prop_assert_eq!(&a, &b);
        if let Ok(ws) = a {
            prop_assert_eq!(ws.len(), 2);
            for w in &ws {
                let len = w.clean_text.chars().count();
                prop_assert!(len <= chars);
                prop_assert!(w.annotations.iter().all(|a| a.offset <= len));
            }
        }
    }
}

#[test]
fn profile_from_fixed_total() {
    let mut counts = [0usize; FUNCTION_COUNT];
    counts[0] = 300;
    counts[1] = 32;
    let p = FrequencyProfile::from_counts(counts);
    assert_eq!(p.total, 332);
    assert!(p.to_text().contains("mean: 9.76"));
    assert_eq!(p.common_set.len(), 2);
}
