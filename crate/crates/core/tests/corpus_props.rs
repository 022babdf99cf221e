use std::collections::BTreeSet;

use embedbench::corpus::{build_dataset, clean_text, DatasetKind, DatasetSpec, RawReview};
use proptest::prelude::*;

fn pool(per_star: usize) -> Vec<RawReview> {
    let mut out = Vec::new();
    for stars in 1..=5u8 {
        for i in 0..per_star {
            out.push(RawReview::new(format!("Review number {i} with {stars} stars!"), stars).unwrap());
        }
    }
    out
}

fn kind() -> impl Strategy<Value = DatasetKind> {
    prop::sample::select(DatasetKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_datasets_are_balanced_and_unique(kind in kind(), groups in 1usize..12, seed in any::<u64>()) {
        let k = kind.num_classes();
        let size = groups * k * 2;
        let reviews = pool(size);
        let ds = build_dataset(&reviews, DatasetSpec::new(kind, size).unwrap(), seed).unwrap();
        prop_assert_eq!(ds.len(), size);
        let counts = ds.class_counts();
        prop_assert_eq!(counts.len(), k);
        prop_assert!(counts.values().all(|&c| c == size / k));
        let distinct: BTreeSet<&Vec<String>> = ds.documents.iter().collect();
        prop_assert_eq!(distinct.len(), size);
        prop_assert_eq!(&build_dataset(&reviews, DatasetSpec::new(kind, size).unwrap(), seed).unwrap(), &ds);
    }

    #[test]
    fn clean_text_is_idempotent(raw in "\\PC{0,60}") {
        let once = clean_text(&raw);
        prop_assert_eq!(clean_text(&once.join(" ")), once.clone());
        prop_assert!(once.iter().all(|t| !t.is_empty() && t.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())));
    }
}
