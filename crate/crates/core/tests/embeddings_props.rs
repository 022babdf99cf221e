mod common;

use embedbench::corpus::Document;
use embedbench::embeddings::doc2vec::pv_dbow_gradient;
use embedbench::embeddings::sgns::pair_gradient;
use embedbench::embeddings::{fit_tfidf, train_term_vectors, SubwordConfig, TermVectorConfig, TermVectorMode};
use proptest::prelude::*;
use rand::Rng;

fn doc(words: &[&str]) -> Document {
    words.iter().map(|w| w.to_string()).collect()
}

#[test]
fn skip_gram_gradient_matches_finite_differences() {
    let mut rng = common::rng(21);
    for _ in 0..100 {
        let (input, positive, negatives) = common::random_ns_group(&mut rng);
        let refs: Vec<&[f64]> = negatives.iter().map(Vec::as_slice).collect();
        let g = pair_gradient(&input, &positive, &refs);
        let err = common::ns_gradient_error(&input, &positive, &negatives, &g);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn pv_dbow_gradient_matches_finite_differences() {
    let mut rng = common::rng(22);
    for _ in 0..100 {
        let (doc_vec, token_out, negatives) = common::random_ns_group(&mut rng);
        let refs: Vec<&[f64]> = negatives.iter().map(Vec::as_slice).collect();
        let g = pv_dbow_gradient(&doc_vec, &token_out, &refs);
        let err = common::ns_gradient_error(&doc_vec, &token_out, &negatives, &g);
        assert!(err < 1e-4, "relative error {err}");
    }
}

fn fnv1a(bytes: &[u8]) -> u32 {
    bytes
        .iter()
        .fold(0x811c_9dc5u32, |h, &b| (h ^ u32::from(b)).wrapping_mul(0x0100_0193))
}

#[test]
fn unseen_token_is_sum_of_its_ngram_buckets() {
    let corpus: Vec<Document> = (0..30)
        .map(|i| if i % 2 == 0 { doc(&["broadband", "internet", "speed"]) } else { doc(&["band", "road", "broad"]) })
        .collect();
    let config = TermVectorConfig {
        mode: TermVectorMode::SubwordSkipGram,
        dim: 16,
        epochs: 3,
        min_count: 1,
        ..TermVectorConfig::fasttext()
    };
    let model = train_term_vectors(&corpus, &config, 5).unwrap();
    assert!(model.whole_vector("broadbandz").is_none());

    let buckets = SubwordConfig::default().buckets;
    let chars: Vec<char> = "<broadbandz>".chars().collect();
    let mut expected = vec![0.0; 16];
    let mut any = false;
    for n in 3..=6 {
        for w in chars.windows(n) {
            let gram: String = w.iter().collect();
            if let Some(v) = model.bucket_vector(fnv1a(gram.as_bytes()) % buckets) {
                any = true;
                for (e, x) in expected.iter_mut().zip(v) {
                    *e += x;
                }
            }
        }
    }
    assert!(any, "shares n-grams with the training words");
    let got = model.token_vector("broadbandz").unwrap();
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-12);
    }
}

#[test]
fn co_occurring_tokens_end_up_closer() {
    // ten token pairs; each document mixes the two tokens of one pair only
    let mut rng = common::rng(23);
    let mut corpus = Vec::new();
    for _ in 0..10 {
        for p in 0..10 {
            let d: Document = (0..8)
                .map(|_| format!("x{p}{}", if rng.random_bool(0.5) { 'a' } else { 'b' }))
                .collect();
            corpus.push(d);
        }
    }
    let config = TermVectorConfig {
        dim: 16,
        epochs: 200,
        min_count: 1,
        window: 2,
        ..TermVectorConfig::word2vec()
    };
    for seed in 0..5 {
        let model = train_term_vectors(&corpus, &config, seed).unwrap();
        let v = |t: &str| model.token_vector(t).unwrap();
        let together = common::cosine(&v("x0a"), &v("x0b"));
        let apart = common::cosine(&v("x0a"), &v("x1a"));
        assert!(together > apart, "{together} vs {apart}");
    }
}

proptest! {
    #[test]
    fn tfidf_rows_are_unit_length(
        docs in prop::collection::vec(prop::collection::vec(0usize..6, 1..12), 1..15),
        unseen in prop::collection::vec(prop::collection::vec(0usize..9, 0..8), 1..6),
    ) {
        let vocab = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];
        let words = |d: &Vec<usize>| -> Document { d.iter().map(|&i| vocab[i].to_string()).collect() };
        let corpus: Vec<Document> = docs.iter().map(words).collect();
        let (rows, model) = fit_tfidf(&corpus, None).unwrap();
        for row in &rows.rows {
            let norm: f64 = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-9);
        }
        let others: Vec<Document> = unseen.iter().map(words).collect();
        for (d, row) in others.iter().zip(&model.transform(&others).rows) {
            let norm: f64 = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if d.iter().any(|t| model.idf(t).is_some()) {
                prop_assert!((norm - 1.0).abs() < 1e-9);
            } else {
                prop_assert!(row.is_empty());
            }
        }
    }
}
