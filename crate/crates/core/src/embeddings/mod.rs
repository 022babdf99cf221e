//! Term and document embeddings.

pub mod doc2vec;
pub mod external;
pub mod sgns;
pub mod subword;
pub mod tfidf;
pub mod vocab;
pub mod word2vec;

pub use doc2vec::{train_doc_vectors, DocVectorConfig, DocVectorModel};
pub use external::{load_external_vectors, mean_pool, ExternalTokenVectors};
pub use subword::SubwordConfig;
pub use tfidf::{fit_tfidf, SparseRows, TfidfModel};
pub use vocab::Vocabulary;
pub use word2vec::{lookup_term_matrix, train_term_vectors, TermVectorConfig, TermVectorMode, TermVectorModel};

/// True when the exponentially smoothed series (span `window`) never rises.
pub fn smoothed_non_increasing(values: &[f64], window: usize) -> bool {
    let alpha = 2.0 / (window as f64 + 1.0);
    let mut smoothed: Option<f64> = None;
    let mut prev = f64::INFINITY;
    for &v in values {
        let s = match smoothed {
            None => v,
            Some(s) => alpha * v + (1.0 - alpha) * s,
        };
        if s > prev {
            return false;
        }
        prev = s;
        smoothed = Some(s);
    }
    true
}
