use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;

/// Token index with per-token counts. Indices are dense and ordered by
/// descending count, ties broken alphabetically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    min_count: u64,
    total: u64,
}

impl Vocabulary {
    pub fn build(corpus: &[Document], min_count: u64) -> Self {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in corpus {
            for tok in doc {
                *counts.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let tokens: Vec<String> = kept.iter().map(|(t, _)| (*t).to_owned()).collect();
        let counts: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
        let total = counts.iter().sum();
        let mut vocab = Vocabulary {
            tokens,
            counts,
            index: HashMap::new(),
            min_count,
            total,
        };
        vocab.rebuild_index();
        vocab
    }

    /// Restores the lookup table after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Number of retained token occurrences.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Maps a document to in-vocabulary indices, dropping unknown tokens.
    pub fn encode(&self, doc: &[String]) -> Vec<usize> {
        doc.iter().filter_map(|t| self.get(t)).collect()
    }
}
