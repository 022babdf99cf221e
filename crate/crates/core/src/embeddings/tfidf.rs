//! TF-IDF with smoothed idf and L2-normalised rows.
//!
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, raw in-document counts as tf.

use std::collections::{BTreeMap, HashMap};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Row-compressed sparse matrix; each row holds `(column, value)` pairs sorted by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRows {
    pub width: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows.len(), self.width));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[[i, j]] = v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Terms in column order (alphabetical).
    terms: Vec<String>,
    idf: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    n_documents: usize,
}

impl TfidfModel {
    /// Fits on `corpus`. With `max_features`, only the most frequent terms
    /// (ties alphabetical) are kept.
    pub fn fit(corpus: &[Document], max_features: Option<usize>) -> Result<Self> {
        if corpus.is_empty() || corpus.iter().any(|d| d.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        let mut tf_total: HashMap<&str, usize> = HashMap::new();
        for doc in corpus {
            let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
            for t in &seen {
                *tf_total.entry(t).or_default() += 1;
            }
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut terms: Vec<&str> = df.keys().copied().collect();
        if let Some(cap) = max_features {
            if cap < terms.len() {
                terms.sort_by(|a, b| tf_total[b].cmp(&tf_total[a]).then_with(|| a.cmp(b)));
                terms.truncate(cap);
                terms.sort_unstable();
            }
        }
        let n = corpus.len() as f64;
        let idf = terms
            .iter()
            .map(|t| ((1.0 + n) / (1.0 + df[t] as f64)).ln() + 1.0)
            .collect();
        let mut model = TfidfModel {
            terms: terms.into_iter().map(str::to_owned).collect(),
            idf,
            index: HashMap::new(),
            n_documents: corpus.len(),
        };
        model.rebuild_index();
        Ok(model)
    }

    pub fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn width(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.index.get(term).map(|&i| self.idf[i])
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    /// Unseen terms are ignored; a document with no known term maps to a zero row.
    pub fn transform(&self, docs: &[Document]) -> SparseRows {
        let rows = docs
            .iter()
            .map(|doc| {
                let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
                for t in doc {
                    if let Some(&j) = self.index.get(t) {
                        *counts.entry(j).or_default() += 1.0;
                    }
                }
                let mut row: Vec<(usize, f64)> = counts
                    .into_iter()
                    .map(|(j, tf)| (j, tf * self.idf[j]))
                    .collect();
                let norm = row.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter_mut().for_each(|(_, v)| *v /= norm);
                }
                row
            })
            .collect();
        SparseRows {
            width: self.width(),
            rows,
        }
    }
}

/// Fits the idf table on `corpus` and returns it with the corpus's own rows.
pub fn fit_tfidf(corpus: &[Document], max_features: Option<usize>) -> Result<(SparseRows, TfidfModel)> {
    let model = TfidfModel::fit(corpus, max_features)?;
    Ok((model.transform(corpus), model))
}
