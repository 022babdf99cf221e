//! Per-token vectors produced by an external encoder, stored as JSON Lines:
//! `{"id": "<doc id>", "tokens": [[f32, ...], ...]}` per document.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    tokens: Vec<Vec<f32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalTokenVectors {
    dim: usize,
    order: Vec<String>,
    docs: HashMap<String, Vec<Vec<f64>>>,
}

impl ExternalTokenVectors {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Document ids in archive order.
    pub fn ids(&self) -> &[String] {
        &self.order
    }

    pub fn tokens(&self, doc_id: &str) -> Option<&[Vec<f64>]> {
        self.docs.get(doc_id).map(Vec::as_slice)
    }

    /// Documents stored with zero token vectors.
    pub fn flagged(&self) -> Vec<&str> {
        self.order
            .iter()
            .filter(|id| self.docs[*id].is_empty())
            .map(String::as_str)
            .collect()
    }

    /// Checks that every dataset document has at least one vector.
    pub fn check_alignment(&self, dataset: &LabeledDataset) -> Result<()> {
        for id in &dataset.ids {
            match self.docs.get(id) {
                Some(v) if !v.is_empty() => {}
                _ => return Err(Error::MissingDocument(id.clone())),
            }
        }
        Ok(())
    }

    pub fn from_documents(docs: Vec<(String, Vec<Vec<f64>>)>) -> Result<Self> {
        let mut dim = None;
        let mut order = Vec::with_capacity(docs.len());
        let mut map = HashMap::with_capacity(docs.len());
        for (id, tokens) in docs {
            for t in &tokens {
                let expected = *dim.get_or_insert(t.len());
                if t.len() != expected || expected == 0 {
                    return Err(Error::VectorDimensionMismatch {
                        doc_id: id,
                        expected,
                        found: t.len(),
                    });
                }
            }
            if map.insert(id.clone(), tokens).is_some() {
                return Err(Error::Parse(format!("duplicate document id {id:?}")));
            }
            order.push(id);
        }
        Ok(ExternalTokenVectors {
            dim: dim.unwrap_or(0),
            order,
            docs: map,
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for id in &self.order {
            let record = Record {
                id: id.clone(),
                tokens: self.docs[id]
                    .iter()
                    .map(|v| v.iter().map(|&x| x as f32).collect())
                    .collect(),
            };
            serde_json::to_writer(&mut writer, &record)?;
            writer.write_all(b"\n").map_err(|e| Error::io("<jsonl writer>", e))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_jsonl(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Parses an archive. The dimension is taken from the first vector and
/// enforced on every later one.
pub fn read_external_vectors<R: BufRead>(reader: R) -> Result<ExternalTokenVectors> {
    let mut docs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        let tokens = rec
            .tokens
            .into_iter()
            .map(|v| v.into_iter().map(f64::from).collect())
            .collect();
        docs.push((rec.id, tokens));
    }
    if docs.is_empty() {
        return Err(Error::Parse("archive contains no records".into()));
    }
    ExternalTokenVectors::from_documents(docs)
}

pub fn load_external_vectors(path: &Path) -> Result<ExternalTokenVectors> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_external_vectors(std::io::BufReader::new(file))
}

/// Unweighted mean of a document's token vectors.
pub fn mean_pool(vectors: &ExternalTokenVectors, doc_id: &str) -> Result<Vec<f64>> {
    let tokens = vectors
        .tokens(doc_id)
        .filter(|t| !t.is_empty())
        .ok_or_else(|| Error::MissingDocument(doc_id.to_owned()))?;
    let mut out = vec![0.0; vectors.dim()];
    for t in tokens {
        for (o, x) in out.iter_mut().zip(t) {
            *o += x;
        }
    }
    let n = tokens.len() as f64;
    out.iter_mut().for_each(|x| *x /= n);
    Ok(out)
}

/// Stand-in archive for a dataset: each distinct token maps to a fixed
/// pseudo-random vector in `[-1, 1)^dim` (values rounded to f32).
pub fn synthetic_token_vectors(dataset: &LabeledDataset, dim: usize, seed: u64) -> ExternalTokenVectors {
    let mut cache: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut docs = Vec::with_capacity(dataset.len());
    for (id, doc) in dataset.ids.iter().zip(&dataset.documents) {
        let tokens = doc
            .iter()
            .map(|t| {
                cache
                    .entry(t.as_str())
                    .or_insert_with(|| {
                        let mut rng = seed::rng(seed::derive_seed(seed, &[t]));
                        (0..dim)
                            .map(|_| f64::from((rng.random::<f64>() * 2.0 - 1.0) as f32))
                            .collect()
                    })
                    .clone()
            })
            .collect();
        docs.push((id.clone(), tokens));
    }
    ExternalTokenVectors::from_documents(docs).expect("uniform dimension by construction")
}
