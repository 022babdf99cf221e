//! Paragraph vectors, PV-DBOW variant: each document vector predicts the
//! tokens of its own document under negative sampling.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::sgns::{self, decayed_lr, init_uniform, NegativeSampler, OutputTable, PairGradient};
use super::vocab::Vocabulary;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DocVectorConfig {
    pub dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives: usize,
    pub min_count: u64,
}

impl Default for DocVectorConfig {
    fn default() -> Self {
        DocVectorConfig {
            dim: 300,
            epochs: 20,
            learning_rate: 0.025,
            negatives: 5,
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DocVectorModel {
    config: DocVectorConfig,
    vocab: Vocabulary,
    vectors: Array2<f64>,
    output: OutputTable,
    sampler: NegativeSampler,
    seed: u64,
    epoch_losses: Vec<f64>,
}

impl DocVectorModel {
    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn epochs(&self) -> usize {
        self.config.epochs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One row per training document.
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Infers a vector for an unseen document with the token tables frozen.
    /// The starting point and sampling stream depend only on the model seed
    /// and the document's tokens.
    pub fn infer(&self, document: &[String]) -> Vec<f64> {
        let dim = self.config.dim;
        let doc_seed = seed::derive_seed(self.seed, &[&document.join(" ")]);
        let mut rng = seed::rng(doc_seed);
        let mut vector = init_uniform(&mut rng, dim, dim);
        let tokens = self.vocab.encode(document);
        if tokens.is_empty() {
            return vector;
        }
        let total = (tokens.len() * self.config.epochs) as u64;
        let mut output = self.output.clone();
        let mut delta = vec![0.0; dim];
        let mut negs = Vec::with_capacity(self.config.negatives);
        let mut step = 0;
        for _ in 0..self.config.epochs {
            for &t in &tokens {
                let lr = decayed_lr(self.config.learning_rate, step, total);
                step += 1;
                self.sampler.fill(&mut rng, self.config.negatives, t, &mut negs);
                delta.fill(0.0);
                sgns::sgd_step(&vector, &mut output, t, &negs, lr, &mut delta, true);
                sgns::axpy(1.0, &delta, &mut vector);
            }
        }
        vector
    }

    pub fn infer_all(&self, documents: &[Document]) -> Array2<f64> {
        let mut out = Array2::zeros((documents.len(), self.config.dim));
        for (i, doc) in documents.iter().enumerate() {
            let v = self.infer(doc);
            out.row_mut(i).iter_mut().zip(v).for_each(|(o, x)| *o = x);
        }
        out
    }
}

/// Gradient of one (document, token, negatives) group with respect to the
/// document vector and the participating output vectors.
pub fn pv_dbow_gradient(doc_vector: &[f64], token_output: &[f64], negatives: &[&[f64]]) -> PairGradient {
    sgns::pair_gradient(doc_vector, token_output, negatives)
}

pub fn train_doc_vectors(corpus: &[Document], config: &DocVectorConfig, seed: u64) -> Result<DocVectorModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if config.dim == 0 || config.epochs == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::InvalidHyperparameter(
            "doc2vec dim, epochs and learning_rate must be positive".into(),
        ));
    }
    let vocab = Vocabulary::build(corpus, config.min_count);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let dim = config.dim;
    let mut rng = seed::rng(seed);
    let init = init_uniform(&mut rng, corpus.len() * dim, dim);
    let mut vectors = Array2::from_shape_vec((corpus.len(), dim), init).expect("shape");
    let mut output = OutputTable::zeros(vocab.len(), dim);
    let sampler = NegativeSampler::new(&vocab);

    let encoded: Vec<Vec<usize>> = corpus.iter().map(|d| vocab.encode(d)).collect();
    let per_epoch: u64 = encoded.iter().map(|d| d.len() as u64).sum();
    let total = per_epoch * config.epochs as u64;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut delta = vec![0.0; dim];
    let mut negs = Vec::with_capacity(config.negatives);
    let mut step = 0;
    for _ in 0..config.epochs {
        let mut loss_sum = 0.0;
        for (d, tokens) in encoded.iter().enumerate() {
            let mut row = vectors.row_mut(d);
            let doc_vec = row.as_slice_mut().expect("contiguous row");
            for &t in tokens {
                let lr = decayed_lr(config.learning_rate, step, total);
                step += 1;
                sampler.fill(&mut rng, config.negatives, t, &mut negs);
                delta.fill(0.0);
                loss_sum += sgns::sgd_step(doc_vec, &mut output, t, &negs, lr, &mut delta, false);
                sgns::axpy(1.0, &delta, doc_vec);
            }
        }
        epoch_losses.push(if per_epoch > 0 { loss_sum / per_epoch as f64 } else { 0.0 });
    }

    Ok(DocVectorModel {
        config: *config,
        vocab,
        vectors,
        output,
        sampler,
        seed,
        epoch_losses,
    })
}
