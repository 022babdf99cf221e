//! Word2Vec (skip-gram / CBOW) and the subword skip-gram variant, trained
//! with negative sampling on a single worker.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sgns::{self, decayed_lr, init_uniform, NegativeSampler, OutputTable};
use super::subword::SubwordConfig;
use super::vocab::Vocabulary;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::features::TermMatrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermVectorMode {
    SkipGram,
    Cbow,
    SubwordSkipGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermVectorConfig {
    pub mode: TermVectorMode,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub subword: SubwordConfig,
}

impl TermVectorConfig {
    /// Skip-gram, 100 dimensions.
    pub fn word2vec() -> Self {
        TermVectorConfig {
            mode: TermVectorMode::SkipGram,
            dim: 100,
            window: 5,
            negatives: 5,
            min_count: 2,
            epochs: 20,
            learning_rate: 0.025,
            subword: SubwordConfig::default(),
        }
    }

    /// Subword skip-gram, 300 dimensions.
    pub fn fasttext() -> Self {
        TermVectorConfig {
            mode: TermVectorMode::SubwordSkipGram,
            dim: 300,
            ..Self::word2vec()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.epochs == 0 {
            return Err(Error::InvalidHyperparameter(
                "dim, window and epochs must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidHyperparameter("learning_rate must be > 0".into()));
        }
        if self.mode == TermVectorMode::SubwordSkipGram
            && (self.subword.min_n == 0
                || self.subword.min_n > self.subword.max_n
                || self.subword.buckets == 0)
        {
            return Err(Error::InvalidHyperparameter("bad subword n-gram settings".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TermVectorModel {
    config: TermVectorConfig,
    vocab: Vocabulary,
    /// Whole-token input vectors, `V × dim` row-major.
    input: Vec<f64>,
    output: OutputTable,
    /// Bucket id to row of `ngram_table`; buckets absent here hold zero vectors.
    ngram_rows: HashMap<u32, usize>,
    ngram_table: Vec<f64>,
    /// Rows of `ngram_table` used by each vocabulary word.
    word_ngrams: Vec<Vec<usize>>,
    epoch_losses: Vec<f64>,
}

impl TermVectorModel {
    pub fn config(&self) -> &TermVectorConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Mean loss per training group for every epoch.
    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    /// The whole-token input vector; `None` for out-of-vocabulary tokens.
    pub fn whole_vector(&self, token: &str) -> Option<&[f64]> {
        let dim = self.config.dim;
        self.vocab
            .get(token)
            .map(|i| &self.input[i * dim..(i + 1) * dim])
    }

    /// The trained vector of a hash bucket; `None` if training never touched it.
    pub fn bucket_vector(&self, bucket: u32) -> Option<&[f64]> {
        let dim = self.config.dim;
        self.ngram_rows
            .get(&bucket)
            .map(|&r| &self.ngram_table[r * dim..(r + 1) * dim])
    }

    /// The vector representing `token`, or `None` if it has no representation.
    ///
    /// In subword mode this is the whole-token vector (zero when out of
    /// vocabulary) plus the vectors of all its n-gram buckets.
    pub fn token_vector(&self, token: &str) -> Option<Vec<f64>> {
        let dim = self.config.dim;
        let whole = self.whole_vector(token);
        if self.config.mode != TermVectorMode::SubwordSkipGram {
            return whole.map(<[f64]>::to_vec);
        }
        let mut out = whole.map_or_else(|| vec![0.0; dim], <[f64]>::to_vec);
        let mut found = whole.is_some();
        for b in self.config.subword.buckets_of(token) {
            if let Some(v) = self.bucket_vector(b) {
                sgns::axpy(1.0, v, &mut out);
                found = true;
            }
        }
        found.then_some(out)
    }

    fn compose_input(&self, word: usize, buf: &mut [f64]) {
        let dim = self.config.dim;
        buf.copy_from_slice(&self.input[word * dim..(word + 1) * dim]);
        for &r in &self.word_ngrams[word] {
            sgns::axpy(1.0, &self.ngram_table[r * dim..(r + 1) * dim], buf);
        }
    }

    /// Moves the composed input of `word` by exactly `delta`, spreading the
    /// step evenly over the whole-token vector and its n-gram rows.
    fn apply_input_delta(&mut self, word: usize, delta: &[f64]) {
        let dim = self.config.dim;
        let share = 1.0 / (1 + self.word_ngrams[word].len()) as f64;
        sgns::axpy(share, delta, &mut self.input[word * dim..(word + 1) * dim]);
        for &r in &self.word_ngrams[word] {
            sgns::axpy(share, delta, &mut self.ngram_table[r * dim..(r + 1) * dim]);
        }
    }
}

pub fn train_term_vectors(
    corpus: &[Document],
    config: &TermVectorConfig,
    seed: u64,
) -> Result<TermVectorModel> {
    config.validate()?;
    let vocab = Vocabulary::build(corpus, config.min_count);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let dim = config.dim;
    let mut rng = seed::rng(seed);
    let input = init_uniform(&mut rng, vocab.len() * dim, dim);
    let output = OutputTable::zeros(vocab.len(), dim);

    let mut ngram_rows: HashMap<u32, usize> = HashMap::new();
    let mut word_ngrams = vec![Vec::new(); vocab.len()];
    if config.mode == TermVectorMode::SubwordSkipGram {
        for (w, rows) in word_ngrams.iter_mut().enumerate() {
            for b in config.subword.buckets_of(vocab.token(w)) {
                let next = ngram_rows.len();
                rows.push(*ngram_rows.entry(b).or_insert(next));
            }
        }
    }
    let ngram_table = init_uniform(&mut rng, ngram_rows.len() * dim, dim);

    let mut model = TermVectorModel {
        config: *config,
        vocab,
        input,
        output,
        ngram_rows,
        ngram_table,
        word_ngrams,
        epoch_losses: Vec::with_capacity(config.epochs),
    };

    let encoded: Vec<Vec<usize>> = corpus.iter().map(|d| model.vocab.encode(d)).collect();
    let tokens_per_epoch: u64 = encoded.iter().map(|d| d.len() as u64).sum();
    let total_steps = tokens_per_epoch * config.epochs as u64;
    let sampler = NegativeSampler::new(&model.vocab);

    let mut step = 0u64;
    let mut buf = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let mut negs = Vec::with_capacity(config.negatives);
    for _ in 0..config.epochs {
        let mut loss_sum = 0.0;
        let mut groups = 0u64;
        for doc in &encoded {
            for (i, &center) in doc.iter().enumerate() {
                let lr = decayed_lr(config.learning_rate, step, total_steps);
                step += 1;
                let reach = rng.random_range(1..=config.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(doc.len() - 1);
                match config.mode {
                    TermVectorMode::SkipGram | TermVectorMode::SubwordSkipGram => {
                        for j in (lo..=hi).filter(|&j| j != i) {
                            let target = doc[j];
                            sampler.fill(&mut rng, config.negatives, target, &mut negs);
                            model.compose_input(center, &mut buf);
                            delta.fill(0.0);
                            loss_sum += sgns::sgd_step(
                                &buf,
                                &mut model.output,
                                target,
                                &negs,
                                lr,
                                &mut delta,
                                false,
                            );
                            groups += 1;
                            model.apply_input_delta(center, &delta);
                        }
                    }
                    TermVectorMode::Cbow => {
                        let context: Vec<usize> =
                            (lo..=hi).filter(|&j| j != i).map(|j| doc[j]).collect();
                        if context.is_empty() {
                            continue;
                        }
                        buf.fill(0.0);
                        let scale = 1.0 / context.len() as f64;
                        for &c in &context {
                            sgns::axpy(scale, &model.input[c * dim..(c + 1) * dim], &mut buf);
                        }
                        sampler.fill(&mut rng, config.negatives, center, &mut negs);
                        delta.fill(0.0);
                        loss_sum += sgns::sgd_step(
                            &buf,
                            &mut model.output,
                            center,
                            &negs,
                            lr,
                            &mut delta,
                            false,
                        );
                        groups += 1;
                        for &c in &context {
                            sgns::axpy(scale, &delta, &mut model.input[c * dim..(c + 1) * dim]);
                        }
                    }
                }
            }
        }
        model
            .epoch_losses
            .push(if groups > 0 { loss_sum / groups as f64 } else { 0.0 });
    }
    Ok(model)
}

/// Stacks the vectors of a document's representable tokens as columns,
/// in document order.
pub fn lookup_term_matrix(model: &TermVectorModel, document: &[String]) -> Result<TermMatrix> {
    let columns: Vec<Vec<f64>> = document
        .iter()
        .filter_map(|t| model.token_vector(t))
        .collect();
    if columns.is_empty() {
        return Err(Error::NoRepresentableTokens);
    }
    TermMatrix::from_columns(&columns)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = sgns::dot(a, a).sqrt();
    let nb = sgns::dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        sgns::dot(a, b) / (na * nb)
    }
}
