//! Macro-averaged precision/recall/F1 and (stratified) k-fold
//! cross-validation.

use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bench::{measure, Clock};
use crate::classifiers::{train, ClassifierSpec};
use crate::corpus::LabeledDataset;
use crate::embeddings::ExternalTokenVectors;
use crate::error::{Error, Result};
use crate::features::{
    build_representation, fit_representation, split_features, FeatureSettings, RepresentationSpec, SplitFeatures,
};
use crate::seed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub class_set: Vec<String>,
    pub per_class: Vec<ClassCounts>,
    pub n_samples: usize,
}

/// One-vs-rest counts for every class of `class_set`.
pub fn confusion<S: AsRef<str>>(labels: &[S], predictions: &[S], class_set: &[S]) -> Result<ConfusionCounts> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            predictions: predictions.len(),
        });
    }
    let classes: Vec<&str> = class_set.iter().map(AsRef::as_ref).collect();
    let index = |s: &str| {
        classes
            .iter()
            .position(|c| *c == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_owned()))
    };
    let mut per_class = vec![ClassCounts::default(); classes.len()];
    for (l, p) in labels.iter().zip(predictions) {
        let (li, pi) = (index(l.as_ref())?, index(p.as_ref())?);
        if li == pi {
            per_class[li].tp += 1;
        } else {
            per_class[pi].fp += 1;
            per_class[li].fn_ += 1;
        }
    }
    let n = labels.len();
    for c in &mut per_class {
        c.tn = n - c.tp - c.fp - c.fn_;
    }
    Ok(ConfusionCounts {
        class_set: classes.iter().map(|c| c.to_string()).collect(),
        per_class,
        n_samples: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Number of 0/0 ratios that were taken as 0.
    pub zero_division: usize,
}

/// Per-class precision, recall and F1 (harmonic mean), then their
/// unweighted means. Any 0/0 counts as 0 and is tallied.
pub fn macro_metrics(counts: &ConfusionCounts) -> MacroMetrics {
    let mut zero_division = 0;
    let mut ratio = |num: f64, den: f64| {
        if den == 0.0 {
            zero_division += 1;
            0.0
        } else {
            num / den
        }
    };
    let per_class: Vec<ClassMetrics> = counts
        .per_class
        .iter()
        .map(|c| {
            let precision = ratio(c.tp as f64, (c.tp + c.fp) as f64);
            let recall = ratio(c.tp as f64, (c.tp + c.fn_) as f64);
            let f1 = ratio(2.0 * precision * recall, precision + recall);
            ClassMetrics { precision, recall, f1 }
        })
        .collect();
    let k = per_class.len().max(1) as f64;
    MacroMetrics {
        precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
        per_class,
        zero_division,
    }
}

/// Confusion then macro metrics.
pub fn score<S: AsRef<str>>(labels: &[S], predictions: &[S], class_set: &[S]) -> Result<MacroMetrics> {
    Ok(macro_metrics(&confusion(labels, predictions, class_set)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits `0..labels.len()` into `k` folds. Stratified: each class's rows
/// are shuffled, classes are laid end to end in sorted label order, and row
/// `j` of that sequence goes to fold `j mod k`. Otherwise all rows are
/// shuffled together and dealt the same way.
pub fn kfold_indices<S: AsRef<str>>(labels: &[S], k: usize, seed: u64, stratified: bool) -> Result<Vec<Fold>> {
    let n = labels.len();
    if k < 2 || n < k {
        return Err(Error::TooFewSamples { n, k });
    }
    let mut rng = seed::rng(seed);
    let sequence: Vec<usize> = if stratified {
        let mut classes: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
        classes.sort_unstable();
        classes.dedup();
        let mut seq = Vec::with_capacity(n);
        for c in classes {
            let mut rows: Vec<usize> = (0..n).filter(|&i| labels[i].as_ref() == c).collect();
            rows.shuffle(&mut rng);
            seq.extend(rows);
        }
        seq
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        rows
    };
    let mut fold_of = vec![0usize; n];
    for (j, &row) in sequence.iter().enumerate() {
        fold_of[row] = j % k;
    }
    Ok((0..k)
        .map(|f| Fold {
            train: (0..n).filter(|&i| fold_of[i] != f).collect(),
            test: (0..n).filter(|&i| fold_of[i] == f).collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub metrics: MacroMetrics,
    pub fit_seconds: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub folds: Vec<FoldScore>,
}

impl CvScores {
    pub fn from_folds(folds: Vec<FoldScore>) -> Self {
        let k = folds.len().max(1) as f64;
        CvScores {
            precision: folds.iter().map(|f| f.metrics.precision).sum::<f64>() / k,
            recall: folds.iter().map(|f| f.metrics.recall).sum::<f64>() / k,
            f1: folds.iter().map(|f| f.metrics.f1).sum::<f64>() / k,
            folds,
        }
    }

    pub fn mean_fit_seconds(&self) -> f64 {
        self.folds.iter().map(|f| f.fit_seconds).sum::<f64>() / self.folds.len().max(1) as f64
    }

    pub fn converged(&self) -> bool {
        self.folds.iter().all(|f| f.converged)
    }

    pub fn zero_division(&self) -> usize {
        self.folds.iter().map(|f| f.metrics.zero_division).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub k: usize,
    pub stratified: bool,
    /// Fit embeddings, reducers and TF-IDF on every row before splitting.
    pub fit_on_full_dataset: bool,
    pub settings: FeatureSettings,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 5,
            stratified: true,
            fit_on_full_dataset: false,
            settings: FeatureSettings::default(),
        }
    }
}

/// Features for every fold. Each fold's representation is fitted on its
/// training rows, or once on every row when `fit_on_full_dataset` is set.
pub fn fold_features(
    dataset: &LabeledDataset,
    spec: &RepresentationSpec,
    folds: &[Fold],
    options: &CvOptions,
    external: Option<&ExternalTokenVectors>,
    seed: u64,
) -> Result<Vec<SplitFeatures>> {
    let shared = if options.fit_on_full_dataset {
        let all: Vec<usize> = (0..dataset.len()).collect();
        Some(Arc::new(fit_representation(
            dataset,
            spec,
            &all,
            &options.settings,
            external,
            seed,
        )?))
    } else {
        None
    };
    folds
        .iter()
        .enumerate()
        .map(|(f, fold)| {
            let built = match &shared {
                Some(fitted) => split_features(dataset, spec, fitted.clone(), &fold.train, &fold.test, external),
                None => build_representation(
                    dataset,
                    spec,
                    &fold.train,
                    &fold.test,
                    false,
                    &options.settings,
                    external,
                    seed,
                ),
            };
            built.map_err(|e| Error::Fold {
                fold: f,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Trains `spec` on each fold's training features and scores its test rows.
/// Only the training call is timed.
pub fn evaluate_classifier(
    dataset: &LabeledDataset,
    folds: &[Fold],
    features: &[SplitFeatures],
    spec: &ClassifierSpec,
    clock: &dyn Clock,
) -> Result<CvScores> {
    let mut scores = Vec::with_capacity(folds.len());
    for (f, (fold, feats)) in folds.iter().zip(features).enumerate() {
        let wrap = |e: Error| Error::Fold {
            fold: f,
            message: e.to_string(),
        };
        let train_labels: Vec<String> = fold.train.iter().map(|&i| dataset.labels[i].clone()).collect();
        let test_labels: Vec<String> = fold.test.iter().map(|&i| dataset.labels[i].clone()).collect();
        let (model, fit_seconds) = measure(clock, || train(spec, feats.train.values().view(), &train_labels));
        let model = model.map_err(wrap)?;
        let predictions = model.predict(feats.eval.values().view()).map_err(wrap)?;
        let metrics = score(&test_labels, &predictions, &dataset.class_set).map_err(wrap)?;
        scores.push(FoldScore {
            metrics,
            fit_seconds,
            converged: model.converged(),
        });
    }
    Ok(CvScores::from_folds(scores))
}

/// Full k-fold evaluation of one representation × classifier cell.
pub fn cross_validate(
    dataset: &LabeledDataset,
    representation: &RepresentationSpec,
    classifier: &ClassifierSpec,
    options: &CvOptions,
    external: Option<&ExternalTokenVectors>,
    seed: u64,
    clock: &dyn Clock,
) -> Result<CvScores> {
    let folds = kfold_indices(&dataset.labels, options.k, seed, options.stratified)?;
    let features = fold_features(dataset, representation, &folds, options, external, seed)?;
    evaluate_classifier(dataset, &folds, &features, classifier, clock)
}
