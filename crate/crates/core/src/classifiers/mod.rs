//! The seven classifier families behind one train/predict contract.
//! Labels are mapped to indices of the sorted class set; every tie resolves
//! to the smallest index, i.e. the lexicographically smallest label.

pub mod boosting;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod sgd;
pub mod svm;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use boosting::{BoostingModel, BoostingParams};
pub use forest::{ForestModel, ForestParams};
pub use knn::{KnnModel, KnnParams};
pub use logistic::{LogisticModel, LogisticParams};
pub use sgd::{SgdModel, SgdParams};
pub use svm::{SvmModel, SvmParams};
pub use tree::{DecisionTreeModel, DecisionTreeParams, Tree};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierFamily {
    LogisticRegression,
    RandomForest,
    GradientBoosting,
    #[serde(rename = "SGD")]
    SgdLinear,
    DecisionTree,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "KNN")]
    Knn,
}

impl ClassifierFamily {
    pub const ALL: [ClassifierFamily; 7] = [
        ClassifierFamily::LogisticRegression,
        ClassifierFamily::RandomForest,
        ClassifierFamily::GradientBoosting,
        ClassifierFamily::SgdLinear,
        ClassifierFamily::DecisionTree,
        ClassifierFamily::Svm,
        ClassifierFamily::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierFamily::LogisticRegression => "LogisticRegression",
            ClassifierFamily::RandomForest => "RandomForest",
            ClassifierFamily::GradientBoosting => "GradientBoosting",
            ClassifierFamily::SgdLinear => "SGD",
            ClassifierFamily::DecisionTree => "DecisionTree",
            ClassifierFamily::Svm => "SVM",
            ClassifierFamily::Knn => "KNN",
        }
    }
}

impl fmt::Display for ClassifierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        let alias = match key.as_str() {
            "lr" | "logistic" => Some(ClassifierFamily::LogisticRegression),
            "rf" => Some(ClassifierFamily::RandomForest),
            "gb" | "gbm" => Some(ClassifierFamily::GradientBoosting),
            "sgdlinear" => Some(ClassifierFamily::SgdLinear),
            "dt" | "tree" => Some(ClassifierFamily::DecisionTree),
            "svc" => Some(ClassifierFamily::Svm),
            _ => None,
        };
        alias
            .or_else(|| ClassifierFamily::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s)))
            .ok_or_else(|| Error::Config(format!("unknown classifier {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum ClassifierParams {
    LogisticRegression(LogisticParams),
    RandomForest(ForestParams),
    GradientBoosting(BoostingParams),
    #[serde(rename = "SGD")]
    SgdLinear(SgdParams),
    DecisionTree(DecisionTreeParams),
    #[serde(rename = "SVM")]
    Svm(SvmParams),
    #[serde(rename = "KNN")]
    Knn(KnnParams),
}

impl ClassifierParams {
    pub fn defaults(family: ClassifierFamily) -> Self {
        match family {
            ClassifierFamily::LogisticRegression => ClassifierParams::LogisticRegression(Default::default()),
            ClassifierFamily::RandomForest => ClassifierParams::RandomForest(Default::default()),
            ClassifierFamily::GradientBoosting => ClassifierParams::GradientBoosting(Default::default()),
            ClassifierFamily::SgdLinear => ClassifierParams::SgdLinear(Default::default()),
            ClassifierFamily::DecisionTree => ClassifierParams::DecisionTree(Default::default()),
            ClassifierFamily::Svm => ClassifierParams::Svm(Default::default()),
            ClassifierFamily::Knn => ClassifierParams::Knn(Default::default()),
        }
    }

    pub fn family(&self) -> ClassifierFamily {
        match self {
            ClassifierParams::LogisticRegression(_) => ClassifierFamily::LogisticRegression,
            ClassifierParams::RandomForest(_) => ClassifierFamily::RandomForest,
            ClassifierParams::GradientBoosting(_) => ClassifierFamily::GradientBoosting,
            ClassifierParams::SgdLinear(_) => ClassifierFamily::SgdLinear,
            ClassifierParams::DecisionTree(_) => ClassifierFamily::DecisionTree,
            ClassifierParams::Svm(_) => ClassifierFamily::Svm,
            ClassifierParams::Knn(_) => ClassifierFamily::Knn,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidHyperparameter(format!("{}: {msg}", self.family())));
        match self {
            ClassifierParams::LogisticRegression(p) => {
                if !(p.c > 0.0) || p.max_iter == 0 {
                    return bad("C must be > 0 and max_iter >= 1");
                }
            }
            ClassifierParams::RandomForest(p) => {
                if p.n_trees == 0 || p.max_depth == 0 || p.min_samples_leaf == 0 || p.min_samples_split < 2 {
                    return bad("tree counts and depths must be >= 1, min_samples_split >= 2");
                }
            }
            ClassifierParams::GradientBoosting(p) => {
                if p.n_stages == 0 || p.max_depth == 0 || !(p.learning_rate > 0.0) || p.min_samples_leaf == 0 {
                    return bad("stages, depth and learning rate must be positive");
                }
            }
            ClassifierParams::SgdLinear(p) => {
                if !(p.alpha > 0.0) || p.epochs == 0 {
                    return bad("alpha must be > 0 and epochs >= 1");
                }
            }
            ClassifierParams::DecisionTree(p) => {
                if p.max_depth == 0 || p.min_samples_leaf == 0 || p.min_samples_split < 2 {
                    return bad("depth must be >= 1, min_samples_split >= 2");
                }
            }
            ClassifierParams::Svm(p) => {
                if !(p.c > 0.0) || p.max_iter == 0 || p.gamma.is_some_and(|g| !(g > 0.0)) {
                    return bad("C and gamma must be > 0, max_iter >= 1");
                }
            }
            ClassifierParams::Knn(p) => {
                if p.k == 0 {
                    return bad("k must be >= 1");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(flatten)]
    pub params: ClassifierParams,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(family: ClassifierFamily, seed: u64) -> Self {
        ClassifierSpec {
            params: ClassifierParams::defaults(family),
            seed,
        }
    }

    pub fn family(&self) -> ClassifierFamily {
        self.params.family()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model")]
pub enum FittedModel {
    LogisticRegression(LogisticModel),
    RandomForest(ForestModel),
    GradientBoosting(BoostingModel),
    SgdLinear(SgdModel),
    DecisionTree(DecisionTreeModel),
    Svm(SvmModel),
    Knn(KnnModel),
}

/// A fitted classifier with its class set and expected feature width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub class_set: Vec<String>,
    pub width: usize,
    pub model: FittedModel,
}

fn check_finite(x: ArrayView2<f64>) -> Result<()> {
    match x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((row, col), _)) => Err(Error::NonFiniteFeature { row, col }),
        None => Ok(()),
    }
}

/// Fits `spec` on rows of `x` labelled by `labels`.
pub fn train(spec: &ClassifierSpec, x: ArrayView2<f64>, labels: &[String]) -> Result<TrainedModel> {
    spec.params.validate()?;
    if x.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            predictions: x.nrows(),
        });
    }
    check_finite(x)?;
    let mut class_set: Vec<String> = labels.to_vec();
    class_set.sort();
    class_set.dedup();
    if class_set.len() < 2 {
        return Err(Error::DegenerateLabels);
    }
    let y: Vec<usize> = labels
        .iter()
        .map(|l| class_set.binary_search(l).expect("label from class set"))
        .collect();
    let k = class_set.len();
    let model = match &spec.params {
        ClassifierParams::LogisticRegression(p) => FittedModel::LogisticRegression(LogisticModel::fit(x, &y, k, p)),
        ClassifierParams::RandomForest(p) => FittedModel::RandomForest(ForestModel::fit(x, &y, k, p, spec.seed)),
        ClassifierParams::GradientBoosting(p) => FittedModel::GradientBoosting(BoostingModel::fit(x, &y, k, p)),
        ClassifierParams::SgdLinear(p) => FittedModel::SgdLinear(SgdModel::fit(x, &y, k, p, spec.seed)),
        ClassifierParams::DecisionTree(p) => FittedModel::DecisionTree(DecisionTreeModel::fit(x, &y, k, p)),
        ClassifierParams::Svm(p) => FittedModel::Svm(SvmModel::fit(x, &y, k, p)),
        ClassifierParams::Knn(p) => FittedModel::Knn(KnnModel::fit(x, &y, k, p)),
    };
    Ok(TrainedModel {
        spec: *spec,
        class_set,
        width: x.ncols(),
        model,
    })
}

impl TrainedModel {
    pub fn family(&self) -> ClassifierFamily {
        self.spec.family()
    }

    /// False when an iterative optimiser stopped at its iteration cap.
    pub fn converged(&self) -> bool {
        match &self.model {
            FittedModel::LogisticRegression(m) => m.converged(),
            FittedModel::Svm(m) => m.converged(),
            _ => true,
        }
    }

    /// Class indices into `class_set`.
    pub fn predict_indices(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        if x.ncols() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                found: x.ncols(),
            });
        }
        check_finite(x)?;
        Ok(match &self.model {
            FittedModel::LogisticRegression(m) => m.predict(x),
            FittedModel::RandomForest(m) => m.predict(x),
            FittedModel::GradientBoosting(m) => m.predict(x),
            FittedModel::SgdLinear(m) => m.predict(x),
            FittedModel::DecisionTree(m) => m.predict(x),
            FittedModel::Svm(m) => m.predict(x),
            FittedModel::Knn(m) => m.predict(x),
        })
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<String>> {
        Ok(self
            .predict_indices(x)?
            .into_iter()
            .map(|i| self.class_set[i].clone())
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Predicted label for each row of `x`.
pub fn predict(model: &TrainedModel, x: ArrayView2<f64>) -> Result<Vec<String>> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn knn_nearest_point() {
        let x = array![[0.0, 0.0], [1.0, 1.0]];
        let mut spec = ClassifierSpec::new(ClassifierFamily::Knn, 0);
        spec.params = ClassifierParams::Knn(KnnParams { k: 1 });
        let m = train(&spec, x.view(), &labels(&["A", "B"])).unwrap();
        assert_eq!(m.predict(array![[0.1, 0.0]].view()).unwrap(), labels(&["A"]));
    }

    #[test]
    fn knn_vote_tie_goes_to_smallest_label() {
        // neighbours: two "b", two "c", one "a" at the far end -> b and c tie
        let x = array![[1.0], [1.0], [-1.0], [-1.0], [5.0], [9.0]];
        let spec = ClassifierSpec::new(ClassifierFamily::Knn, 0);
        let m = train(&spec, x.view(), &labels(&["c", "c", "b", "b", "a", "a"])).unwrap();
        assert_eq!(m.predict(array![[0.0]].view()).unwrap(), labels(&["b"]));
    }

    #[test]
    fn rejects_single_class_and_bad_width() {
        let x = array![[0.0], [1.0]];
        for f in ClassifierFamily::ALL {
            let spec = ClassifierSpec::new(f, 0);
            assert!(matches!(train(&spec, x.view(), &labels(&["A", "A"])), Err(Error::DegenerateLabels)));
        }
        let m = train(&ClassifierSpec::new(ClassifierFamily::Knn, 0), x.view(), &labels(&["A", "B"])).unwrap();
        assert!(matches!(
            m.predict(array![[0.0, 1.0]].view()),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        let nan = array![[f64::NAN], [1.0]];
        assert!(matches!(
            train(&ClassifierSpec::new(ClassifierFamily::Knn, 0), nan.view(), &labels(&["A", "B"])),
            Err(Error::NonFiniteFeature { row: 0, col: 0 })
        ));
    }

    #[test]
    fn family_names_parse() {
        for f in ClassifierFamily::ALL {
            assert_eq!(f.name().parse::<ClassifierFamily>().unwrap(), f);
            let spec = ClassifierSpec::new(f, 3);
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<ClassifierSpec>(&json).unwrap(), spec);
        }
    }
}
