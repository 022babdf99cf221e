//! Document representations: the two term-vector combiners, pooled external
//! vectors, paragraph vectors, TF-IDF, and the corpus-level PCA reducers.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledDataset;
use crate::embeddings::{
    lookup_term_matrix, mean_pool, train_doc_vectors, train_term_vectors, DocVectorConfig, DocVectorModel,
    ExternalTokenVectors, TermVectorConfig, TermVectorModel, TfidfModel,
};
use crate::error::{Error, Result};
use crate::pca::{self, fit_pca, PcaModel};

/// `m × n_d` matrix whose columns are a document's term vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TermMatrix {
    values: Array2<f64>,
}

impl TermMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::NoRepresentableTokens);
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFiniteFeature { row, col });
        }
        Ok(TermMatrix { values })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let m = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        let values = Array2::from_shape_fn((m, columns.len()), |(i, j)| columns[j][i]);
        Self::new(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Embedding dimension `m`.
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_terms(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.column(i).to_vec()
    }
}

/// Equal-weight mean of the term vectors.
pub fn combine_average(matrix: &TermMatrix) -> Vec<f64> {
    let n = matrix.n_terms() as f64;
    matrix
        .values
        .rows()
        .into_iter()
        .map(|r| r.sum() / n)
        .collect()
}

/// `A_d · w` with `w` the first principal loading over the document's terms
/// (centred columns).
pub fn combine_first_pc(matrix: &TermMatrix) -> Vec<f64> {
    combine_first_pc_with(matrix, true)
}

pub fn combine_first_pc_with(matrix: &TermMatrix, centered: bool) -> Vec<f64> {
    pca::first_component(matrix, centered).combined
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combiner {
    Average,
    FirstPc,
}

/// `N × width` dense document features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    tag: String,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, tag: impl Into<String>) -> Result<Self> {
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFiniteFeature { row, col });
        }
        Ok(FeatureMatrix {
            values,
            tag: tag.into(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], width: usize, tag: impl Into<String>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: bad.len(),
            });
        }
        let values = Array2::from_shape_fn((rows.len(), width), |(i, j)| rows[i][j]);
        Self::new(values, tag)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values
            .row(i)
            .to_slice()
            .expect("standard layout")
    }

    /// Rows selected by `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(ndarray::Axis(0), indices),
            tag: self.tag.clone(),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.width()).map(|j| format!("f{j}")).collect();
        w.write_record(&header)?;
        for row in self.values.rows() {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// The nine named document representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Representation {
    #[serde(rename = "W2V-Average")]
    W2vAverage,
    #[serde(rename = "W2V-PCA")]
    W2vPca,
    #[serde(rename = "FT-Average")]
    FtAverage,
    #[serde(rename = "FT-PCA")]
    FtPca,
    #[serde(rename = "BERT-Average")]
    BertAverage,
    #[serde(rename = "BERT-PCA")]
    BertPca,
    #[serde(rename = "Doc2Vec")]
    Doc2Vec,
    #[serde(rename = "Doc2Vec-PCA")]
    Doc2VecPca,
    #[serde(rename = "TF-IDF")]
    Tfidf,
}

impl Representation {
    pub const ALL: [Representation; 9] = [
        Representation::W2vAverage,
        Representation::W2vPca,
        Representation::FtAverage,
        Representation::FtPca,
        Representation::BertAverage,
        Representation::BertPca,
        Representation::Doc2Vec,
        Representation::Doc2VecPca,
        Representation::Tfidf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::W2vAverage => "W2V-Average",
            Representation::W2vPca => "W2V-PCA",
            Representation::FtAverage => "FT-Average",
            Representation::FtPca => "FT-PCA",
            Representation::BertAverage => "BERT-Average",
            Representation::BertPca => "BERT-PCA",
            Representation::Doc2Vec => "Doc2Vec",
            Representation::Doc2VecPca => "Doc2Vec-PCA",
            Representation::Tfidf => "TF-IDF",
        }
    }

    /// Reducer rank for the pooled-vector PCA variants.
    pub fn default_rank(self) -> Option<usize> {
        match self {
            Representation::BertPca => Some(50),
            Representation::Doc2VecPca => Some(100),
            _ => None,
        }
    }

    pub fn needs_external_vectors(self) -> bool {
        matches!(self, Representation::BertAverage | Representation::BertPca)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Representation::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown representation {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationSpec {
    pub representation: Representation,
    /// Present exactly for BERT-PCA and Doc2Vec-PCA.
    pub rank: Option<usize>,
}

impl RepresentationSpec {
    pub fn new(representation: Representation) -> Self {
        RepresentationSpec {
            representation,
            rank: representation.default_rank(),
        }
    }

    pub fn with_rank(representation: Representation, rank: usize) -> Result<Self> {
        if representation.default_rank().is_none() {
            return Err(Error::Config(format!("{representation} takes no reducer rank")));
        }
        if rank == 0 {
            return Err(Error::InvalidHyperparameter("reducer rank must be at least 1".into()));
        }
        Ok(RepresentationSpec {
            representation,
            rank: Some(rank),
        })
    }

    pub fn name(&self) -> &'static str {
        self.representation.name()
    }
}

/// Embedding settings shared by every representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSettings {
    pub word2vec: TermVectorConfig,
    pub fasttext: TermVectorConfig,
    pub doc2vec: DocVectorConfig,
    pub tfidf_max_features: Option<usize>,
    /// Centre term columns before extracting the first component.
    pub center_first_pc: bool,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings {
            word2vec: TermVectorConfig::word2vec(),
            fasttext: TermVectorConfig::fasttext(),
            doc2vec: DocVectorConfig::default(),
            tfidf_max_features: None,
            center_first_pc: true,
        }
    }
}

/// A representation fitted on a set of dataset rows, ready to featurise any row.
#[derive(Debug, Clone)]
pub enum FittedRepresentation {
    TermVectors {
        model: TermVectorModel,
        combiner: Combiner,
        centered: bool,
    },
    Pooled {
        pca: Option<PcaModel>,
    },
    DocVectors {
        model: DocVectorModel,
        /// dataset row -> row of the trained vector table
        trained_rows: HashMap<usize, usize>,
        pca: Option<PcaModel>,
    },
    Tfidf {
        model: TfidfModel,
    },
}

/// Features for a list of rows plus bookkeeping.
#[derive(Debug, Clone)]
pub struct Featurized {
    pub features: FeatureMatrix,
    /// Rows with nothing to embed, represented by the zero vector.
    pub zero_vector_rows: usize,
}

/// Fits the models `spec` needs on `fit_rows` of `dataset`.
pub fn fit_representation(
    dataset: &LabeledDataset,
    spec: &RepresentationSpec,
    fit_rows: &[usize],
    settings: &FeatureSettings,
    external: Option<&ExternalTokenVectors>,
    seed: u64,
) -> Result<FittedRepresentation> {
    let docs: Vec<_> = fit_rows.iter().map(|&i| dataset.documents[i].clone()).collect();
    use Representation::*;
    Ok(match spec.representation {
        W2vAverage | W2vPca | FtAverage | FtPca => {
            let config = match spec.representation {
                W2vAverage | W2vPca => &settings.word2vec,
                _ => &settings.fasttext,
            };
            let combiner = match spec.representation {
                W2vAverage | FtAverage => Combiner::Average,
                _ => Combiner::FirstPc,
            };
            FittedRepresentation::TermVectors {
                model: train_term_vectors(&docs, config, seed)?,
                combiner,
                centered: settings.center_first_pc,
            }
        }
        BertAverage => FittedRepresentation::Pooled { pca: None },
        BertPca => {
            let external = require_external(external)?;
            let pooled = pooled_rows(dataset, fit_rows, external)?;
            FittedRepresentation::Pooled {
                pca: Some(fit_pca(pooled.view(), spec_rank(spec)?)?),
            }
        }
        Doc2Vec | Doc2VecPca => {
            let model = train_doc_vectors(&docs, &settings.doc2vec, seed)?;
            let pca = if spec.representation == Doc2VecPca {
                Some(fit_pca(model.vectors().view(), spec_rank(spec)?)?)
            } else {
                None
            };
            FittedRepresentation::DocVectors {
                model,
                trained_rows: fit_rows.iter().enumerate().map(|(k, &i)| (i, k)).collect(),
                pca,
            }
        }
        Tfidf => FittedRepresentation::Tfidf {
            model: TfidfModel::fit(&docs, settings.tfidf_max_features)?,
        },
    })
}

fn spec_rank(spec: &RepresentationSpec) -> Result<usize> {
    spec.rank
        .ok_or_else(|| Error::Config(format!("{} requires a reducer rank", spec.name())))
}

fn require_external(external: Option<&ExternalTokenVectors>) -> Result<&ExternalTokenVectors> {
    external.ok_or_else(|| Error::Config("BERT representations need an external vector archive".into()))
}

fn pooled_rows(dataset: &LabeledDataset, rows: &[usize], external: &ExternalTokenVectors) -> Result<Array2<f64>> {
    let dim = external.dim();
    let mut out = Array2::zeros((rows.len(), dim));
    for (k, &i) in rows.iter().enumerate() {
        let v = mean_pool(external, &dataset.ids[i])?;
        out.row_mut(k).iter_mut().zip(v).for_each(|(o, x)| *o = x);
    }
    Ok(out)
}

impl FittedRepresentation {
    pub fn pca(&self) -> Option<&PcaModel> {
        match self {
            FittedRepresentation::Pooled { pca } | FittedRepresentation::DocVectors { pca, .. } => pca.as_ref(),
            _ => None,
        }
    }

    /// Features for `rows` of `dataset`. Rows the models were fitted on use
    /// their trained document vectors; others are inferred.
    pub fn transform(
        &self,
        dataset: &LabeledDataset,
        rows: &[usize],
        external: Option<&ExternalTokenVectors>,
        tag: &str,
    ) -> Result<Featurized> {
        let mut zero_vector_rows = 0;
        let values = match self {
            FittedRepresentation::TermVectors {
                model,
                combiner,
                centered,
            } => {
                let mut out = Array2::zeros((rows.len(), model.dim()));
                for (k, &i) in rows.iter().enumerate() {
                    let v = match lookup_term_matrix(model, &dataset.documents[i]) {
                        Ok(m) => match combiner {
                            Combiner::Average => combine_average(&m),
                            Combiner::FirstPc => combine_first_pc_with(&m, *centered),
                        },
                        Err(Error::NoRepresentableTokens) => {
                            zero_vector_rows += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    out.row_mut(k).iter_mut().zip(v).for_each(|(o, x)| *o = x);
                }
                out
            }
            FittedRepresentation::Pooled { pca } => {
                let pooled = pooled_rows(dataset, rows, require_external(external)?)?;
                match pca {
                    Some(p) => p.transform(pooled.view())?,
                    None => pooled,
                }
            }
            FittedRepresentation::DocVectors {
                model,
                trained_rows,
                pca,
            } => {
                let mut native = Array2::zeros((rows.len(), model.dim()));
                for (k, &i) in rows.iter().enumerate() {
                    match trained_rows.get(&i) {
                        Some(&t) => native.row_mut(k).assign(&model.vectors().row(t)),
                        None => {
                            let v = model.infer(&dataset.documents[i]);
                            native.row_mut(k).iter_mut().zip(v).for_each(|(o, x)| *o = x);
                        }
                    }
                }
                match pca {
                    Some(p) => p.transform(native.view())?,
                    None => native,
                }
            }
            FittedRepresentation::Tfidf { model } => {
                let docs: Vec<_> = rows.iter().map(|&i| dataset.documents[i].clone()).collect();
                let sparse = model.transform(&docs);
                zero_vector_rows = sparse.rows.iter().filter(|r| r.is_empty()).count();
                sparse.to_dense()
            }
        };
        Ok(Featurized {
            features: FeatureMatrix::new(values, tag)?,
            zero_vector_rows,
        })
    }
}

/// Train and evaluation features for one split.
#[derive(Debug, Clone)]
pub struct SplitFeatures {
    pub train: FeatureMatrix,
    pub eval: FeatureMatrix,
    pub fitted: Arc<FittedRepresentation>,
    pub zero_vector_rows: usize,
}

/// Fits on the training rows (or on every row when `fit_on_full_dataset`)
/// and featurises both splits.
#[allow(clippy::too_many_arguments)]
pub fn build_representation(
    dataset: &LabeledDataset,
    spec: &RepresentationSpec,
    train_rows: &[usize],
    eval_rows: &[usize],
    fit_on_full_dataset: bool,
    settings: &FeatureSettings,
    external: Option<&ExternalTokenVectors>,
    seed: u64,
) -> Result<SplitFeatures> {
    if spec.representation.needs_external_vectors() {
        require_external(external)?;
    }
    let all: Vec<usize>;
    let fit_rows = if fit_on_full_dataset {
        all = (0..dataset.len()).collect();
        &all[..]
    } else {
        train_rows
    };
    let fitted = Arc::new(fit_representation(dataset, spec, fit_rows, settings, external, seed)?);
    split_features(dataset, spec, fitted, train_rows, eval_rows, external)
}

/// Featurises both splits with an already fitted representation.
pub fn split_features(
    dataset: &LabeledDataset,
    spec: &RepresentationSpec,
    fitted: Arc<FittedRepresentation>,
    train_rows: &[usize],
    eval_rows: &[usize],
    external: Option<&ExternalTokenVectors>,
) -> Result<SplitFeatures> {
    let train = fitted.transform(dataset, train_rows, external, spec.name())?;
    let eval = fitted.transform(dataset, eval_rows, external, spec.name())?;
    Ok(SplitFeatures {
        train: train.features,
        eval: eval.features,
        fitted,
        zero_vector_rows: train.zero_vector_rows + eval.zero_vector_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_examples() {
        let m = TermMatrix::from_columns(&[vec![1.0, 3.0], vec![3.0, 1.0]]).unwrap();
        assert_eq!(combine_average(&m), vec![2.0, 2.0]);
        let v = vec![0.5, -1.25, 4.0];
        let one = TermMatrix::from_columns(&[v.clone()]).unwrap();
        assert_eq!(combine_average(&one), v);
        assert_eq!(combine_first_pc(&one), v);
        let copies = TermMatrix::from_columns(&[v.clone(), v.clone(), v.clone()]).unwrap();
        assert_eq!(combine_average(&copies), v);
    }

    #[test]
    fn first_pc_of_two_copies_is_root_two_times_column() {
        let v = vec![0.3, -0.8, 1.2];
        let m = TermMatrix::from_columns(&[v.clone(), v.clone()]).unwrap();
        let out = combine_first_pc(&m);
        for (o, x) in out.iter().zip(&v) {
            assert!((o - 2f64.sqrt() * x).abs() < 1e-12);
        }
    }

    #[test]
    fn term_matrix_rejects_empty_and_ragged() {
        assert!(matches!(TermMatrix::from_columns(&[]), Err(Error::NoRepresentableTokens)));
        assert!(matches!(
            TermMatrix::from_columns(&[vec![1.0], vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn representation_names_round_trip() {
        for r in Representation::ALL {
            assert_eq!(r.name().parse::<Representation>().unwrap(), r);
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(json, format!("\"{}\"", r.name()));
        }
        assert_eq!(RepresentationSpec::new(Representation::BertPca).rank, Some(50));
        assert_eq!(RepresentationSpec::new(Representation::Doc2VecPca).rank, Some(100));
        assert_eq!(RepresentationSpec::new(Representation::W2vPca).rank, None);
        assert!(RepresentationSpec::with_rank(Representation::Tfidf, 3).is_err());
    }
}
