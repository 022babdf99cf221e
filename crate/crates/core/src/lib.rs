//! Benchmark harness for text representations and classic classifiers:
//! corpus construction, term and document embeddings, PCA-based feature
//! engineering, seven classifier families, cross-validated macro metrics,
//! timing and modelled energy use.

pub mod bench;
pub mod classifiers;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod pca;
pub mod report;
pub mod seed;

pub use error::{Error, Result};

pub use bench::{estimate_energy, Clock, EnergyEstimate, PowerProfile, StepClock, TimingResult, WallClock};
pub use classifiers::{ClassifierFamily, ClassifierParams, ClassifierSpec, TrainedModel};
pub use corpus::{DatasetKind, DatasetSpec, LabeledDataset, SyntheticSpec};
pub use embeddings::ExternalTokenVectors;
pub use eval::{cross_validate, CvOptions, CvScores, MacroMetrics};
pub use features::{Combiner, FeatureMatrix, FeatureSettings, Representation, RepresentationSpec, TermMatrix};
pub use pca::{fit_pca, PcaModel};
pub use report::{run_matrix, DataSource, DatasetConfig, RunConfig, RunRecord, Status};
