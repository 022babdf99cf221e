//! Experiment-matrix configuration, read from and written to JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::{default_profiles, find_profile, load_profiles, PowerProfile};
use crate::classifiers::ClassifierFamily;
use crate::corpus::DatasetKind;
use crate::error::{Error, Result};
use crate::features::{FeatureSettings, Representation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic { vocab_per_class: usize, noise_rate: f64 },
    /// `text,stars` reviews (sampled down to `size`) or a ready `Text,Type` dataset.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    pub size: usize,
    pub seed: u64,
    pub source: DataSource,
    /// Per-token vector archive for the BERT representations. Synthetic
    /// sources without one get hashed stand-in vectors.
    #[serde(default)]
    pub external_vectors: Option<PathBuf>,
}

impl DatasetConfig {
    pub fn synthetic(kind: DatasetKind, size: usize, seed: u64) -> Self {
        DatasetConfig {
            kind,
            size,
            seed,
            source: DataSource::Synthetic {
                vocab_per_class: 20,
                noise_rate: 0.0,
            },
            external_vectors: None,
        }
    }

    /// Stable name used for seeding and reporting.
    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.kind, self.size, self.seed)
    }
}

fn default_folds() -> usize {
    5
}

fn default_repeats() -> usize {
    5
}

fn default_true() -> bool {
    true
}

fn default_profile() -> String {
    "CPU".to_owned()
}

fn default_external_dim() -> usize {
    384
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub datasets: Vec<DatasetConfig>,
    pub representations: Vec<Representation>,
    pub classifiers: Vec<ClassifierFamily>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_profile")]
    pub profile: String,
    /// Extra power profiles; they take precedence over the built-in ones.
    #[serde(default)]
    pub profiles_path: Option<PathBuf>,
    /// Fit embeddings, reducers and TF-IDF on the full dataset before CV.
    #[serde(default)]
    pub fit_on_full_dataset: bool,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default)]
    pub master_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub features: FeatureSettings,
    /// Width of the hashed stand-in vectors for synthetic sources.
    #[serde(default = "default_external_dim")]
    pub synthetic_vector_dim: usize,
    /// When set, every timed interval lasts exactly this many seconds, which
    /// makes `results.csv` reproducible byte for byte.
    #[serde(default)]
    pub fixed_step_clock: Option<f64>,
}

impl RunConfig {
    /// A config running every representation and classifier.
    pub fn full_matrix(datasets: Vec<DatasetConfig>, output_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            datasets,
            representations: Representation::ALL.to_vec(),
            classifiers: ClassifierFamily::ALL.to_vec(),
            folds: default_folds(),
            repeats: default_repeats(),
            profile: default_profile(),
            profiles_path: None,
            fit_on_full_dataset: false,
            stratified: true,
            master_seed: 0,
            output_dir: output_dir.into(),
            features: FeatureSettings::default(),
            synthetic_vector_dim: default_external_dim(),
            fixed_step_clock: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    /// Built-in profiles overlaid with any loaded from `profiles_path`.
    pub fn profiles(&self) -> Result<Vec<PowerProfile>> {
        let mut profiles = match &self.profiles_path {
            Some(p) => load_profiles(p)?,
            None => Vec::new(),
        };
        for d in default_profiles() {
            if find_profile(&profiles, &d.name).is_none() {
                profiles.push(d);
            }
        }
        Ok(profiles)
    }

    pub fn resolve_profile(&self) -> Result<PowerProfile> {
        let profiles = self.profiles()?;
        find_profile(&profiles, &self.profile)
            .cloned()
            .ok_or_else(|| Error::Config(format!("unknown power profile {:?}", self.profile)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets configured".into()));
        }
        if self.representations.is_empty() {
            return Err(Error::Config("no representations configured".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("no classifiers configured".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if let Some(step) = self.fixed_step_clock {
            if !(step >= 0.0 && step.is_finite()) {
                return Err(Error::Config("fixed_step_clock must be a non-negative number".into()));
            }
        }
        for d in &self.datasets {
            if let DataSource::Synthetic { vocab_per_class, noise_rate } = d.source {
                if vocab_per_class == 0 || !(0.0..1.0).contains(&noise_rate) {
                    return Err(Error::Config(format!(
                        "{}: need vocab_per_class >= 1 and 0 <= noise_rate < 1",
                        d.label()
                    )));
                }
            }
        }
        self.resolve_profile()?;
        Ok(())
    }
}
