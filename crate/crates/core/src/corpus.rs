//! Review ingestion, cleaning and balanced dataset construction.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Mixture rule used for the MixedBinary classes; recorded in run metadata.
pub const MIXED_BINARY_MIXTURE: &str = "uniform: equal split between the two star levels of each class";

pub type Document = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReview {
    pub text: String,
    pub stars: u8,
}

impl RawReview {
    pub fn new(text: impl Into<String>, stars: u8) -> Result<Self> {
        if !(1..=5).contains(&stars) {
            return Err(Error::InvalidDataset(format!("star rating {stars} outside 1..=5")));
        }
        Ok(RawReview {
            text: text.into(),
            stars,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetKind {
    RadicalBinary,
    MixedBinary,
    MultiClass,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 3] = [
        DatasetKind::RadicalBinary,
        DatasetKind::MixedBinary,
        DatasetKind::MultiClass,
    ];

    pub fn num_classes(self) -> usize {
        match self {
            DatasetKind::RadicalBinary | DatasetKind::MixedBinary => 2,
            DatasetKind::MultiClass => 5,
        }
    }

    /// Class labels in sorted order.
    pub fn class_labels(self) -> Vec<String> {
        match self {
            DatasetKind::RadicalBinary | DatasetKind::MixedBinary => {
                vec!["Bad".to_owned(), "Good".to_owned()]
            }
            DatasetKind::MultiClass => (1..=5).map(|s| s.to_string()).collect(),
        }
    }

    /// Star levels feeding each class label, most extreme first.
    fn star_sources(self) -> Vec<(String, Vec<u8>)> {
        match self {
            DatasetKind::RadicalBinary => vec![("Bad".into(), vec![1]), ("Good".into(), vec![5])],
            DatasetKind::MixedBinary => {
                vec![("Bad".into(), vec![1, 2]), ("Good".into(), vec![5, 4])]
            }
            DatasetKind::MultiClass => (1..=5u8).map(|s| (s.to_string(), vec![s])).collect(),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::RadicalBinary => "RadicalBinary",
            DatasetKind::MixedBinary => "MixedBinary",
            DatasetKind::MultiClass => "MultiClass",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "radicalbinary" => Ok(DatasetKind::RadicalBinary),
            "mixedbinary" => Ok(DatasetKind::MixedBinary),
            "multiclass" => Ok(DatasetKind::MultiClass),
            _ => Err(Error::Config(format!("unknown dataset kind {s:?}"))),
        }
    }
}

/// A dataset kind plus its total sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub size: usize,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, size: usize) -> Result<Self> {
        let k = kind.num_classes();
        if size == 0 || size % k != 0 {
            return Err(Error::Config(format!(
                "{kind} size {size} must be a positive multiple of {k}"
            )));
        }
        Ok(DatasetSpec { kind, size })
    }

    pub fn per_class(&self) -> usize {
        self.size / self.kind.num_classes()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    /// Row identifiers used to align externally produced vectors.
    pub ids: Vec<String>,
    pub documents: Vec<Document>,
    pub labels: Vec<String>,
    /// Distinct labels in sorted order.
    pub class_set: Vec<String>,
    pub seed: u64,
}

impl LabeledDataset {
    /// Builds a dataset with row-index ids, checking the structural invariants.
    pub fn new(documents: Vec<Document>, labels: Vec<String>, seed: u64) -> Result<Self> {
        if documents.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} documents but {} labels",
                documents.len(),
                labels.len()
            )));
        }
        if let Some(i) = documents.iter().position(|d| d.is_empty()) {
            return Err(Error::InvalidDataset(format!("document {i} is empty")));
        }
        let mut class_set: Vec<String> = labels
            .iter()
            .cloned()
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        class_set.sort();
        let ids = (0..documents.len()).map(|i| i.to_string()).collect();
        Ok(LabeledDataset {
            ids,
            documents,
            labels,
            class_set,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts: BTreeMap<&str, usize> =
            self.class_set.iter().map(|c| (c.as_str(), 0)).collect();
        for l in &self.labels {
            *counts.entry(l.as_str()).or_default() += 1;
        }
        counts
    }

    pub fn is_balanced(&self) -> bool {
        let counts = self.class_counts();
        let mut it = counts.values();
        match it.next() {
            Some(first) => it.all(|c| c == first),
            None => true,
        }
    }

    /// Label of every row as an index into `class_set`.
    pub fn label_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .map(|l| self.class_set.binary_search(l).expect("label in class_set"))
            .collect()
    }

    /// Rows selected by `indices`, keeping ids and the full class set.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            class_set: self.class_set.clone(),
            seed: self.seed,
        }
    }

    /// Writes the dataset as `Text,Type` CSV with space-joined tokens.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["Text", "Type"])?;
        for (doc, label) in self.documents.iter().zip(&self.labels) {
            w.write_record([doc.join(" ").as_str(), label.as_str()])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Lowercases, splits on whitespace and ASCII punctuation, and drops every
/// token that still contains a character outside `a-z0-9`.
pub fn clean_text(raw: &str) -> Document {
    let spaced: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii() && !c.is_ascii_alphanumeric() {
                ' '
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect();
    spaced
        .split_whitespace()
        .filter(|tok| tok.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()))
        .map(str::to_owned)
        .collect()
}

/// Samples a balanced dataset of the requested kind without replacement.
pub fn build_dataset(reviews: &[RawReview], spec: DatasetSpec, seed: u64) -> Result<LabeledDataset> {
    let spec = DatasetSpec::new(spec.kind, spec.size)?;
    let mut pools: BTreeMap<u8, Vec<Document>> = BTreeMap::new();
    for review in reviews {
        let doc = clean_text(&review.text);
        if !doc.is_empty() {
            pools.entry(review.stars).or_default().push(doc);
        }
    }

    let mut rng = seed::rng(seed);
    let per_class = spec.per_class();
    let mut rows: Vec<(Document, String)> = Vec::with_capacity(spec.size);
    for (label, stars) in spec.kind.star_sources() {
        let n_sources = stars.len();
        for (j, star) in stars.iter().enumerate() {
            // the most extreme star level takes the remainder
            let needed = per_class / n_sources + usize::from(j < per_class % n_sources);
            let pool = pools.get(star).map(Vec::as_slice).unwrap_or(&[]);
            if pool.len() < needed {
                return Err(Error::InsufficientData {
                    class: format!("{label} ({star}-star)"),
                    needed,
                    available: pool.len(),
                });
            }
            for i in rand::seq::index::sample(&mut rng, pool.len(), needed) {
                rows.push((pool[i].clone(), label.clone()));
            }
        }
    }
    rows.shuffle(&mut rng);
    let (documents, labels) = rows.into_iter().unzip();
    LabeledDataset::new(documents, labels, seed)
}

/// Settings for a synthetic corpus with disjoint per-class signature vocabularies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dataset: DatasetSpec,
    pub vocab_per_class: usize,
    pub noise_rate: f64,
    pub min_doc_len: usize,
    pub max_doc_len: usize,
}

impl SyntheticSpec {
    pub fn new(dataset: DatasetSpec, vocab_per_class: usize, noise_rate: f64) -> Self {
        SyntheticSpec {
            dataset,
            vocab_per_class,
            noise_rate,
            min_doc_len: 6,
            max_doc_len: 14,
        }
    }
}

pub fn signature_token(class_index: usize, word: usize) -> String {
    format!("c{class_index}w{word}")
}

pub fn noise_token(word: usize) -> String {
    format!("noise{word}")
}

/// Generates a balanced synthetic corpus. Each token is drawn from the shared
/// noise vocabulary with probability `noise_rate`, otherwise from the class's
/// own signature vocabulary.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<LabeledDataset> {
    let dataset = DatasetSpec::new(spec.dataset.kind, spec.dataset.size)?;
    if spec.vocab_per_class == 0 {
        return Err(Error::Config("vocab_per_class must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&spec.noise_rate) {
        return Err(Error::Config(format!(
            "noise_rate {} outside [0, 1)",
            spec.noise_rate
        )));
    }
    if spec.min_doc_len == 0 || spec.min_doc_len > spec.max_doc_len {
        return Err(Error::Config("document length range is empty".into()));
    }

    let mut rng = seed::rng(seed);
    let labels = dataset.kind.class_labels();
    let mut rows: Vec<(Document, String)> = Vec::with_capacity(dataset.size);
    for (c, label) in labels.iter().enumerate() {
        for _ in 0..dataset.per_class() {
            let len = rng.random_range(spec.min_doc_len..=spec.max_doc_len);
            let doc = (0..len)
                .map(|_| {
                    if spec.noise_rate > 0.0 && rng.random::<f64>() < spec.noise_rate {
                        noise_token(rng.random_range(0..spec.vocab_per_class))
                    } else {
                        signature_token(c, rng.random_range(0..spec.vocab_per_class))
                    }
                })
                .collect();
            rows.push((doc, label.clone()));
        }
    }
    rows.shuffle(&mut rng);
    let (documents, labels) = rows.into_iter().unzip();
    LabeledDataset::new(documents, labels, seed)
}

#[derive(Debug, Deserialize)]
struct RawRow {
    text: String,
    stars: String,
}

#[derive(Debug, Deserialize)]
struct LabeledRow {
    #[serde(rename = "Text")]
    text: String,
    #[serde(rename = "Type")]
    label: String,
}

/// Reads `text,stars` CSV rows.
pub fn read_raw_reviews<R: std::io::Read>(reader: R) -> Result<Vec<RawReview>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RawRow>().enumerate() {
        let row = row?;
        let stars: u8 = row
            .stars
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad star rating {:?}", i + 1, row.stars)))?;
        out.push(RawReview::new(row.text, stars)?);
    }
    Ok(out)
}

/// Reads a `Text,Type` CSV. Text is re-cleaned; rows cleaning to nothing are
/// rejected because every downstream combiner needs at least one token.
pub fn read_labeled<R: std::io::Read>(reader: R, seed: u64) -> Result<LabeledDataset> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut documents = Vec::new();
    let mut labels = Vec::new();
    for row in rdr.deserialize::<LabeledRow>() {
        let row = row?;
        documents.push(clean_text(&row.text));
        labels.push(row.label.trim().to_owned());
    }
    LabeledDataset::new(documents, labels, seed)
}

/// What a CSV file on disk contains, decided by its header.
pub enum CsvInput {
    Raw(Vec<RawReview>),
    Labeled(LabeledDataset),
}

pub fn load_csv(path: &Path, seed: u64) -> Result<CsvInput> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let header = {
        let mut rdr = csv::Reader::from_reader(bytes.as_slice());
        rdr.headers()?.clone()
    };
    let cols: Vec<&str> = header.iter().collect();
    match cols.as_slice() {
        ["Text", "Type"] => Ok(CsvInput::Labeled(read_labeled(bytes.as_slice(), seed)?)),
        ["text", "stars"] => Ok(CsvInput::Raw(read_raw_reviews(bytes.as_slice())?)),
        _ => Err(Error::Parse(format!(
            "{}: expected header `Text,Type` or `text,stars`, found {:?}",
            path.display(),
            cols
        ))),
    }
}
