//! Runs the dataset × representation × classifier matrix and writes
//! `results.csv`, `summary.json` and `time_vs_f1.csv`.

pub mod config;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{DataSource, DatasetConfig, RunConfig};

use crate::bench::{estimate_energy, measure, Clock, PowerProfile, StepClock, WallClock};
use crate::classifiers::ClassifierSpec;
use crate::corpus::{
    build_dataset, generate_synthetic, load_csv, CsvInput, DatasetSpec, LabeledDataset, SyntheticSpec,
    MIXED_BINARY_MIXTURE,
};
use crate::embeddings::external::synthetic_token_vectors;
use crate::embeddings::{load_external_vectors, ExternalTokenVectors};
use crate::error::{Error, Result};
use crate::eval::{evaluate_classifier, fold_features, kfold_indices, CvOptions, CvScores};
use crate::features::RepresentationSpec;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
        })
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Status::Ok),
            "failed" => Ok(Status::Failed),
            _ => Err(Error::Parse(format!("unknown status {s:?}"))),
        }
    }
}

/// One cell of the matrix. Metric and energy fields are empty for failed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset_kind: String,
    pub dataset_size: usize,
    pub dataset_seed: u64,
    pub representation: String,
    pub classifier: String,
    pub feature_extraction_time_s: f64,
    pub fit_time_s: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub energy_kwh: Option<f64>,
    pub emissions_kg: Option<f64>,
    pub status: Status,
    pub error: Option<String>,
}

pub const RESULTS_HEADER: [&str; 14] = [
    "dataset_kind",
    "dataset_size",
    "dataset_seed",
    "representation",
    "classifier",
    "feature_extraction_time_s",
    "fit_time_s",
    "precision",
    "recall",
    "f1",
    "energy_kwh",
    "emissions_kg",
    "status",
    "error",
];

fn fixed6(v: f64) -> String {
    format!("{v:.6}")
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

impl RunRecord {
    fn csv_fields(&self) -> [String; 14] {
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_default();
        [
            self.dataset_kind.clone(),
            self.dataset_size.to_string(),
            self.dataset_seed.to_string(),
            self.representation.clone(),
            self.classifier.clone(),
            fixed6(self.feature_extraction_time_s),
            fixed6(self.fit_time_s),
            opt(self.precision, fixed6),
            opt(self.recall, fixed6),
            opt(self.f1, fixed6),
            opt(self.energy_kwh, sci),
            opt(self.emissions_kg, sci),
            self.status.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }

    fn from_csv_fields(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != RESULTS_HEADER.len() {
            return Err(Error::Parse(format!("expected {} fields, found {}", RESULTS_HEADER.len(), r.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {s:?}")));
        Ok(RunRecord {
            dataset_kind: r[0].to_owned(),
            dataset_size: int(&r[1])? as usize,
            dataset_seed: int(&r[2])?,
            representation: r[3].to_owned(),
            classifier: r[4].to_owned(),
            feature_extraction_time_s: parse_f64(&r[5])?,
            fit_time_s: parse_f64(&r[6])?,
            precision: parse_opt(&r[7])?,
            recall: parse_opt(&r[8])?,
            f1: parse_opt(&r[9])?,
            energy_kwh: parse_opt(&r[10])?,
            emissions_kg: parse_opt(&r[11])?,
            status: r[12].parse()?,
            error: if r[13].is_empty() { None } else { Some(r[13].to_owned()) },
        })
    }

    /// The record as it reads back from `results.csv`.
    pub fn rounded(&self) -> RunRecord {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(self.csv_fields()).expect("in-memory write");
        let bytes = w.into_inner().expect("in-memory flush");
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes.as_slice());
        let rec = rdr.records().next().expect("one row").expect("valid row");
        RunRecord::from_csv_fields(&rec).expect("own output parses")
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

pub fn write_results_csv<W: Write>(records: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.write_record(r.csv_fields())?;
    }
    w.flush().map_err(|e| Error::io("results.csv", e))?;
    Ok(())
}

pub fn read_results_csv<R: std::io::Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != RESULTS_HEADER {
        return Err(Error::Parse(format!("unexpected results header {header:?}")));
    }
    rdr.records()
        .map(|r| RunRecord::from_csv_fields(&r?))
        .collect()
}

/// Mean F1 per representation and per classifier over successful cells,
/// computed from the values as written to `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub per_representation: BTreeMap<String, f64>,
    pub per_classifier: BTreeMap<String, f64>,
    pub cells_ok: usize,
    pub cells_failed: usize,
}

pub fn summarize(records: &[RunRecord]) -> Summary {
    fn mean_by(records: &[RunRecord], key: impl Fn(&RunRecord) -> &str) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in records {
            if let (Status::Ok, Some(f1)) = (r.status, r.f1) {
                let e = acc.entry(key(r).to_owned()).or_default();
                e.0 += f1;
                e.1 += 1;
            }
        }
        acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }
    let rounded: Vec<RunRecord> = records.iter().map(RunRecord::rounded).collect();
    Summary {
        per_representation: mean_by(&rounded, |r| &r.representation),
        per_classifier: mean_by(&rounded, |r| &r.classifier),
        cells_ok: rounded.iter().filter(|r| r.is_ok()).count(),
        cells_failed: rounded.iter().filter(|r| !r.is_ok()).count(),
    }
}

/// Writes the three report files into `out_dir` and returns their paths.
pub fn write_report(records: &[RunRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Config("no records to report".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let results = out_dir.join("results.csv");
    let file = std::fs::File::create(&results).map_err(|e| Error::io(&results, e))?;
    write_results_csv(records, std::io::BufWriter::new(file))?;

    let summary_path = out_dir.join("summary.json");
    let summary = serde_json::to_string_pretty(&summarize(records))? + "\n";
    std::fs::write(&summary_path, summary).map_err(|e| Error::io(&summary_path, e))?;

    let scatter = out_dir.join("time_vs_f1.csv");
    let file = std::fs::File::create(&scatter).map_err(|e| Error::io(&scatter, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(["cell_index", "representation", "classifier", "fit_time_s", "f1"])?;
    for (i, r) in records.iter().enumerate() {
        if let (Status::Ok, Some(f1)) = (r.status, r.f1) {
            w.write_record([
                i.to_string(),
                r.representation.clone(),
                r.classifier.clone(),
                fixed6(r.fit_time_s),
                fixed6(f1),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&scatter, e))?;
    Ok(vec![results, summary_path, scatter])
}

/// Per-cell details that do not belong in `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostics {
    pub dataset: String,
    pub representation: String,
    pub classifier: String,
    /// Documents featurised as the zero vector because nothing in them was
    /// representable (summed over folds, train and test rows).
    pub zero_vector_rows: usize,
    /// 0/0 precision/recall/F1 ratios taken as 0 (summed over folds).
    pub zero_division: usize,
    /// False when an iterative optimiser hit its iteration cap in any fold.
    pub converged: bool,
    pub per_fold_f1: Vec<f64>,
}

/// Fixed methodological choices recorded next to every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub paragraph_vector_variant: String,
    pub mixed_binary_mixture: String,
    pub first_pc_weights: String,
    pub fit_scope: String,
    pub power_profile: PowerProfile,
    pub cells: Vec<CellDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    pub records: Vec<RunRecord>,
    pub metadata: RunMetadata,
}

/// Loads or generates the dataset described by `d`.
pub fn load_dataset(d: &DatasetConfig) -> Result<LabeledDataset> {
    match &d.source {
        DataSource::Synthetic {
            vocab_per_class,
            noise_rate,
        } => {
            let spec = SyntheticSpec::new(DatasetSpec::new(d.kind, d.size)?, *vocab_per_class, *noise_rate);
            generate_synthetic(&spec, d.seed)
        }
        DataSource::Csv { path } => match load_csv(path, d.seed)? {
            CsvInput::Raw(reviews) => build_dataset(&reviews, DatasetSpec::new(d.kind, d.size)?, d.seed),
            CsvInput::Labeled(ds) => Ok(ds),
        },
    }
}

/// The dataset's external token vectors: the configured archive (checked
/// for alignment), hashed stand-ins for synthetic sources, or none.
pub fn external_vectors_for(d: &DatasetConfig, dataset: &LabeledDataset, synthetic_dim: usize) -> Result<Option<ExternalTokenVectors>> {
    match (&d.external_vectors, &d.source) {
        (Some(path), _) => {
            let v = load_external_vectors(path)?;
            v.check_alignment(dataset)?;
            Ok(Some(v))
        }
        (None, DataSource::Synthetic { .. }) => Ok(Some(synthetic_token_vectors(
            dataset,
            synthetic_dim,
            derive_seed(d.seed, &["external-vectors"]),
        ))),
        (None, DataSource::Csv { .. }) => Ok(None),
    }
}

fn failed(d: &DatasetConfig, size: usize, rep: &str, clf: &str, feature_time: f64, err: &Error) -> RunRecord {
    RunRecord {
        dataset_kind: d.kind.to_string(),
        dataset_size: size,
        dataset_seed: d.seed,
        representation: rep.to_owned(),
        classifier: clf.to_owned(),
        feature_extraction_time_s: feature_time,
        fit_time_s: 0.0,
        precision: None,
        recall: None,
        f1: None,
        energy_kwh: None,
        emissions_kg: None,
        status: Status::Failed,
        error: Some(err.to_string()),
    }
}

/// Runs every cell, in (dataset, representation, classifier) order. Cell
/// failures are recorded rather than returned; only configuration problems
/// abort the run.
pub fn run_matrix(config: &RunConfig) -> Result<Vec<RunRecord>> {
    Ok(run_matrix_detailed(config)?.records)
}

pub fn run_matrix_detailed(config: &RunConfig) -> Result<MatrixOutcome> {
    config.validate()?;
    let profile = config.resolve_profile()?;
    let clock: Box<dyn Clock> = match config.fixed_step_clock {
        Some(step) => Box::new(StepClock::new(step)),
        None => Box::new(WallClock::new()),
    };
    let options = CvOptions {
        k: config.folds,
        stratified: config.stratified,
        fit_on_full_dataset: config.fit_on_full_dataset,
        settings: config.features.clone(),
    };
    let master = config.master_seed;
    let mut records = Vec::new();
    let mut cells = Vec::new();

    for d in &config.datasets {
        let label = d.label();
        let prepared = load_dataset(d).and_then(|ds| {
            let ext = external_vectors_for(d, &ds, config.synthetic_vector_dim)?;
            let folds = kfold_indices(&ds.labels, config.folds, derive_seed(master, &[&label]), config.stratified)?;
            Ok((ds, ext, folds))
        });
        let (dataset, external, folds) = match prepared {
            Ok(p) => p,
            Err(e) => {
                log::warn!("dataset {label} unavailable: {e}");
                for rep in &config.representations {
                    for clf in &config.classifiers {
                        records.push(failed(d, d.size, rep.name(), clf.name(), 0.0, &e));
                    }
                }
                continue;
            }
        };
        let size = dataset.len();

        for rep in &config.representations {
            let spec = RepresentationSpec::new(*rep);
            let rep_seed = derive_seed(master, &[&label, rep.name()]);
            let mut feature_times = Vec::with_capacity(config.repeats);
            let mut features = None;
            let mut feature_err = None;
            for _ in 0..config.repeats {
                let (built, secs) = measure(clock.as_ref(), || {
                    fold_features(&dataset, &spec, &folds, &options, external.as_ref(), rep_seed)
                });
                match built {
                    Ok(f) => {
                        feature_times.push(secs / folds.len() as f64);
                        features.get_or_insert(f);
                    }
                    Err(e) => {
                        feature_err = Some(e);
                        break;
                    }
                }
            }
            let features = match (features, feature_err) {
                (Some(f), None) => f,
                (_, err) => {
                    let e = err.unwrap_or_else(|| Error::Config("no feature run".into()));
                    log::warn!("{label} {rep}: {e}");
                    for clf in &config.classifiers {
                        records.push(failed(d, size, rep.name(), clf.name(), 0.0, &e));
                    }
                    continue;
                }
            };
            let feature_time = feature_times.iter().sum::<f64>() / feature_times.len() as f64;
            let zero_vector_rows: usize = features.iter().map(|f| f.zero_vector_rows).sum();

            for clf in &config.classifiers {
                let clf_seed = derive_seed(master, &[&label, rep.name(), clf.name()]);
                let spec = ClassifierSpec::new(*clf, clf_seed);
                let mut fit_times = Vec::with_capacity(config.repeats);
                let mut scores: Option<CvScores> = None;
                let mut err = None;
                for _ in 0..config.repeats {
                    match evaluate_classifier(&dataset, &folds, &features, &spec, clock.as_ref()) {
                        Ok(s) => {
                            fit_times.push(s.mean_fit_seconds());
                            scores.get_or_insert(s);
                        }
                        Err(e) => {
                            err = Some(e);
                            break;
                        }
                    }
                }
                let record = match (scores, err) {
                    (Some(s), None) => {
                        let fit_time = fit_times.iter().sum::<f64>() / fit_times.len() as f64;
                        let energy = estimate_energy(feature_time + fit_time, &profile)?;
                        cells.push(CellDiagnostics {
                            dataset: label.clone(),
                            representation: rep.name().to_owned(),
                            classifier: clf.name().to_owned(),
                            zero_vector_rows,
                            zero_division: s.zero_division(),
                            converged: s.converged(),
                            per_fold_f1: s.folds.iter().map(|f| f.metrics.f1).collect(),
                        });
                        RunRecord {
                            dataset_kind: d.kind.to_string(),
                            dataset_size: size,
                            dataset_seed: d.seed,
                            representation: rep.name().to_owned(),
                            classifier: clf.name().to_owned(),
                            feature_extraction_time_s: feature_time,
                            fit_time_s: fit_time,
                            precision: Some(s.precision),
                            recall: Some(s.recall),
                            f1: Some(s.f1),
                            energy_kwh: Some(energy.energy_kwh),
                            emissions_kg: Some(energy.emissions_kg),
                            status: Status::Ok,
                            error: None,
                        }
                    }
                    (_, err) => {
                        let e = err.unwrap_or_else(|| Error::Config("no fit run".into()));
                        log::warn!("{label} {rep} {clf}: {e}");
                        failed(d, size, rep.name(), clf.name(), feature_time, &e)
                    }
                };
                log::info!(
                    "{label} {rep} {clf}: {}",
                    record.f1.map_or_else(|| "failed".to_owned(), |f| format!("f1 {f:.4}"))
                );
                records.push(record);
            }
        }
    }

    let metadata = RunMetadata {
        paragraph_vector_variant: "PV-DBOW".into(),
        mixed_binary_mixture: MIXED_BINARY_MIXTURE.into(),
        first_pc_weights: format!(
            "unit-norm first principal loading, not renormalised to sum 1; columns centred: {}",
            config.features.center_first_pc
        ),
        fit_scope: if config.fit_on_full_dataset {
            "full dataset before cross-validation".into()
        } else {
            "training split of each fold".into()
        },
        power_profile: profile,
        cells,
    };
    Ok(MatrixOutcome { records, metadata })
}

/// Runs the matrix and writes every output, including the resolved config
/// and run metadata, into `config.output_dir`.
pub fn run_and_write(config: &RunConfig) -> Result<MatrixOutcome> {
    let outcome = run_matrix_detailed(config)?;
    let dir = &config.output_dir;
    write_report(&outcome.records, dir)?;
    config.save(&dir.join("config.resolved.json"))?;
    let meta_path = dir.join("metadata.json");
    let meta = serde_json::to_string_pretty(&outcome.metadata)? + "\n";
    std::fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
    Ok(outcome)
}
