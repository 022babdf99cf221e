//! `embedbench`: generate corpora, embed them, run the benchmark matrix and
//! rebuild reports.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use embedbench::classifiers::ClassifierFamily;
use embedbench::corpus::DatasetKind;
use embedbench::features::{fit_representation, FeatureSettings, Representation, RepresentationSpec};
use embedbench::report::{
    external_vectors_for, load_dataset, read_results_csv, run_and_write, summarize, write_report, DataSource,
    DatasetConfig, RunConfig,
};
use embedbench::seed::derive_seed;

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    /// More log output (repeat for debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every configured dataset as a `Text,Type` CSV
    GenData(ConfigArgs),
    /// Write per-representation feature matrices (fitted on the full dataset)
    /// and the token-vector archive used for the BERT representations
    Embed {
        #[command(flatten)]
        config: ConfigArgs,
        /// Only write the token-vector archives
        #[arg(long)]
        vectors_only: bool,
    },
    /// Run the dataset × representation × classifier matrix
    Run(ConfigArgs),
    /// Rebuild summary.json and time_vs_f1.csv from a results.csv
    Report {
        #[command(flatten)]
        config: ConfigArgs,
        /// results.csv to read (default: <output-dir>/results.csv)
        #[arg(long)]
        results: Option<PathBuf>,
    },
}

/// A config file plus flags overriding its fields.
#[derive(Args)]
struct ConfigArgs {
    /// JSON run config
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Dataset as KIND:SIZE:SEED, repeatable; replaces the config's list
    #[arg(long = "dataset", value_parser = parse_dataset)]
    datasets: Vec<(DatasetKind, usize, u64)>,
    /// Read the datasets from this CSV instead of generating them
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Signature words per class in synthetic corpora
    #[arg(long)]
    vocab_per_class: Option<usize>,
    /// Share of noise tokens in synthetic corpora
    #[arg(long)]
    noise_rate: Option<f64>,
    /// Token-vector archive (JSONL) for the BERT representations
    #[arg(long)]
    external_vectors: Option<PathBuf>,

    #[arg(long, value_delimiter = ',', value_parser = parse_representation)]
    representations: Option<Vec<Representation>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_classifier)]
    classifiers: Option<Vec<ClassifierFamily>>,
    #[arg(long)]
    folds: Option<usize>,
    /// Timing repeats per stage
    #[arg(long)]
    repeats: Option<usize>,
    /// Power profile name
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    profiles_path: Option<PathBuf>,
    /// Fit embeddings and reducers on the full dataset before CV
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    fit_on_full_dataset: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    stratified: Option<bool>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// JSON file with embedding settings
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    synthetic_vector_dim: Option<usize>,
    /// Make every timed interval last exactly this many seconds
    #[arg(long)]
    fixed_step_clock: Option<f64>,
}

fn parse_dataset(s: &str) -> Result<(DatasetKind, usize, u64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [kind, size, seed] = parts.as_slice() else {
        return Err(format!("expected KIND:SIZE:SEED, got {s:?}"));
    };
    Ok((
        kind.parse().map_err(|e| format!("{e}"))?,
        size.parse().map_err(|_| format!("bad size {size:?}"))?,
        seed.parse().map_err(|_| format!("bad seed {seed:?}"))?,
    ))
}

fn parse_representation(s: &str) -> Result<Representation, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_classifier(s: &str) -> Result<ClassifierFamily, String> {
    s.parse().map_err(|e| format!("{e}"))
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::full_matrix(Vec::new(), "results"),
        };
        if !self.datasets.is_empty() {
            cfg.datasets = self
                .datasets
                .iter()
                .map(|&(kind, size, seed)| DatasetConfig::synthetic(kind, size, seed))
                .collect();
        }
        for d in &mut cfg.datasets {
            if let Some(path) = &self.csv {
                d.source = DataSource::Csv { path: path.clone() };
            }
            if let DataSource::Synthetic {
                vocab_per_class,
                noise_rate,
            } = &mut d.source
            {
                if let Some(v) = self.vocab_per_class {
                    *vocab_per_class = v;
                }
                if let Some(r) = self.noise_rate {
                    *noise_rate = r;
                }
            }
            if let Some(p) = &self.external_vectors {
                d.external_vectors = Some(p.clone());
            }
        }
        if let Some(r) = &self.representations {
            cfg.representations = r.clone();
        }
        if let Some(c) = &self.classifiers {
            cfg.classifiers = c.clone();
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        set!(folds, repeats, profile, fit_on_full_dataset, stratified, master_seed, output_dir, synthetic_vector_dim);
        if self.profiles_path.is_some() {
            cfg.profiles_path = self.profiles_path.clone();
        }
        if self.fixed_step_clock.is_some() {
            cfg.fixed_step_clock = self.fixed_step_clock;
        }
        if let Some(path) = &self.features {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.features = serde_json::from_str::<FeatureSettings>(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn gen_data(cfg: &RunConfig) -> anyhow::Result<()> {
    for d in &cfg.datasets {
        let ds = load_dataset(d).with_context(|| d.label())?;
        let path = cfg.output_dir.join("data").join(format!("{}.csv", d.label()));
        ds.write_csv(create(&path)?)?;
        println!("{}: {} documents -> {}", d.label(), ds.len(), path.display());
    }
    cfg.save(&cfg.output_dir.join("config.resolved.json"))?;
    Ok(())
}

fn embed(cfg: &RunConfig, vectors_only: bool) -> anyhow::Result<()> {
    for d in &cfg.datasets {
        let label = d.label();
        let ds = load_dataset(d).with_context(|| label.clone())?;
        let external = external_vectors_for(d, &ds, cfg.synthetic_vector_dim)?;
        if let (Some(ext), None) = (&external, &d.external_vectors) {
            let path = cfg.output_dir.join("vectors").join(format!("{label}.jsonl"));
            ext.write_jsonl(create(&path)?)?;
            println!("{label}: token vectors (dim {}) -> {}", ext.dim(), path.display());
        }
        if vectors_only {
            continue;
        }
        let rows: Vec<usize> = (0..ds.len()).collect();
        for rep in &cfg.representations {
            let spec = RepresentationSpec::new(*rep);
            let seed = derive_seed(cfg.master_seed, &[&label, rep.name()]);
            let result = fit_representation(&ds, &spec, &rows, &cfg.features, external.as_ref(), seed)
                .and_then(|fitted| fitted.transform(&ds, &rows, external.as_ref(), rep.name()));
            match result {
                Ok(out) => {
                    let path = cfg.output_dir.join("features").join(&label).join(format!("{}.csv", rep.name()));
                    out.features.write_csv(create(&path)?)?;
                    println!(
                        "{label} {rep}: {}x{} ({} zero rows) -> {}",
                        out.features.nrows(),
                        out.features.width(),
                        out.zero_vector_rows,
                        path.display()
                    );
                }
                Err(e) => log::warn!("{label} {rep}: {e}"),
            }
        }
    }
    cfg.save(&cfg.output_dir.join("config.resolved.json"))?;
    Ok(())
}

fn print_summary(records: &[embedbench::RunRecord]) {
    let s = summarize(records);
    println!("{} cells ok, {} failed", s.cells_ok, s.cells_failed);
    println!("mean F1 by representation:");
    for (k, v) in &s.per_representation {
        println!("  {k:<14} {v:.4}");
    }
    println!("mean F1 by classifier:");
    for (k, v) in &s.per_classifier {
        println!("  {k:<20} {v:.4}");
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::GenData(args) => gen_data(&args.resolve()?),
        Command::Embed { config, vectors_only } => embed(&config.resolve()?, vectors_only),
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let outcome = run_and_write(&cfg)?;
            print_summary(&outcome.records);
            println!("wrote {}", cfg.output_dir.display());
            Ok(())
        }
        Command::Report { config, results } => {
            let out_dir = match (&config.output_dir, &config.config) {
                (Some(dir), _) => dir.clone(),
                (None, Some(path)) => RunConfig::load(path)?.output_dir,
                (None, None) => PathBuf::from("results"),
            };
            let results = results.unwrap_or_else(|| out_dir.join("results.csv"));
            let file = File::open(&results).with_context(|| format!("opening {}", results.display()))?;
            let records = read_results_csv(file)?;
            if records.is_empty() {
                bail!("{} has no rows", results.display());
            }
            write_report(&records, &out_dir)?;
            print_summary(&records);
            Ok(())
        }
    }
}
