//! The `compsig` command line.
//!
//! Every run writes `<output>.manifest.json` holding its arguments; `compsig
//! replay <manifest>` runs them again. Exit codes: 0 success, 2 usage error,
//! 3 data error, 4 internal error. Failures print one line to stderr:
//! `error: <kind>: <message>`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compress::{prefix_curve, CompressorConfig, PrefixUnit};
use crate::corpus::{self, Document, PreprocessRules, SegmentedDocument, Segmenter};
use crate::error::{Error, Result};
use crate::features::{self, FeatureConfig, FeatureMetadata, FeatureRow};
use crate::model::{self, Dataset, GBMConfig, Metrics};
use crate::report::{self, ImportanceRecord, Sidecar};
use crate::seed;
use crate::synth::{self, BaselineMode, SweepParams, Vocabulary};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "compsig", version, about = "Compression-based text signals and classifiers")]
pub struct Cli {
    /// Global seed; every random step derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// gzip compression level.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=9))]
    pub level: u32,

    /// Drop the fixed 18-byte gzip header and trailer from compressed sizes.
    #[arg(long, global = true)]
    pub no_header: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a JSONL corpus (URLs, emoji, markup, whitespace, NFC).
    Preprocess(PreprocessArgs),
    /// Compute the feature table of a JSONL corpus.
    Features(FeaturesArgs),
    /// Compression ratio against entropy over fixed-entropy regimes.
    Sweep(SweepArgs),
    /// Generate random-word baseline documents.
    Baselines(BaselinesArgs),
    /// Prefix compression curves, aggregated per label.
    Curves(CurvesArgs),
    /// Train a classifier on a feature table.
    Train(TrainArgs),
    /// Score a saved model on a feature table.
    Eval(EvalArgs),
    /// Mean absolute Shapley value per feature.
    Importance(ImportanceArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Rules file (`key = value` lines); all rules are on when omitted.
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentationArgs {
    /// One abbreviation per line; replaces the built-in list.
    #[arg(long)]
    pub abbreviations: Option<PathBuf>,
}

impl SegmentationArgs {
    fn segmenter(&self) -> Result<Segmenter> {
        match &self.abbreviations {
            Some(p) => Segmenter::from_file(p),
            None => Ok(Segmenter::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub prefix_step: u64,
    #[arg(long, default_value = "character")]
    pub prefix_unit: PrefixUnit,
    /// Skip documents whose features cannot be computed instead of failing.
    #[arg(long)]
    pub skip_errors: bool,
    #[command(flatten)]
    pub seg: SegmentationArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub output: PathBuf,
    /// Vocabulary size.
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    /// Number of h values.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub count: u64,
    /// Tokens per sample.
    #[arg(long, default_value_t = 479, value_parser = clap::value_parser!(u64).range(1..))]
    pub tokens: u64,
    /// Samples per h value.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
}

#[derive(Debug, Args)]
#[group(id = "vocab_source", required = true, multiple = false)]
pub struct VocabSource {
    /// Word list, one `word` or `word<TAB>count` per line.
    #[arg(long, group = "vocab_source")]
    pub vocab: Option<PathBuf>,
    /// Build the vocabulary and its frequencies from the whitespace-delimited
    /// tokens of a JSONL corpus.
    #[arg(long, group = "vocab_source")]
    pub vocab_corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselinesArgs {
    pub output: PathBuf,
    #[command(flatten)]
    pub source: VocabSource,
    #[arg(long, default_value = "uniform")]
    pub mode: BaselineMode,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_docs: u64,
    #[arg(long, default_value_t = 479, value_parser = clap::value_parser!(u64).range(1..))]
    pub tokens: u64,
    /// Group words into capitalized, period-terminated sentences of this
    /// length (0 leaves the text unpunctuated).
    #[arg(long, default_value_t = 0)]
    pub sentence_words: usize,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value = "sentence")]
    pub unit: PrefixUnit,
    /// Prefix step in units.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub step: u64,
    #[arg(long, default_value_t = report::DEFAULT_BINS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub bins: u64,
    #[arg(long, default_value_t = report::DEFAULT_MIN_COUNT as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_count: u64,
    /// Summarize each prefix length k separately instead of binning.
    #[arg(long)]
    pub per_k: bool,
    /// Also write every curve point to this CSV.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[command(flatten)]
    pub seg: SegmentationArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 31, value_parser = clap::value_parser!(u64).range(2..))]
    pub max_leaves: u64,
    #[arg(long, default_value_t = 255, value_parser = clap::value_parser!(u64).range(2..=65535))]
    pub max_bins: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_samples_leaf: u64,
    #[arg(long, default_value_t = 1.0)]
    pub l2: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub features: PathBuf,
    pub model: PathBuf,
    pub metrics: PathBuf,
    /// Label selection and merging, e.g. `human,gpt=llm,llama=llm`. Listed
    /// labels are kept (renamed by `from=to`); all others are dropped.
    #[arg(long)]
    pub labels: Option<String>,
    /// Fraction of each class used for training.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    #[command(flatten)]
    pub gbm: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub model: PathBuf,
    pub features: PathBuf,
    pub metrics: PathBuf,
    /// Same syntax as for `train`.
    #[arg(long)]
    pub labels: Option<String>,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    pub model: PathBuf,
    pub features: PathBuf,
    pub output: PathBuf,
    /// Class whose raw score is explained (default: the positive class of a
    /// binary model, otherwise the first class).
    #[arg(long)]
    pub class: Option<String>,
    /// Also write per-document attributions to this CSV.
    #[arg(long)]
    pub per_sample: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// What a run records so it can be repeated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name.
    pub args: Vec<String>,
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(output: &Path, command: &str, args: &[String]) -> Result<()> {
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        args: args.to_vec(),
    };
    report::write_json(manifest_path(output), &m)
}

/// Parses and runs `args` (without the program name), returning the exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let outcome = std::panic::catch_unwind(|| run_args(&args));
    match outcome {
        Ok(code) => code,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            eprintln!("error: internal: {}", one_line(&msg));
            EXIT_INTERNAL
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run_from(std::env::args_os().skip(1)))
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn run_args(args: &[OsString]) -> u8 {
    let argv = std::iter::once(OsString::from("compsig")).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("usage error");
                    eprintln!("error: usage: {}", one_line(first.trim_start_matches("error: ")));
                    EXIT_USAGE
                }
            };
        }
    };
    let strings: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &strings) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
            if matches!(e, Error::InvalidArgument(_)) {
                EXIT_USAGE
            } else {
                EXIT_DATA
            }
        }
    }
}

fn compressor(cli: &Cli) -> Result<CompressorConfig> {
    CompressorConfig::new(cli.level, !cli.no_header)
}

fn execute(cli: &Cli, args: &[String]) -> Result<()> {
    let (name, primary) = match &cli.command {
        Command::Preprocess(a) => ("preprocess", cmd_preprocess(a)?),
        Command::Features(a) => ("features", cmd_features(cli, a)?),
        Command::Sweep(a) => ("sweep", cmd_sweep(cli, a)?),
        Command::Baselines(a) => ("baselines", cmd_baselines(cli, a)?),
        Command::Curves(a) => ("curves", cmd_curves(cli, a)?),
        Command::Train(a) => ("train", cmd_train(cli, a)?),
        Command::Eval(a) => ("eval", cmd_eval(a)?),
        Command::Importance(a) => ("importance", cmd_importance(a)?),
        Command::Replay(a) => return cmd_replay(a),
    };
    write_manifest(&primary, name, args)
}

fn load_segmented(path: &Path, segmenter: &Segmenter) -> Result<Vec<SegmentedDocument>> {
    corpus::load_jsonl(path)?
        .into_par_iter()
        .map(|d| {
            let id = d.id.clone();
            SegmentedDocument::new(d, segmenter).map_err(|e| Error::Feature {
                doc_id: id,
                feature: "segmentation",
                source: Box::new(e),
            })
        })
        .collect()
}

fn cmd_preprocess(a: &PreprocessArgs) -> Result<PathBuf> {
    let rules = match &a.rules {
        Some(p) => PreprocessRules::from_config_file(p)?,
        None => PreprocessRules::all(),
    };
    let docs = corpus::load_jsonl(&a.input)?;
    let cleaned: Vec<Document> = docs.par_iter().map(|d| corpus::preprocess(d, &rules)).collect();
    corpus::write_jsonl(&a.output, &cleaned)?;
    println!("preprocessed {} documents -> {}", cleaned.len(), a.output.display());
    Ok(a.output.clone())
}

fn cmd_features(cli: &Cli, a: &FeaturesArgs) -> Result<PathBuf> {
    let segmenter = a.seg.segmenter()?;
    let docs = corpus::load_jsonl(&a.input)?;
    let cfg = FeatureConfig {
        compressor: compressor(cli)?,
        prefix_unit: a.prefix_unit,
        prefix_step: a.prefix_step as usize,
        seed: cli.seed,
    };
    let results: Vec<Result<FeatureRow>> = docs
        .into_par_iter()
        .map(|d| {
            let seg = SegmentedDocument::new(d.clone(), &segmenter).map_err(|e| Error::Feature {
                doc_id: d.id.clone(),
                feature: "segmentation",
                source: Box::new(e),
            })?;
            Ok(FeatureRow {
                doc_id: seg.doc.id.clone(),
                label: seg.doc.label.clone(),
                word_count: seg.word_count,
                features: features::extract(&seg, &cfg)?,
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut skipped = 0usize;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) if a.skip_errors => {
                eprintln!("skipped: {}", one_line(&e.to_string()));
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    report::write_features(&a.output, &rows)?;
    Sidecar::new("features")
        .param("feature_config", FeatureMetadata::new(&cfg))
        .param("input", a.input.display().to_string())
        .param("documents", rows.len())
        .param("skipped", skipped)
        .with_float_format()
        .write_for(&a.output)?;
    println!("{} feature rows ({} skipped) -> {}", rows.len(), skipped, a.output.display());
    Ok(a.output.clone())
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<PathBuf> {
    let params = SweepParams {
        n: a.n as usize,
        count: a.count as usize,
        tokens: a.tokens as usize,
        samples_per_h: a.samples as usize,
        seed: cli.seed,
    };
    let cfg = compressor(cli)?;
    let rows = synth::entropy_sweep(&params, &cfg)?;
    report::write_sweep(&a.output, &rows)?;
    Sidecar::new("sweep")
        .param("n", params.n)
        .param("count", params.count)
        .param("tokens", params.tokens)
        .param("samples_per_h", params.samples_per_h)
        .param("seed", params.seed)
        .param("compressor_level", cfg.level())
        .param("include_header", cfg.include_header())
        .convention("sd_ratio", "population standard deviation over samples")
        .convention("entropy", "bits, 0 log 0 = 0")
        .convention("vocabulary", "pseudo-words w000001..; head word first")
        .convention("sample_seed", "derived from (seed, h index, sample index)")
        .with_float_format()
        .write_for(&a.output)?;
    println!("{} sweep rows -> {}", rows.len(), a.output.display());
    Ok(a.output.clone())
}

fn cmd_baselines(cli: &Cli, a: &BaselinesArgs) -> Result<PathBuf> {
    let vocab = match (&a.source.vocab, &a.source.vocab_corpus) {
        (Some(p), _) => {
            let raw = std::fs::read_to_string(p)
                .map_err(|e| Error::io(format!("reading {}", p.display()), e))?;
            Vocabulary::from_tsv(&raw)?
        }
        (None, Some(p)) => {
            let docs = corpus::load_jsonl(p)?;
            // Surface tokens, so baselines share the corpus byte alphabet.
            Vocabulary::from_tokens(docs.iter().flat_map(|d| d.text.split_whitespace()))
        }
        (None, None) => unreachable!("clap requires one vocabulary source"),
    };
    let docs: Vec<Document> = (0..a.n_docs as usize)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive_indexed(cli.seed, &[i as u64]);
            let t = synth::random_baseline(&vocab, a.tokens as usize, a.mode, s)?;
            let text = if a.sentence_words > 0 {
                synth::punctuate(&t.text, a.sentence_words)
            } else {
                t.text
            };
            let mut d = Document::new(format!("{}-{:06}", a.mode, i + 1), a.mode.to_string(), text);
            d.meta.insert("seed".into(), s.to_string());
            Ok(d)
        })
        .collect::<Result<_>>()?;
    corpus::write_jsonl(&a.output, &docs)?;
    println!("{} {} baseline documents -> {}", docs.len(), a.mode, a.output.display());
    Ok(a.output.clone())
}

fn cmd_curves(cli: &Cli, a: &CurvesArgs) -> Result<PathBuf> {
    let cfg = compressor(cli)?;
    let docs = load_segmented(&a.input, &a.seg.segmenter()?)?;
    let curves = docs
        .par_iter()
        .map(|d| prefix_curve(d, a.unit, a.step as usize, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let summary = if a.per_k {
        report::group_by_k(&curves, a.min_count as usize)?
    } else {
        report::bin_curves(&curves, a.bins as usize, a.min_count as usize)?
    };
    report::write_curve_summary(&a.output, &summary)?;
    if let Some(raw) = &a.raw {
        report::write_csv(raw, &report::point_records(&curves))?;
    }
    Sidecar::new("curve_summary")
        .param("unit", a.unit)
        .param("step", a.step)
        .param("bins", if a.per_k { None } else { Some(a.bins) })
        .param("min_count", a.min_count)
        .param("compressor_level", cfg.level())
        .param("include_header", cfg.include_header())
        .convention("k_range", "shared across labels")
        .convention("prefixes", "byte prefixes of the document, each compressed independently")
        .with_quantile_rule()
        .with_float_format()
        .write_for(&a.output)?;
    let bins: usize = summary.iter().map(|c| c.bins.len()).sum();
    println!("{} curves, {} summary rows -> {}", curves.len(), bins, a.output.display());
    Ok(a.output.clone())
}

/// Parses `a,b=c,d=c` into a keep/rename map.
pub fn parse_label_map(mapping: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for part in mapping.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (from, to) = match part.split_once('=') {
            Some((f, t)) => (f.trim(), t.trim()),
            None => (part, part),
        };
        if from.is_empty() || to.is_empty() {
            return Err(Error::invalid(format!("bad label mapping {part:?}")));
        }
        if map.insert(from.to_string(), to.to_string()).is_some() {
            return Err(Error::invalid(format!("label {from:?} mapped twice")));
        }
    }
    if map.is_empty() {
        return Err(Error::invalid("empty label mapping"));
    }
    Ok(map)
}

fn apply_label_map(rows: Vec<FeatureRow>, mapping: Option<&str>) -> Result<Vec<FeatureRow>> {
    let Some(mapping) = mapping else { return Ok(rows) };
    let map = parse_label_map(mapping)?;
    Ok(rows
        .into_iter()
        .filter_map(|mut r| {
            let to = map.get(&r.label)?;
            r.label = to.clone();
            Some(r)
        })
        .collect())
}

#[derive(Debug, Serialize)]
struct TrainReport<'a> {
    metrics: &'a Metrics,
    classes: &'a [String],
    train_size: usize,
    test_size: usize,
    split: f64,
    seed: u64,
    labels: Option<&'a str>,
    test_ids: Vec<&'a str>,
}

fn cmd_train(cli: &Cli, a: &TrainArgs) -> Result<PathBuf> {
    if !(a.split > 0.0 && a.split < 1.0) {
        return Err(Error::invalid("--split must lie in (0, 1)"));
    }
    let cfg = GBMConfig {
        n_rounds: a.gbm.rounds as usize,
        learning_rate: a.gbm.learning_rate,
        max_leaves: a.gbm.max_leaves as usize,
        max_bins: a.gbm.max_bins as usize,
        min_samples_leaf: a.gbm.min_samples_leaf as usize,
        l2_reg: a.gbm.l2,
        seed: cli.seed,
    };
    cfg.validate()?;
    let rows = apply_label_map(report::read_features(&a.features)?, a.labels.as_deref())?;
    let data = Dataset::from_feature_rows(&rows)?;
    let distinct: std::collections::BTreeSet<&String> = data.labels.iter().collect();
    if distinct.len() < 2 {
        return Err(Error::SingleClass(
            distinct.into_iter().next().cloned().unwrap_or_else(|| "no rows".into()),
        ));
    }
    let (train_idx, test_idx) = model::stratified_split(&data.labels, a.split, cli.seed)?;
    if test_idx.is_empty() {
        return Err(Error::Empty("test split"));
    }
    let train = data.subset(&train_idx);
    let test = data.subset(&test_idx);
    let ens = model::fit(&train, &cfg)?;
    let metrics = model::evaluate(&ens, &test.rows, &test.labels)?;
    model::save(&ens, &a.model)?;
    report::write_json(
        &a.metrics,
        &TrainReport {
            metrics: &metrics,
            classes: &ens.classes,
            train_size: train.len(),
            test_size: test.len(),
            split: a.split,
            seed: cli.seed,
            labels: a.labels.as_deref(),
            test_ids: test_idx.iter().map(|&i| rows[i].doc_id.as_str()).collect(),
        },
    )?;
    println!("{metrics}");
    Ok(a.model.clone())
}

fn cmd_eval(a: &EvalArgs) -> Result<PathBuf> {
    let ens = model::load(&a.model)?;
    let rows = apply_label_map(report::read_features(&a.features)?, a.labels.as_deref())?;
    let data = Dataset::from_feature_rows(&rows)?;
    let metrics = model::evaluate(&ens, &data.rows, &data.labels)?;
    report::write_json(&a.metrics, &metrics)?;
    println!("{metrics}");
    Ok(a.metrics.clone())
}

fn cmd_importance(a: &ImportanceArgs) -> Result<PathBuf> {
    let ens = model::load(&a.model)?;
    let rows = report::read_features(&a.features)?;
    let data = Dataset::from_feature_rows(&rows)?;
    let order = ens.column_order(&data.feature_names)?;
    let x: Vec<Vec<f64>> = data.rows.iter().map(|r| order.iter().map(|&j| r[j]).collect()).collect();
    let sv = model::shap_values(&ens, &x, a.class.as_deref())?;
    let n = x.len().max(1) as f64;
    let global = model::GlobalImportance {
        class: sv.class.clone(),
        mean_abs: sv
            .feature_names
            .iter()
            .enumerate()
            .map(|(j, f)| (f.clone(), sv.values.iter().map(|r| r[j].abs()).sum::<f64>() / n))
            .collect(),
    };
    let records: Vec<ImportanceRecord> = global
        .ranked()
        .into_iter()
        .enumerate()
        .map(|(i, (feature, v))| ImportanceRecord {
            rank: i + 1,
            feature,
            mean_abs_shap: v,
            class: global.class.clone(),
        })
        .collect();
    report::write_csv(&a.output, &records)?;
    if let Some(p) = &a.per_sample {
        let file = std::fs::File::create(p).map_err(|e| Error::io(format!("creating {}", p.display()), e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec!["doc_id".to_string(), "label".to_string()];
        header.extend(sv.feature_names.iter().cloned());
        header.push("expected_value".into());
        w.write_record(&header)?;
        for (row, phi) in rows.iter().zip(&sv.values) {
            let mut rec = vec![row.doc_id.clone(), row.label.clone()];
            rec.extend(phi.iter().map(|v| v.to_string()));
            rec.push(sv.expected_value.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(format!("writing {}", p.display()), e))?;
    }
    Sidecar::new("importance")
        .param("class", &global.class)
        .param("documents", x.len())
        .convention("attribution", "path-dependent TreeSHAP on the raw score, cover-weighted")
        .with_float_format()
        .write_for(&a.output)?;
    for r in &records {
        println!("{:>2}  {:<24} {:.6}", r.rank, r.feature, r.mean_abs_shap);
    }
    Ok(a.output.clone())
}

fn cmd_replay(a: &ReplayArgs) -> Result<()> {
    let m: Manifest = report::read_json(&a.manifest)?;
    if m.tool != env!("CARGO_PKG_NAME") {
        return Err(Error::invalid(format!("manifest is for tool {:?}", m.tool)));
    }
    if m.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, running {}",
            m.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let argv = std::iter::once("compsig".to_string()).chain(m.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::invalid(format!("manifest arguments: {}", one_line(&e.to_string()))))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::invalid("manifest records a replay"));
    }
    execute(&cli, &m.args)
}
