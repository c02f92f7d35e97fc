//! The `ecac` command line: one subcommand per pipeline stage.
//!
//! Every command reads and validates all of its inputs before it writes
//! anything, and writes the same bytes when rerun on the same inputs.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use crate::backend::{health_check, BackendDescriptor, Health};
use crate::chain::{run_batch, ChainInput, ChainKind, TemplateSet};
use crate::config::{RunConfig, SpanSource};
use crate::corpus::{load_corpus, ConversationId, Corpus, Schema};
use crate::correction::{
    build_vocabularies, correct_prefixes, correct_suffixes, default_punct_trim, AffixVocabulary, CorrectionMode,
};
use crate::dataset::{
    build_cause_dataset, build_state_dataset, import_entries, split_train_dev, DatasetRecord,
    Manifest, PartSummary, ToRecord, write_records,
};
use crate::error::{Error, Result};
use crate::eval::{corpus_pairs, score_dev_classification, score_pairs, PredictedPair};
use crate::label::EmotionLabel;
use crate::stats::{distance_stats, prediction_stats, quantitative_stats, state_cause_matrix, MatrixDirection};
use crate::submission::{format_submission, parse_submission};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_BACKEND: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ecac", version, about = "Emotion-cause pair extraction pipeline")]
pub struct Cli {
    /// TOML run configuration; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// JSON key mapping for corpus files (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    pub schema: Option<PathBuf>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics: pair counts, distances, state-cause matrices.
    Stats(StatsArgs),
    /// Build the state and cause datasets, the affix vocabulary and a manifest.
    Build(BuildArgs),
    /// Run a reasoning chain over a dataset file and emit predictions.
    Infer(InferArgs),
    /// Trim predicted spans with the affix vocabulary.
    Correct(CorrectArgs),
    /// Score predictions against a gold corpus.
    Score(ScoreArgs),
    /// Write the built-in prompt templates to a directory for editing.
    Templates(TemplatesArgs),
    /// Check that the configured backend answers.
    Health(BackendArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Annotated corpus, or the evaluation corpus when --predictions is given.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Submission file whose pairs are analysed instead of the corpus' own.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Directory for the report files; reports are only printed when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub max_delta: Option<u32>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Annotated training corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Evaluation corpus; its cause entries become the test part.
    #[arg(long)]
    pub test_corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Context window size.
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub split_ratio: Option<f64>,
    /// Keep cross-utterance pairs between turns of the same speaker.
    #[arg(long)]
    pub keep_same_speaker_cross: bool,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// Backend descriptor file (TOML, `kind = "remote"` or `kind = "mock"`).
    #[arg(long, conflicts_with = "mock")]
    pub backend: Option<PathBuf>,
    /// Shorthand for a mock backend driven by this JSON script.
    #[arg(long)]
    pub mock: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Dataset file written by `build`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Corpus the dataset entries come from.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub chain: Option<ChainKind>,
    /// Directory of template overrides.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Maximum chains in flight.
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long, value_enum)]
    pub span_source: Option<SpanSource>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_new_tokens: Option<u32>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    /// Submission file to correct.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Vocabulary file written by `build`.
    #[arg(long)]
    pub vocabulary: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<CorrectionMode>,
    /// Output file; the input is rewritten in place when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Diff report; `<output>.diff.tsv` when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Submission file.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Annotated gold corpus.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TemplatesArgs {
    #[arg(long)]
    pub out: PathBuf,
}

/// Exit code for an error: 1 validation, 2 backend, 3 I/O.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Backend(_) => EXIT_BACKEND,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

/// Parses arguments from the process, runs, and reports errors on stderr.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Runs one parsed command line. Returns the process exit code on success
/// paths that still need a nonzero status (partial backend failure).
pub fn run(cli: Cli) -> Result<u8> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(schema) = cli.schema {
        config.paths.schema = Some(schema);
    }
    apply_overrides(&mut config, &cli.command)?;
    config.validate()?;
    eprintln!("ecac {}: {}", env!("CARGO_PKG_VERSION"), config.banner());

    let schema = match &config.paths.schema {
        Some(path) => Schema::load(path)?,
        None => Schema::default(),
    };
    match cli.command {
        Command::Stats(_) => cmd_stats(&config, &schema).map(|_| 0),
        Command::Build(_) => cmd_build(&config, &schema).map(|_| 0),
        Command::Infer(_) => cmd_infer(&config, &schema),
        Command::Correct(ref a) => cmd_correct(&config, &schema, a.report.as_deref()).map(|_| 0),
        Command::Score(_) => cmd_score(&config, &schema).map(|_| 0),
        Command::Templates(ref a) => {
            TemplateSet::default().write_dir(&a.out)?;
            println!("templates written to {}", a.out.display());
            Ok(0)
        }
        Command::Health(_) => {
            let descriptor = require_backend(&config)?;
            match health_check(descriptor)? {
                Health::Healthy { detail } => println!("healthy: {detail}"),
            }
            Ok(0)
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, value: &Option<PathBuf>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

fn apply_backend(config: &mut RunConfig, args: &BackendArgs) -> Result<()> {
    if let Some(path) = &args.backend {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut descriptor: BackendDescriptor = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        descriptor.rebase(path.parent().unwrap_or(Path::new(".")));
        config.backend = Some(descriptor);
    }
    if let Some(script) = &args.mock {
        config.backend = Some(BackendDescriptor::Mock { script: script.clone() });
    }
    Ok(())
}

fn apply_overrides(config: &mut RunConfig, command: &Command) -> Result<()> {
    let paths = &mut config.paths;
    match command {
        Command::Stats(a) => {
            set_path(&mut paths.corpus, &a.corpus);
            set_path(&mut paths.predictions, &a.predictions);
            set_path(&mut paths.out_dir, &a.out);
            set(&mut config.max_delta, a.max_delta);
        }
        Command::Build(a) => {
            set_path(&mut paths.corpus, &a.corpus);
            set_path(&mut paths.test_corpus, &a.test_corpus);
            set_path(&mut paths.out_dir, &a.out);
            set(&mut config.k, a.k);
            set(&mut config.split_ratio, a.split_ratio);
            if a.keep_same_speaker_cross {
                config.exclude_same_speaker_cross = false;
            }
        }
        Command::Infer(a) => {
            set_path(&mut paths.dataset, &a.dataset);
            set_path(&mut paths.test_corpus, &a.corpus);
            set_path(&mut paths.out_dir, &a.out);
            set_path(&mut paths.templates, &a.templates);
            set(&mut config.chain, a.chain);
            set(&mut config.concurrency, a.concurrency);
            set(&mut config.span_source, a.span_source);
            set(&mut config.generation.temperature, a.temperature);
            set(&mut config.generation.max_new_tokens, a.max_new_tokens);
            apply_backend(config, &a.backend)?;
        }
        Command::Correct(a) => {
            set_path(&mut paths.predictions, &a.predictions);
            set_path(&mut paths.vocabulary, &a.vocabulary);
            set(&mut config.correction, a.mode);
            if let Some(out) = &a.out {
                paths.out_dir = Some(out.clone());
            }
        }
        Command::Score(a) => {
            set_path(&mut paths.predictions, &a.predictions);
            set_path(&mut paths.corpus, &a.gold);
            set_path(&mut paths.out_dir, &a.out);
        }
        Command::Templates(_) => {}
        Command::Health(a) => apply_backend(config, a)?,
    }
    Ok(())
}

fn require<'p>(path: &'p Option<PathBuf>, what: &str, flag: &str) -> Result<&'p Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("{what} is required (pass {flag} or set it in the config file)")))
}

fn require_backend(config: &RunConfig) -> Result<&BackendDescriptor> {
    config
        .backend
        .as_ref()
        .ok_or_else(|| Error::Config("no backend configured (pass --backend or --mock)".into()))
}

/// Output files collected in memory and written only once everything succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((path, bytes.into()));
    }

    fn json<T: serde::Serialize>(&mut self, path: PathBuf, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
        bytes.push(b'\n');
        self.add(path, bytes);
    }

    fn commit(self) -> Result<()> {
        for (path, bytes) in self.files {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            info!("wrote {}", path.display());
        }
        Ok(())
    }
}

/// Checks that two corpora hold the same conversations and utterances.
fn ensure_same_conversations(a: &Corpus, b: &Corpus, what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "{what}: {} conversations against {} in the reference corpus",
            a.len(),
            b.len()
        )));
    }
    for (x, y) in a.conversations().iter().zip(b.conversations()) {
        let same = x.id == y.id
            && x.utterances.len() == y.utterances.len()
            && x.utterances.iter().zip(&y.utterances).all(|(u, v)| u.text == v.text && u.speaker == v.speaker);
        if !same {
            return Err(Error::Validation(format!(
                "{what}: conversation {} does not match the reference corpus",
                x.id
            )));
        }
    }
    Ok(())
}

pub fn cmd_stats(config: &RunConfig, schema: &Schema) -> Result<()> {
    let corpus = load_corpus(require(&config.paths.corpus, "corpus", "--corpus")?, schema)?;
    let (quant, distance, caused_by, caused_on) = match &config.paths.predictions {
        Some(path) => {
            let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let (submitted, predictions) = parse_submission(&raw, schema)?;
            ensure_same_conversations(&submitted, &corpus, "predictions")?;
            let r = prediction_stats(&predictions, &corpus, config.max_delta)?;
            (r.quantitative, r.distance, r.caused_by, r.caused_on)
        }
        None => (
            quantitative_stats(&corpus),
            distance_stats(&corpus, config.max_delta),
            state_cause_matrix(&corpus, MatrixDirection::CausedBy),
            state_cause_matrix(&corpus, MatrixDirection::CausedOn),
        ),
    };

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", quant.table());
    let _ = writeln!(stdout, "{}", distance.table());
    let _ = writeln!(stdout, "{}", caused_by.table());
    let _ = writeln!(stdout, "{}", caused_on.table());

    if let Some(dir) = &config.paths.out_dir {
        let mut out = Outputs::default();
        out.add(dir.join("quantitative.tsv"), quant.tsv());
        out.add(dir.join("distance.tsv"), distance.tsv());
        out.add(dir.join("caused_by.tsv"), caused_by.tsv());
        out.add(dir.join("caused_on.tsv"), caused_on.tsv());
        out.json(
            dir.join("stats.json"),
            &json!({
                "quantitative": quant,
                "distance": distance,
                "caused_by": caused_by,
                "caused_on": caused_on,
            }),
        );
        out.commit()?;
    }
    Ok(())
}

fn records<T: ToRecord>(entries: &[T]) -> Vec<DatasetRecord> {
    entries.iter().map(ToRecord::to_record).collect()
}

pub fn cmd_build(config: &RunConfig, schema: &Schema) -> Result<()> {
    let corpus = load_corpus(require(&config.paths.corpus, "training corpus", "--corpus")?, schema)?;
    if !corpus.is_annotated() {
        return Err(Error::Validation("the training corpus must carry emotion states".into()));
    }
    let test = match &config.paths.test_corpus {
        Some(p) => Some(load_corpus(p, schema)?),
        None => None,
    };
    let dir = require(&config.paths.out_dir, "output directory", "--out")?;
    let (train, dev) = split_train_dev(&corpus, config.split_ratio)?;
    let (k, exclude) = (config.k, config.exclude_same_speaker_cross);

    let mut parts: Vec<(&str, &str, Vec<DatasetRecord>)> = vec![
        ("state", "train", records(&build_state_dataset(&train, k)?)),
        ("state", "dev", records(&build_state_dataset(&dev, k)?)),
        ("cause", "train", records(&build_cause_dataset(&train, k, exclude))),
        ("cause", "dev", records(&build_cause_dataset(&dev, k, exclude))),
    ];
    if let Some(test) = &test {
        if test.is_annotated() && !test.is_empty() {
            parts.push(("state", "test", records(&build_state_dataset(test, k)?)));
        }
        parts.push(("cause", "test", records(&build_cause_dataset(test, k, exclude))));
    }

    let (vocabulary, skipped) = build_vocabularies(&train);
    if skipped > 0 {
        info!("{skipped} vocabulary candidates rejected");
    }

    let mut manifest = Manifest {
        k,
        split_ratio: config.split_ratio,
        exclude_same_speaker_cross: exclude,
        datasets: BTreeMap::new(),
    };
    let mut out = Outputs::default();
    for (dataset, part, recs) in &parts {
        let mut bytes = Vec::new();
        write_records(recs, &mut bytes).map_err(|e| Error::Validation(format!("{dataset}/{part}: {e}")))?;
        out.add(dir.join(format!("{dataset}_{part}.csv")), bytes);
        manifest
            .datasets
            .entry(dataset.to_string())
            .or_default()
            .insert(part.to_string(), PartSummary::of(recs));
    }
    out.add(dir.join("vocabulary.txt"), vocabulary.to_text());
    out.json(dir.join("manifest.json"), &manifest);
    out.commit()?;

    for (dataset, by_part) in &manifest.datasets {
        for (part, summary) in by_part {
            println!("{dataset}/{part}: {}", summary.total);
        }
    }
    Ok(())
}

/// Resolves dataset records against `corpus`, rejecting any that do not fit.
fn check_records(records: &[DatasetRecord], corpus: &Corpus) -> Result<()> {
    for (n, r) in records.iter().enumerate() {
        let conv = corpus
            .conversation(&ConversationId::parse(&r.conversation_id))
            .ok_or_else(|| Error::Validation(format!("entry {}: unknown conversation {}", n + 1, r.conversation_id)))?;
        let fits = |id: u32, text: &str| conv.utterance(id).is_some_and(|u| u.text == text);
        if !fits(r.src_id, &r.src_text) || !fits(r.tgt_id, &r.tgt_text) {
            return Err(Error::Validation(format!(
                "entry {}: utterances {}/{} of conversation {} do not match the corpus",
                n + 1,
                r.src_id,
                r.tgt_id,
                r.conversation_id
            )));
        }
    }
    Ok(())
}

fn span_for(text: &str, source: SpanSource) -> &str {
    match source {
        SpanSource::Raw => text.trim(),
        SpanSource::Punct => match default_punct_trim(text) {
            "" => text.trim(),
            trimmed => trimmed,
        },
    }
}

/// Returns 0, or the backend exit code when some chains failed.
pub fn cmd_infer(config: &RunConfig, schema: &Schema) -> Result<u8> {
    let dataset = require(&config.paths.dataset, "dataset file", "--dataset")?;
    let corpus_path = require(&config.paths.test_corpus, "corpus", "--corpus")?;
    let dir = require(&config.paths.out_dir, "output directory", "--out")?;
    let records = import_entries(dataset)?;
    let corpus = load_corpus(corpus_path, schema)?;
    check_records(&records, &corpus)?;
    let templates = match &config.paths.templates {
        Some(d) => TemplateSet::load_dir(d)?,
        None => TemplateSet::default(),
    };
    let backend = require_backend(config)?.connect()?;
    info!("backend: {}", backend.describe());

    let kind = config.chain;
    let inputs: Vec<ChainInput<'_>> = records.iter().map(ChainInput::from).collect();
    let outcomes = run_batch(&templates, kind, &inputs, &backend, &config.generation, config.concurrency)?;

    let mut transcripts = Vec::new();
    let mut results = Vec::new();
    let mut predictions = Vec::new();
    let (mut failed, mut unparsed) = (0usize, 0usize);
    let mut classification: Vec<(EmotionLabel, EmotionLabel)> = Vec::new();
    for (record, outcome) in records.iter().zip(&outcomes) {
        let key = json!({
            "conversation_id": record.conversation_id,
            "src_id": record.src_id,
            "tgt_id": record.tgt_id,
        });
        let mut line = key.clone();
        match outcome {
            Ok(result) => {
                for t in &result.transcripts {
                    let mut entry = key.clone();
                    entry["step"] = json!(t.step);
                    entry["prompt"] = json!(t.prompt);
                    entry["completion"] = json!(t.completion);
                    transcripts.push(entry);
                }
                let label = result.label_or_neutral();
                if !result.is_parsed() {
                    unparsed += 1;
                }
                if let Some(gold) = record.answer() {
                    classification.push((label, gold));
                }
                line["label"] = json!(label);
                line["parsed"] = json!(result.is_parsed());
                if let Some(state) = result.revised_source_state {
                    line["revised_source_state"] = json!(state);
                }
                if kind != ChainKind::State && label.is_cause() {
                    let span = span_for(&record.src_text, config.span_source);
                    if span.is_empty() {
                        warn!("skipping pair {key}: source utterance is empty");
                    } else {
                        predictions.push(PredictedPair {
                            conversation: ConversationId::parse(&record.conversation_id),
                            src_id: record.src_id,
                            tgt_id: record.tgt_id,
                            emotion: label,
                            span: span.to_string(),
                        });
                    }
                }
            }
            Err(e) => {
                failed += 1;
                line["error"] = json!(e.to_string());
                line["failed_step"] = json!(e.step());
            }
        }
        results.push(line);
    }

    let mut summary = json!({
        "chain": kind,
        "entries": records.len(),
        "succeeded": records.len() - failed,
        "failed": failed,
        "unparsed": unparsed,
        "transcript_steps": transcripts.len(),
    });
    if kind != ChainKind::State {
        summary["pairs"] = json!(predictions.len());
    }
    if corpus.is_annotated() && !classification.is_empty() {
        let (pred, gold): (Vec<_>, Vec<_>) = classification.into_iter().unzip();
        summary["f1_dev"] = json!(score_dev_classification(&pred, &gold)?);
    }

    let mut out = Outputs::default();
    out.add(dir.join("transcripts.jsonl"), jsonl(&transcripts));
    out.add(dir.join("results.jsonl"), jsonl(&results));
    if kind != ChainKind::State {
        out.add(dir.join("predictions.json"), format_submission(&predictions, &corpus, schema)?);
    }
    out.json(dir.join("summary.json"), &summary);
    out.commit()?;

    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    if failed > 0 {
        let first = outcomes.iter().find_map(|o| o.as_ref().err()).expect("counted a failure");
        eprintln!("{failed} of {} chains failed; first failure: {first}", records.len());
        return Ok(EXIT_BACKEND);
    }
    Ok(0)
}

fn jsonl(lines: &[serde_json::Value]) -> Vec<u8> {
    let mut out = Vec::new();
    for line in lines {
        serde_json::to_writer(&mut out, line).expect("values serialize");
        out.push(b'\n');
    }
    out
}

/// How one span fared under correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionStatus {
    Unchanged,
    Trimmed,
    /// Every character would have been stripped; the input was kept.
    Fallback,
}

impl CorrectionStatus {
    fn as_str(self) -> &'static str {
        match self {
            CorrectionStatus::Unchanged => "unchanged",
            CorrectionStatus::Trimmed => "trimmed",
            CorrectionStatus::Fallback => "fallback",
        }
    }
}

/// Corrects one span and classifies the change.
pub fn correct_with_status(span: &str, vocabulary: &AffixVocabulary, mode: CorrectionMode) -> (String, CorrectionStatus) {
    let after_prefix = correct_prefixes(span.trim(), vocabulary.prefixes(), mode);
    let corrected = correct_suffixes(after_prefix, vocabulary.suffixes(), mode);
    if corrected.is_empty() {
        (span.to_string(), CorrectionStatus::Fallback)
    } else if corrected == span {
        (span.to_string(), CorrectionStatus::Unchanged)
    } else {
        (corrected.to_string(), CorrectionStatus::Trimmed)
    }
}

fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

pub fn cmd_correct(config: &RunConfig, schema: &Schema, report: Option<&Path>) -> Result<()> {
    let input = require(&config.paths.predictions, "predictions file", "--predictions")?;
    let vocab_path = config.paths.vocabulary.as_deref().ok_or_else(|| {
        Error::Config("a vocabulary file is required (pass --vocabulary); run `ecac build` to create one".into())
    })?;
    if !vocab_path.exists() {
        return Err(Error::Config(format!(
            "vocabulary file {} not found; run `ecac build` to create it",
            vocab_path.display()
        )));
    }
    let vocabulary = AffixVocabulary::load(vocab_path)?;
    let raw = std::fs::read(input).map_err(|e| Error::io(input, e))?;
    let (corpus, predictions) = parse_submission(&raw, schema)?;

    let mut diff = String::from("conversation_id\tsrc_id\ttgt_id\tstatus\tbefore\tafter\n");
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut corrected = Vec::with_capacity(predictions.len());
    for p in predictions {
        let (span, status) = correct_with_status(&p.span, &vocabulary, config.correction);
        *counts.entry(status.as_str()).or_default() += 1;
        if status != CorrectionStatus::Unchanged {
            diff.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                p.conversation,
                p.src_id,
                p.tgt_id,
                status.as_str(),
                tsv_field(&p.span),
                tsv_field(&span)
            ));
        }
        corrected.push(PredictedPair { span, ..p });
    }

    let output = config.paths.out_dir.as_deref().unwrap_or(input);
    let report = report.map_or_else(
        || {
            let mut name = output.as_os_str().to_owned();
            name.push(".diff.tsv");
            PathBuf::from(name)
        },
        Path::to_path_buf,
    );
    let mut out = Outputs::default();
    out.add(output.to_path_buf(), format_submission(&corrected, &corpus, schema)?);
    out.add(report.clone(), diff);
    out.commit()?;
    println!(
        "{} spans: {} trimmed, {} unchanged, {} fallback; diff in {}",
        corrected.len(),
        counts.get("trimmed").unwrap_or(&0),
        counts.get("unchanged").unwrap_or(&0),
        counts.get("fallback").unwrap_or(&0),
        report.display()
    );
    Ok(())
}

pub fn cmd_score(config: &RunConfig, schema: &Schema) -> Result<()> {
    let pred_path = require(&config.paths.predictions, "predictions file", "--predictions")?;
    let gold = load_corpus(require(&config.paths.corpus, "gold corpus", "--gold")?, schema)?;
    let raw = std::fs::read(pred_path).map_err(|e| Error::io(pred_path, e))?;
    let (submitted, predictions) = parse_submission(&raw, schema)?;
    ensure_same_conversations(&submitted, &gold, "predictions")?;
    let report = score_pairs(&predictions, &corpus_pairs(&gold))?;
    println!("{}", report.table());
    if let Some(dir) = &config.paths.out_dir {
        let mut out = Outputs::default();
        out.add(dir.join("score.tsv"), report.tsv());
        out.json(dir.join("score.json"), &report);
        out.commit()?;
    }
    Ok(())
}
