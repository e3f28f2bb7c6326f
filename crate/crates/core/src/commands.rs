//! The five pipeline commands behind the CLI. Each writes into a fresh run
//! directory under `out` and returns its path.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytics;
use crate::config::{EvalSplit, RunConfig, CONFIG_FILE};
use crate::data::{
    filter_for_classification, parse_csv, split_60_20_20, write_csv, DatasetSplit, ParsedDataset, ReviewRecord,
};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::rng::SeededRng;
use crate::sentiment::{auto_label_dataset, Lexicon};
use crate::text::{build_vocab, encode_pad, load_glove, EmbeddingMatrix, Vocab, GLOVE_UNKNOWN_SCALE};
use crate::train::{
    evaluate, history_csv, majority_baseline, predict, review_tokens, target_for, train, Example, Prediction, Task,
    TrainedModel,
};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const VOCAB_FILE: &str = "vocab.tsv";
const EMBEDDING_SEED_SALT: u64 = 0x656d_6265_6464_696e;

/// Creates `<out>/<command>-NNNN` with the next unused number.
pub fn create_run_dir(out: &Path, command: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let prefix = format!("{command}-");
    let mut last = 0u32;
    for entry in fs::read_dir(out).map_err(|e| Error::io(out, e))? {
        let name = entry.map_err(|e| Error::io(out, e))?.file_name();
        if let Some(n) = name
            .to_str()
            .and_then(|s| s.strip_prefix(&prefix))
            .and_then(|s| s.parse::<u32>().ok())
        {
            last = last.max(n);
        }
    }
    let dir = out.join(format!("{prefix}{:04}", last + 1));
    // create_dir fails on an existing path, so a prior run is never reused.
    fs::create_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

fn start_run(cfg: &RunConfig, command: &str) -> Result<PathBuf> {
    let dir = create_run_dir(&cfg.out, command)?;
    write_file(&dir, CONFIG_FILE, cfg.materialize())?;
    Ok(dir)
}

fn load_data(cfg: &RunConfig) -> Result<ParsedDataset> {
    let path = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("no dataset given (use --data or data= in the config)".into()))?;
    let parsed = parse_csv(path)?;
    if parsed.records.is_empty() {
        return Err(Error::Empty("dataset has no valid rows"));
    }
    Ok(parsed)
}

fn load_lexicon(cfg: &RunConfig) -> Result<Lexicon> {
    match &cfg.lexicon {
        Some(p) => Lexicon::load(p),
        None => Ok(Lexicon::builtin()),
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<PathBuf> {
    let parsed = load_data(cfg)?;
    let report = analytics::run_all(&parsed.records)?;
    let dir = start_run(cfg, "analyze")?;
    report.write(&dir)?;
    write_file(&dir, "ingest_issues.txt", parsed.issues_report())?;
    Ok(dir)
}

/// Sentiment-per-recommendation count table as CSV.
pub fn count_table_csv(table: &[(bool, [usize; 3])]) -> String {
    let mut s = String::from("recommended,negative,neutral,positive\n");
    for (rec, c) in table {
        s.push_str(&format!("{},{},{},{}\n", u8::from(*rec), c[0], c[1], c[2]));
    }
    s
}

pub fn cmd_label(cfg: &RunConfig) -> Result<PathBuf> {
    let parsed = load_data(cfg)?;
    let lexicon = load_lexicon(cfg)?;
    let labeled = auto_label_dataset(&parsed.records, &lexicon);
    let mut csv_bytes = Vec::new();
    write_csv(&mut csv_bytes, &parsed.records, &["sentiment", "compound"], |k| {
        let s = &labeled.scores[k];
        vec![s.label.as_str().to_string(), format!("{:.6}", s.compound)]
    })?;
    let dir = start_run(cfg, "label")?;
    write_file(&dir, "labeled.csv", csv_bytes)?;
    write_file(
        &dir,
        "sentiment_by_recommendation.csv",
        count_table_csv(&labeled.count_table()),
    )?;
    write_file(&dir, "ingest_issues.txt", parsed.issues_report())?;
    Ok(dir)
}

/// Records with text, their class targets and the seeded 60/20/20 split.
pub struct Prepared {
    pub records: Vec<ReviewRecord>,
    pub targets: Vec<usize>,
    pub split: DatasetSplit,
    pub dropped_without_text: usize,
    pub issues: String,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let parsed = load_data(cfg)?;
    let (records, dropped) = filter_for_classification(&parsed.records);
    let task = cfg.train.task;
    let labels = match task {
        Task::Sentiment => Some(auto_label_dataset(&records, &load_lexicon(cfg)?)),
        Task::Recommendation => None,
    };
    let targets = records
        .iter()
        .enumerate()
        .map(|(k, r)| target_for(task, r, labels.as_ref().map(|l| l.scores[k].label)))
        .collect::<Result<Vec<_>>>()?;
    let split = split_60_20_20(records.len(), cfg.train.seed)?;
    Ok(Prepared {
        records,
        targets,
        split,
        dropped_without_text: dropped,
        issues: parsed.issues_report(),
    })
}

impl Prepared {
    pub fn examples(&self, indices: &[usize], vocab: &Vocab, seq_len: usize) -> Result<Vec<Example>> {
        indices
            .iter()
            .map(|&i| {
                Ok(Example {
                    encoded: encode_pad(&review_tokens(&self.records[i]), vocab, seq_len)?,
                    target: self.targets[i],
                })
            })
            .collect()
    }
}

#[derive(Serialize)]
struct SplitSummary {
    records_with_text: usize,
    dropped_without_text: usize,
    train: usize,
    validation: usize,
    test: usize,
    seed: u64,
}

pub fn cmd_train(cfg: &RunConfig) -> Result<PathBuf> {
    let t = &cfg.train;
    let prep = prepare(cfg)?;
    let corpus: Vec<Vec<String>> = prep
        .split
        .train
        .iter()
        .map(|&i| review_tokens(&prep.records[i]))
        .collect();
    let vocab = build_vocab(&corpus, t.min_freq, t.vocab_cap)?;
    let mut emb_rng = SeededRng::new(t.seed ^ EMBEDDING_SEED_SALT);
    let embeddings = match &cfg.embeddings {
        Some(p) => load_glove(p, &vocab, &mut emb_rng)?,
        None => EmbeddingMatrix::random(vocab.len(), t.embed_dim, &mut emb_rng, GLOVE_UNKNOWN_SCALE),
    };
    let train_set = prep.examples(&prep.split.train, &vocab, t.seq_len)?;
    let val_set = prep.examples(&prep.split.validation, &vocab, t.seq_len)?;
    let outcome = train(t, &train_set, &val_set, embeddings)?;

    let dir = start_run(cfg, "train")?;
    outcome.trained.save(&dir.join(CHECKPOINT_FILE), &vocab)?;
    write_file(&dir, VOCAB_FILE, vocab.to_tsv())?;
    write_file(&dir, "history.csv", history_csv(&outcome.history))?;
    let summary = SplitSummary {
        records_with_text: prep.records.len(),
        dropped_without_text: prep.dropped_without_text,
        train: prep.split.train.len(),
        validation: prep.split.validation.len(),
        test: prep.split.test.len(),
        seed: t.seed,
    };
    write_file(&dir, "split.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    write_file(&dir, "ingest_issues.txt", &prep.issues)?;
    Ok(dir)
}

/// Loads the vocabulary and checkpoint of the training run named by `model`.
pub fn load_model(cfg: &RunConfig) -> Result<(TrainedModel, Vocab)> {
    let dir = cfg
        .model
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("no model run directory given (use --model)".into()))?;
    let vocab_path = dir.join(VOCAB_FILE);
    let text = fs::read_to_string(&vocab_path).map_err(|e| Error::io(&vocab_path, e))?;
    let vocab = Vocab::from_tsv(&text, &vocab_path.display().to_string())?;
    let model = TrainedModel::load(&dir.join(CHECKPOINT_FILE), &cfg.train, &vocab)?;
    Ok((model, vocab))
}

fn write_report(dir: &Path, prefix: &str, report: &MetricsReport) -> Result<()> {
    write_file(dir, &format!("{prefix}metrics.json"), report.to_json()? + "\n")?;
    write_file(dir, &format!("{prefix}confusion.csv"), report.confusion_csv())?;
    if let Some(roc) = report.roc_csv() {
        write_file(dir, &format!("{prefix}roc.csv"), roc)?;
    }
    Ok(())
}

/// Evaluates on the configured split (test by default); also writes the
/// majority-class baseline for the same split.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<PathBuf> {
    let (model, vocab) = load_model(cfg)?;
    let prep = prepare(cfg)?;
    let indices = match cfg.eval_split {
        EvalSplit::Train => &prep.split.train,
        EvalSplit::Validation => &prep.split.validation,
        EvalSplit::Test => &prep.split.test,
    };
    let test = prep.examples(indices, &vocab, cfg.train.seq_len)?;
    let report = evaluate(&model, &test)?;
    let train_targets: Vec<usize> = prep.split.train.iter().map(|&i| prep.targets[i]).collect();
    let test_targets: Vec<usize> = test.iter().map(|e| e.target).collect();
    let baseline = majority_baseline(&train_targets, &test_targets, &cfg.train.task.class_names())?;

    let dir = start_run(cfg, "evaluate")?;
    write_report(&dir, "", &report)?;
    write_report(&dir, "baseline_", &baseline)?;
    Ok(dir)
}

/// Single prediction; no run directory is created.
pub fn cmd_predict(cfg: &RunConfig, text: &str) -> Result<Prediction> {
    let (model, vocab) = load_model(cfg)?;
    predict(&model, &vocab, text)
}

/// Exit status for an error: 2 for bad input or usage, 1 for internal faults.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Dimension { .. } | Error::Contract(_) | Error::Json(_) => 1,
        Error::InvalidArgument(_)
        | Error::Empty(_)
        | Error::Parse { .. }
        | Error::Schema(_)
        | Error::UnknownSegment(_)
        | Error::Fingerprint(_)
        | Error::Io { .. }
        | Error::Csv(_) => 2,
    }
}
