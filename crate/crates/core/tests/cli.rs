use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use review_lstm::analytics;
use review_lstm::data::parse_csv;
use review_lstm::sentiment::{score_review, Lexicon};

const BIN: &str = env!("CARGO_BIN_EXE_review-lstm");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn review-lstm")
}

fn run_ok(args: &[&str]) -> PathBuf {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    PathBuf::from(String::from_utf8(out.stdout).unwrap().trim())
}

fn read_dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_writes_one_file_per_table_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let data = fixture("toy10.csv");
    let a = run_ok(&["analyze", "--data", s(&data), "--out", s(tmp.path())]);
    let b = run_ok(&["analyze", "--data", s(&data), "--out", s(tmp.path())]);
    assert_ne!(a, b, "second run must get a new directory");
    let files = read_dir_files(&a);
    let records = parse_csv(&data).unwrap().records;
    for (name, _) in analytics::run_all(&records).unwrap().csv_tables() {
        assert!(files.contains_key(&name), "missing {name}");
    }
    assert!(files.contains_key("report.json"));
    assert!(files.contains_key("config.txt"));
    assert_eq!(files, read_dir_files(&b));
}

#[test]
fn missing_dataset_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["analyze", "--data", "no/such/file.csv", "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/file.csv"));
    assert_eq!(run(&["analyze", "--out", s(tmp.path())]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn label_matches_scoring_oracle_and_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let data = fixture("toy10.csv");
    let first = run_ok(&["label", "--data", s(&data), "--out", s(tmp.path())]);
    let labeled = first.join("labeled.csv");

    let input = parse_csv(&data).unwrap().records;
    let mut rdr = csv::Reader::from_path(&labeled).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "sentiment").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), input.len());
    let lex = Lexicon::builtin();
    for (row, rec) in rows.iter().zip(&input) {
        assert_eq!(&row[col], score_review(rec.review_text.as_deref(), &lex).label.as_str());
    }

    let table = fs::read_to_string(first.join("sentiment_by_recommendation.csv")).unwrap();
    let total: usize = table
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(|v| v.parse::<usize>().unwrap()))
        .sum();
    assert_eq!(total, input.len());

    let second = run_ok(&["label", "--data", s(&labeled), "--out", s(tmp.path())]);
    assert_eq!(
        fs::read(&labeled).unwrap(),
        fs::read(second.join("labeled.csv")).unwrap()
    );
}

#[test]
fn label_rejects_malformed_lexicon() {
    let tmp = tempfile::tempdir().unwrap();
    let lex = tmp.path().join("bad.tsv");
    fs::write(&lex, "good\tnot-a-number\n").unwrap();
    let out = run(&[
        "label",
        "--data",
        s(&fixture("toy10.csv")),
        "--lexicon",
        s(&lex),
        "--out",
        s(&tmp.path().join("runs")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_evaluate_predict_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let cfg = fixture("keyword_toy.cfg");
    let data = fixture("keyword40.csv");
    let run_dir = run_ok(&["train", "--config", s(&cfg), "--data", s(&data), "--out", s(&out)]);
    for f in ["checkpoint.bin", "vocab.tsv", "history.csv", "config.txt", "split.json"] {
        assert!(run_dir.join(f).exists(), "missing {f}");
    }
    let history = fs::read_to_string(run_dir.join("history.csv")).unwrap();
    assert!(history.starts_with("epoch,train_loss,val_loss,val_acc\n"));
    assert_eq!(history.lines().count(), 31);

    let eval_cfg = tmp.path().join("eval.cfg");
    fs::write(&eval_cfg, "eval_split=train\n").unwrap();
    let eval_args = [
        "evaluate",
        "--config",
        s(&eval_cfg),
        "--model",
        s(&run_dir),
        "--out",
        s(&out),
    ];
    let e1 = run_ok(&eval_args);
    let e2 = run_ok(&eval_args);
    let metrics: serde_json::Value = serde_json::from_slice(&fs::read(e1.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["accuracy"].as_f64().unwrap() >= 0.95, "{metrics}");
    assert_eq!(
        fs::read(e1.join("metrics.json")).unwrap(),
        fs::read(e2.join("metrics.json")).unwrap()
    );
    for f in ["confusion.csv", "roc.csv", "baseline_metrics.json"] {
        assert!(e1.join(f).exists(), "missing {f}");
    }

    let p = run(&["predict", "--model", s(&run_dir), "--text", "really good quality"]);
    assert!(p.status.success());
    let line = String::from_utf8(p.stdout).unwrap();
    assert_eq!(line.trim_end().lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    let probs: f64 = v["probabilities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!((probs - 1.0).abs() < 1e-12);
    assert_eq!(v["empty_input"], false);
}

#[test]
fn predict_without_checkpoint_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("config.txt"), "task=recommendation\n").unwrap();
    let out = run(&["predict", "--model", s(tmp.path()), "--text", "nice"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["predict", "--text", "nice"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_model_config_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let cfg = tmp.path().join("small.cfg");
    fs::write(
        &cfg,
        "cell_size=2\nepochs=1\nseq_len=4\nembed_dim=3\nbatch_size=8\nmin_freq=1\n",
    )
    .unwrap();
    let data = fixture("keyword40.csv");
    let run_dir = run_ok(&["train", "--config", s(&cfg), "--data", s(&data), "--out", s(&out)]);
    let override_cfg = tmp.path().join("override.cfg");
    fs::write(&override_cfg, "cell_size=3\n").unwrap();
    let res = run(&[
        "predict",
        "--model",
        s(&run_dir),
        "--config",
        s(&override_cfg),
        "--text",
        "good",
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("fingerprint"));
}
