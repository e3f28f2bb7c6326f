//! Plain-text `key=value` run configuration with layered overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::train::TrainConfig;

pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Training run directory that evaluate/predict load from.
    pub model: Option<PathBuf>,
    /// Split scored by evaluate.
    pub eval_split: EvalSplit,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSplit {
    Train,
    Validation,
    Test,
}

impl EvalSplit {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalSplit::Train => "train",
            EvalSplit::Validation => "validation",
            EvalSplit::Test => "test",
        }
    }
}

impl std::str::FromStr for EvalSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(EvalSplit::Train),
            "validation" => Ok(EvalSplit::Validation),
            "test" => Ok(EvalSplit::Test),
            other => Err(Error::InvalidArgument(format!("unknown eval_split `{other}`"))),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            out: PathBuf::from("runs"),
            lexicon: None,
            embeddings: None,
            model: None,
            eval_split: EvalSplit::Test,
            train: TrainConfig::default(),
        }
    }
}

pub type Pairs = Vec<(String, String)>;

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Pairs> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_string(),
            line: n + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<Pairs> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&text, &path.display().to_string())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidArgument(format!("config key `{key}`: cannot parse `{v}`")))
}

fn opt_path(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "data" => self.data = opt_path(v),
            "out" => self.out = PathBuf::from(v),
            "lexicon" => self.lexicon = opt_path(v),
            "embeddings" => self.embeddings = opt_path(v),
            "model" => self.model = opt_path(v),
            "eval_split" => self.eval_split = v.parse()?,
            "task" => t.task = v.parse()?,
            "seed" => t.seed = parse_num(key, v)?,
            "batch_size" => t.batch_size = parse_num(key, v)?,
            "cell_size" => t.cell_size = parse_num(key, v)?,
            "dropout_rate" => t.dropout_rate = parse_num(key, v)?,
            "epochs" => t.epochs = parse_num(key, v)?,
            "learning_rate" => t.learning_rate = parse_num(key, v)?,
            "seq_len" => t.seq_len = parse_num(key, v)?,
            "vocab_cap" => t.vocab_cap = parse_num(key, v)?,
            "min_freq" => t.min_freq = parse_num(key, v)?,
            "embed_dim" => t.embed_dim = parse_num(key, v)?,
            "clip_norm" => t.clip_norm = parse_num(key, v)?,
            other => return Err(Error::InvalidArgument(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        pairs.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn materialize(&self) -> String {
        let p = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let t = &self.train;
        let mut s = String::new();
        let _ = writeln!(s, "data={}", p(&self.data));
        let _ = writeln!(s, "out={}", self.out.display());
        let _ = writeln!(s, "lexicon={}", p(&self.lexicon));
        let _ = writeln!(s, "embeddings={}", p(&self.embeddings));
        let _ = writeln!(s, "model={}", p(&self.model));
        let _ = writeln!(s, "eval_split={}", self.eval_split.as_str());
        let _ = writeln!(s, "task={}", t.task);
        let _ = writeln!(s, "seed={}", t.seed);
        let _ = writeln!(s, "batch_size={}", t.batch_size);
        let _ = writeln!(s, "cell_size={}", t.cell_size);
        let _ = writeln!(s, "dropout_rate={:?}", t.dropout_rate);
        let _ = writeln!(s, "epochs={}", t.epochs);
        let _ = writeln!(s, "learning_rate={:?}", t.learning_rate);
        let _ = writeln!(s, "seq_len={}", t.seq_len);
        let _ = writeln!(s, "vocab_cap={}", t.vocab_cap);
        let _ = writeln!(s, "min_freq={}", t.min_freq);
        let _ = writeln!(s, "embed_dim={}", t.embed_dim);
        let _ = writeln!(s, "clip_norm={:?}", t.clip_norm);
        s
    }

    /// Resolves defaults < model run config < config file < flags. The model
    /// layer is only consulted when `use_model` is set and a model directory
    /// is named by the file or the flags; its `out`, `model` and `eval_split` keys are ignored.
    pub fn resolve(file: Option<&Path>, flags: &[(String, String)], use_model: bool) -> Result<Self> {
        let file_pairs = match file {
            Some(p) => read_pairs(p)?,
            None => Vec::new(),
        };
        let mut cfg = RunConfig::default();
        if use_model {
            let model = flags
                .iter()
                .chain(&file_pairs)
                .find(|(k, _)| k == "model")
                .and_then(|(_, v)| opt_path(v));
            if let Some(dir) = model {
                let inherited: Pairs = read_pairs(&dir.join(CONFIG_FILE))?
                    .into_iter()
                    .filter(|(k, _)| !matches!(k.as_str(), "out" | "model" | "eval_split"))
                    .collect();
                cfg.apply(&inherited)?;
            }
        }
        cfg.apply(&file_pairs)?;
        cfg.apply(flags)?;
        cfg.train.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Pairs {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn materialized_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.apply(&pairs(&[
            ("data", "x.csv"),
            ("task", "sentiment"),
            ("dropout_rate", "0.25"),
        ]))
        .unwrap();
        let text = cfg.materialize();
        let mut back = RunConfig::default();
        back.apply(&parse_pairs(&text, "t").unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.materialize(), text);
    }

    #[test]
    fn flags_win_over_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.txt");
        std::fs::write(&file, "# comment\nseed = 7\nepochs=3\n\n").unwrap();
        let cfg = RunConfig::resolve(Some(&file), &pairs(&[("seed", "9")]), false).unwrap();
        assert_eq!(cfg.train.seed, 9);
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.train.cell_size, 256);
    }

    #[test]
    fn model_layer_sits_below_file_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(CONFIG_FILE), "cell_size=8\nepochs=2\nout=elsewhere\n").unwrap();
        let flags = pairs(&[("model", dir.path().to_str().unwrap()), ("epochs", "5")]);
        let cfg = RunConfig::resolve(None, &flags, true).unwrap();
        assert_eq!((cfg.train.cell_size, cfg.train.epochs), (8, 5));
        assert_eq!(cfg.out, PathBuf::from("runs"));
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(parse_pairs("novalue", "t").is_err());
        let mut cfg = RunConfig::default();
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("epochs", "many").is_err());
        assert!(cfg.set("task", "regression").is_err());
        let flags = pairs(&[("dropout_rate", "1.5")]);
        assert!(RunConfig::resolve(None, &flags, false).is_err());
    }
}
