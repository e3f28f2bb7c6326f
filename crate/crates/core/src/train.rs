//! Training loop, evaluation, inference and the majority-class baseline.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::data::ReviewRecord;
use crate::error::{Error, Result};
use crate::metrics::{roc_auc, ConfusionMatrix, MetricsReport};
use crate::nn::adam::{adam_step, AdamState};
use crate::nn::checkpoint::Checkpoint;
use crate::nn::loss::batch_cross_entropy;
use crate::nn::model::{block_names, BiLstmClassifier};
use crate::rng::SeededRng;
use crate::sentiment::SentimentLabel;
use crate::tensor::Tensor;
use crate::text::{clean_text, embed_batch, encode_pad, fnv1a64, tokenize, EmbeddingMatrix, EncodedReview, Vocab, PAD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Recommendation,
    Sentiment,
}

impl Task {
    pub fn n_classes(self) -> usize {
        match self {
            Task::Recommendation => 2,
            Task::Sentiment => 3,
        }
    }

    pub fn class_names(self) -> Vec<String> {
        let names: &[&str] = match self {
            Task::Recommendation => &["not_recommended", "recommended"],
            Task::Sentiment => &["negative", "neutral", "positive"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Recommendation => "recommendation",
            Task::Sentiment => "sentiment",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recommendation" => Ok(Task::Recommendation),
            "sentiment" => Ok(Task::Sentiment),
            other => Err(Error::InvalidArgument(format!(
                "unknown task `{other}` (expected recommendation|sentiment)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub task: Task,
    pub batch_size: usize,
    pub cell_size: usize,
    pub dropout_rate: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seq_len: usize,
    pub vocab_cap: usize,
    pub min_freq: usize,
    pub embed_dim: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            task: Task::Recommendation,
            batch_size: 256,
            cell_size: 256,
            dropout_rate: 0.50,
            epochs: 32,
            learning_rate: 1e-3,
            seq_len: 120,
            vocab_cap: 20_000,
            min_freq: 2,
            embed_dim: 50,
            clip_norm: 5.0,
            seed: 42,
        }
    }
}

/// Largest number of sequences pushed through the network at once; a batch
/// larger than this is processed in chunks and the gradients summed.
pub const MICRO_BATCH: usize = 64;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("batch_size", self.batch_size),
            ("cell_size", self.cell_size),
            ("seq_len", self.seq_len),
            ("vocab_cap", self.vocab_cap),
            ("min_freq", self.min_freq),
            ("embed_dim", self.embed_dim),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout_rate {} not in [0, 1)",
                self.dropout_rate
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::InvalidArgument("clip_norm must be positive".into()));
        }
        Ok(())
    }

    /// Hash of the settings that determine parameter shapes and input encoding.
    pub fn fingerprint(&self) -> u64 {
        let s = format!(
            "task={};cell_size={};seq_len={};embed_dim={};n_classes={}",
            self.task,
            self.cell_size,
            self.seq_len,
            self.embed_dim,
            self.task.n_classes()
        );
        fnv1a64(s.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub encoded: EncodedReview,
    pub target: usize,
}

/// Class index of a record for `task`. Sentiment needs the record's label.
pub fn target_for(task: Task, record: &ReviewRecord, sentiment: Option<SentimentLabel>) -> Result<usize> {
    match task {
        Task::Recommendation => Ok(usize::from(record.recommended)),
        Task::Sentiment => sentiment
            .map(SentimentLabel::class_index)
            .ok_or_else(|| Error::InvalidArgument(format!("record {} has no sentiment label", record.row_id))),
    }
}

pub fn review_tokens(record: &ReviewRecord) -> Vec<String> {
    tokenize(&clean_text(record.review_text.as_deref().unwrap_or("")))
}

pub fn encode_text(text: &str, vocab: &Vocab, seq_len: usize) -> Result<EncodedReview> {
    encode_pad(&tokenize(&clean_text(text)), vocab, seq_len)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

pub fn history_csv(history: &[EpochStats]) -> String {
    let mut s = String::from("epoch,train_loss,val_loss,val_acc\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for h in history {
        s.push_str(&format!(
            "{},{},{},{}\n",
            h.epoch,
            h.train_loss,
            opt(h.val_loss),
            opt(h.val_acc)
        ));
    }
    s
}

/// A classifier together with the embedding table it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: TrainConfig,
    pub model: BiLstmClassifier,
    pub embeddings: EmbeddingMatrix,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub trained: TrainedModel,
    pub history: Vec<EpochStats>,
    /// Global gradient norm of every optimizer step, before clipping.
    pub grad_norms: Vec<f64>,
}

struct BatchGrads {
    model: crate::nn::model::ModelGrads,
    embedding: Tensor,
    loss: f64,
}

fn batch_gradients(
    model: &BiLstmClassifier,
    emb: &EmbeddingMatrix,
    batch: &[&Example],
    dropout_rate: f64,
    rng: &mut SeededRng,
) -> Result<BatchGrads> {
    let mut grads = model.zero_grads();
    let mut emb_grad = Tensor::zeros(emb.vocab_size(), emb.dim());
    let mut loss = 0.0;
    let total = batch.len() as f64;
    for chunk in batch.chunks(MICRO_BATCH) {
        let encs: Vec<EncodedReview> = chunk.iter().map(|e| e.encoded.clone()).collect();
        let targets: Vec<usize> = chunk.iter().map(|e| e.target).collect();
        let xs = embed_batch(&encs, emb)?;
        let pass = model.forward(&xs, dropout_rate, Some(rng))?;
        let (chunk_loss, d_logits) = batch_cross_entropy(&pass.probs, &targets)?;
        let weight = chunk.len() as f64 / total;
        loss += chunk_loss * weight;
        let (g, dxs) = model.backward(&pass, &d_logits.scale(weight))?;
        grads.add_assign(&g)?;
        if emb.trainable {
            for (t, dx) in dxs.iter().enumerate() {
                for (col, enc) in encs.iter().enumerate() {
                    let idx = enc.indices[t];
                    if idx == PAD {
                        continue;
                    }
                    let row = emb_grad.row_mut(idx);
                    for (d, r) in row.iter_mut().enumerate() {
                        *r += dx.get(d, col);
                    }
                }
            }
        }
    }
    Ok(BatchGrads {
        model: grads,
        embedding: emb_grad,
        loss,
    })
}

/// Mini-batch Adam training with per-epoch shuffling, dropout on the BiLSTM
/// output and global-norm gradient clipping. Returns the final-epoch model.
pub fn train(
    config: &TrainConfig,
    train_set: &[Example],
    validation: &[Example],
    embeddings: EmbeddingMatrix,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training split"));
    }
    if embeddings.dim() != config.embed_dim {
        return Err(Error::InvalidArgument(format!(
            "embedding dimension {} does not match config embed_dim {}",
            embeddings.dim(),
            config.embed_dim
        )));
    }
    for e in train_set.iter().chain(validation) {
        if e.encoded.indices.len() != config.seq_len {
            return Err(Error::InvalidArgument(format!(
                "encoded length {} does not match seq_len {}",
                e.encoded.indices.len(),
                config.seq_len
            )));
        }
        if e.target >= config.task.n_classes() {
            return Err(Error::InvalidArgument(format!("target {} out of range", e.target)));
        }
    }

    let mut rng = SeededRng::new(config.seed);
    let mut model = BiLstmClassifier::init(config.embed_dim, config.cell_size, config.task.n_classes(), &mut rng)?;
    let mut emb = embeddings;
    emb.zero_pad_row();
    let mut shapes: Vec<(usize, usize)> = model.blocks().iter().map(|t| t.shape()).collect();
    shapes.push(emb.table.shape());
    let mut adam = AdamState::new(&shapes);

    let mut history = Vec::with_capacity(config.epochs);
    let mut grad_norms = Vec::new();
    for epoch in 1..=config.epochs {
        let mut epoch_rng = rng.fork();
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        epoch_rng.shuffle(&mut order);
        for batch_idx in order.chunks(config.batch_size) {
            let batch: Vec<&Example> = batch_idx.iter().map(|&i| &train_set[i]).collect();
            let mut g = batch_gradients(&model, &emb, &batch, config.dropout_rate, &mut epoch_rng)?;
            if !g.loss.is_finite() {
                return Err(Error::Contract(format!("non-finite training loss in epoch {epoch}")));
            }

            let norm = (g.model.global_norm().powi(2) + g.embedding.norm_sq()).sqrt();
            grad_norms.push(norm);
            if !norm.is_finite() {
                return Err(Error::Contract(format!("non-finite gradient norm in epoch {epoch}")));
            }
            if norm > config.clip_norm {
                let s = config.clip_norm / norm;
                g.model.scale_in_place(s);
                g.embedding = g.embedding.scale(s);
            }
            let mut params = model.blocks_mut();
            params.push(&mut emb.table);
            let mut grads = g.model.blocks();
            grads.push(&g.embedding);
            adam_step(&mut params, &grads, &mut adam, config.learning_rate)?;
            emb.zero_pad_row();
        }
        // Inference-mode loss over the whole split, so the curve is not
        // blurred by dropout noise and is comparable with val_loss.
        let (train_loss, _) = predict_examples(&model, &emb, train_set)?;
        let (val_loss, val_acc) = if validation.is_empty() {
            (None, None)
        } else {
            let (loss, preds) = predict_examples(&model, &emb, validation)?;
            let correct = preds
                .iter()
                .zip(validation)
                .filter(|(p, e)| p.argmax == e.target)
                .count();
            (Some(loss), Some(correct as f64 / validation.len() as f64))
        };
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            val_acc,
        });
    }
    Ok(TrainOutcome {
        trained: TrainedModel {
            config: config.clone(),
            model,
            embeddings: emb,
        },
        history,
        grad_norms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExamplePrediction {
    pub argmax: usize,
    pub probabilities: Vec<f64>,
}

/// Inference-mode predictions and mean cross-entropy.
pub fn predict_examples(
    model: &BiLstmClassifier,
    emb: &EmbeddingMatrix,
    examples: &[Example],
) -> Result<(f64, Vec<ExamplePrediction>)> {
    let mut preds = Vec::with_capacity(examples.len());
    let mut loss = 0.0;
    for chunk in examples.chunks(MICRO_BATCH) {
        let encs: Vec<EncodedReview> = chunk.iter().map(|e| e.encoded.clone()).collect();
        let targets: Vec<usize> = chunk.iter().map(|e| e.target).collect();
        let probs = model.predict_proba(&embed_batch(&encs, emb)?)?;
        let (l, _) = batch_cross_entropy(&probs, &targets)?;
        loss += l * chunk.len() as f64;
        for (c, argmax) in probs.argmax_cols().into_iter().enumerate() {
            preds.push(ExamplePrediction {
                argmax,
                probabilities: probs.col(c),
            });
        }
    }
    Ok((loss / examples.len().max(1) as f64, preds))
}

/// Full metrics report on `examples`; binary tasks also get a ROC curve
/// scored by the probability of class 1.
pub fn evaluate(trained: &TrainedModel, examples: &[Example]) -> Result<MetricsReport> {
    if examples.is_empty() {
        return Err(Error::Empty("evaluation split"));
    }
    let (loss, preds) = predict_examples(&trained.model, &trained.embeddings, examples)?;
    let truth: Vec<usize> = examples.iter().map(|e| e.target).collect();
    let predicted: Vec<usize> = preds.iter().map(|p| p.argmax).collect();
    let task = trained.config.task;
    let cm = ConfusionMatrix::from_predictions(&truth, &predicted, task.n_classes())?;
    let mut report = MetricsReport::from_confusion(cm, task.class_names(), Some(loss));
    if task.n_classes() == 2 {
        let labels: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        let scores: Vec<f64> = preds.iter().map(|p| p.probabilities[1]).collect();
        report.roc = roc_auc(&labels, &scores).ok();
    }
    Ok(report)
}

/// Predicts the most frequent training class (lowest index on ties) for every example.
pub fn majority_baseline(
    train_targets: &[usize],
    eval_targets: &[usize],
    class_names: &[String],
) -> Result<MetricsReport> {
    if train_targets.is_empty() {
        return Err(Error::Empty("baseline training split"));
    }
    if eval_targets.is_empty() {
        return Err(Error::Empty("baseline evaluation split"));
    }
    let k = class_names.len();
    let mut counts = vec![0usize; k];
    for &t in train_targets {
        *counts
            .get_mut(t)
            .ok_or_else(|| Error::InvalidArgument(format!("class {t} out of range")))? += 1;
    }
    let mode = (0..k).fold(0, |best, c| if counts[c] > counts[best] { c } else { best });
    let predicted = vec![mode; eval_targets.len()];
    let cm = ConfusionMatrix::from_predictions(eval_targets, &predicted, k)?;
    Ok(MetricsReport::from_confusion(cm, class_names.to_vec(), None))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub label: String,
    pub class_index: usize,
    pub probabilities: Vec<f64>,
    pub empty_input: bool,
}

pub fn predict(trained: &TrainedModel, vocab: &Vocab, text: &str) -> Result<Prediction> {
    if vocab.len() != trained.embeddings.vocab_size() {
        return Err(Error::Fingerprint(format!(
            "vocabulary has {} entries but the embedding table has {}",
            vocab.len(),
            trained.embeddings.vocab_size()
        )));
    }
    let enc = encode_text(text, vocab, trained.config.seq_len)?;
    let empty_input = enc.original_len == 0;
    let probs = trained
        .model
        .predict_proba(&embed_batch(&[enc], &trained.embeddings)?)?;
    let probabilities = probs.col(0);
    let class_index = probs.argmax_cols()[0];
    Ok(Prediction {
        label: trained.config.task.class_names()[class_index].clone(),
        class_index,
        probabilities,
        empty_input,
    })
}

pub const EMBEDDING_BLOCK: &str = "embedding";

impl TrainedModel {
    pub fn to_checkpoint(&self, vocab: &Vocab) -> Checkpoint {
        let mut blocks: Vec<(String, Tensor)> = block_names()
            .into_iter()
            .zip(self.model.blocks().into_iter().cloned())
            .collect();
        blocks.push((EMBEDDING_BLOCK.to_string(), self.embeddings.table.clone()));
        Checkpoint {
            config_fingerprint: self.config.fingerprint(),
            vocab_hash: vocab.hash(),
            blocks,
        }
    }

    /// Rebuilds a model, checking the checkpoint against `config` and `vocab`.
    pub fn from_checkpoint(ck: &Checkpoint, config: &TrainConfig, vocab: &Vocab) -> Result<Self> {
        if ck.config_fingerprint != config.fingerprint() {
            return Err(Error::Fingerprint(format!(
                "checkpoint config fingerprint {:016x} != {:016x}",
                ck.config_fingerprint,
                config.fingerprint()
            )));
        }
        if ck.vocab_hash != vocab.hash() {
            return Err(Error::Fingerprint(format!(
                "checkpoint vocabulary hash {:016x} != {:016x}",
                ck.vocab_hash,
                vocab.hash()
            )));
        }
        let names = block_names();
        let mut blocks = Vec::with_capacity(names.len());
        for n in &names {
            blocks.push(
                ck.block(n)
                    .cloned()
                    .ok_or_else(|| Error::Contract(format!("checkpoint lacks block `{n}`")))?,
            );
        }
        let model = BiLstmClassifier::from_blocks(blocks)?;
        let table = ck
            .block(EMBEDDING_BLOCK)
            .cloned()
            .ok_or_else(|| Error::Contract("checkpoint lacks the embedding table".into()))?;
        if table.shape() != (vocab.len(), config.embed_dim) || model.input_size() != config.embed_dim {
            return Err(Error::Fingerprint(
                "embedding table shape disagrees with config/vocab".into(),
            ));
        }
        Ok(TrainedModel {
            config: config.clone(),
            model,
            embeddings: EmbeddingMatrix { table, trainable: true },
        })
    }

    pub fn save(&self, path: &Path, vocab: &Vocab) -> Result<()> {
        self.to_checkpoint(vocab).write(path)
    }

    pub fn load(path: &Path, config: &TrainConfig, vocab: &Vocab) -> Result<Self> {
        TrainedModel::from_checkpoint(&Checkpoint::read(path)?, config, vocab)
    }
}

/// Forty short reviews whose label is decided by a single keyword: "good"
/// templates are recommended (1), "bad" templates are not (0).
pub fn keyword_fixture() -> Vec<(String, usize)> {
    const FRAMES: [&str; 10] = [
        "this dress is {}",
        "the fit was {}",
        "{} fabric overall",
        "really {} quality",
        "color looks {} in person",
        "such a {} purchase",
        "{}",
        "the sizing felt {} to me",
        "{} top for summer",
        "overall a {} buy",
    ];
    let mut out = Vec::with_capacity(40);
    for frame in FRAMES {
        for (word, label) in [("good", 1), ("bad", 0), ("very good", 1), ("very bad", 0)] {
            out.push((frame.replace("{}", word), label));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::build_vocab;

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            cell_size: 3,
            epochs: 2,
            seq_len: 4,
            embed_dim: 3,
            dropout_rate: 0.5,
            learning_rate: 1e-2,
            ..TrainConfig::default()
        }
    }

    fn tiny_data(vocab: &Vocab) -> Vec<Example> {
        [
            "good dress",
            "bad fit",
            "good good",
            "bad",
            "love it good",
            "bad bad bad",
        ]
        .iter()
        .enumerate()
        .map(|(k, t)| Example {
            encoded: encode_text(t, vocab, 4).unwrap(),
            target: usize::from(k % 2 == 0),
        })
        .collect()
    }

    fn vocab() -> Vocab {
        let corpus = vec![tokenize("good dress bad fit love it")];
        build_vocab(&corpus, 1, 100).unwrap()
    }

    #[test]
    fn defaults_match_hyperparameter_table() {
        let c = TrainConfig::default();
        assert_eq!((c.batch_size, c.cell_size, c.epochs), (256, 256, 32));
        assert_eq!(c.dropout_rate, 0.50);
        assert_eq!(c.learning_rate, 1e-3);
        c.validate().unwrap();
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let v = vocab();
        let cfg = TrainConfig {
            epochs: 0,
            ..tiny_config()
        };
        let emb = EmbeddingMatrix::random(v.len(), 3, &mut SeededRng::new(1), 0.25);
        let out = train(&cfg, &tiny_data(&v), &[], emb.clone()).unwrap();
        assert!(out.history.is_empty());
        let init = BiLstmClassifier::init(3, 3, 2, &mut SeededRng::new(cfg.seed)).unwrap();
        assert_eq!(out.trained.model, init);
        assert_eq!(out.trained.embeddings, emb);
    }

    #[test]
    fn training_is_deterministic() {
        let v = vocab();
        let data = tiny_data(&v);
        let run = || {
            let emb = EmbeddingMatrix::random(v.len(), 3, &mut SeededRng::new(1), 0.25);
            train(&tiny_config(), &data, &data[..2], emb).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.history, b.history);
        assert_eq!(a.trained, b.trained);
        assert_eq!(a.trained.embeddings.row(PAD), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn train_errors() {
        let v = vocab();
        let emb = EmbeddingMatrix::random(v.len(), 3, &mut SeededRng::new(1), 0.25);
        assert!(train(&tiny_config(), &[], &[], emb.clone()).is_err());
        let wrong_dim = EmbeddingMatrix::random(v.len(), 5, &mut SeededRng::new(1), 0.25);
        assert!(train(&tiny_config(), &tiny_data(&v), &[], wrong_dim).is_err());
        let bad = TrainConfig {
            dropout_rate: 1.0,
            ..tiny_config()
        };
        assert!(train(&bad, &tiny_data(&v), &[], emb).is_err());
    }

    #[test]
    fn evaluation_and_prediction() {
        let v = vocab();
        let data = tiny_data(&v);
        let emb = EmbeddingMatrix::random(v.len(), 3, &mut SeededRng::new(1), 0.25);
        let out = train(&tiny_config(), &data, &[], emb).unwrap();
        let report = evaluate(&out.trained, &data).unwrap();
        assert_eq!(report.confusion.total(), data.len() as u64);
        assert_eq!(report.weighted.support, data.len() as u64);
        let acc = report.confusion.trace() as f64 / report.confusion.total() as f64;
        assert_eq!(report.accuracy, acc);
        assert!(report.roc.is_some());
        assert!(evaluate(&out.trained, &[]).is_err());

        let p = predict(&out.trained, &v, "").unwrap();
        assert!(p.empty_input);
        assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q = predict(&out.trained, &v, "Good dress!").unwrap();
        assert_eq!(q, predict(&out.trained, &v, "Good dress!").unwrap());
        assert!(!q.empty_input);
    }

    #[test]
    fn perfect_predictions_give_diagonal_report() {
        let cm = ConfusionMatrix::from_predictions(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        let r = MetricsReport::from_confusion(cm, Task::Sentiment.class_names(), None);
        assert_eq!(r.accuracy, 1.0);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(r.confusion.counts[i][j], 0);
                }
            }
        }
    }

    #[test]
    fn baseline_cases() {
        let names = Task::Recommendation.class_names();
        let balanced = majority_baseline(&[0, 1, 1, 0], &[0, 1, 0, 1], &names).unwrap();
        assert_eq!(balanced.accuracy, 0.5);
        let single = majority_baseline(&[1, 1], &[1, 1, 1], &names).unwrap();
        assert_eq!(single.per_class[1].recall, 1.0);
        assert_eq!(single.per_class[0].precision, 0.0);
        assert!(single.per_class[0].degenerate);
        assert!(majority_baseline(&[], &[1], &names).is_err());
        assert!(majority_baseline(&[1], &[], &names).is_err());
    }

    #[test]
    fn checkpoint_round_trip_and_fingerprints() {
        let v = vocab();
        let emb = EmbeddingMatrix::random(v.len(), 3, &mut SeededRng::new(1), 0.25);
        let out = train(&tiny_config(), &tiny_data(&v), &[], emb).unwrap();
        let ck = out.trained.to_checkpoint(&v);
        let back = TrainedModel::from_checkpoint(&ck, &tiny_config(), &v).unwrap();
        assert_eq!(back, out.trained);

        let other_cfg = TrainConfig {
            cell_size: 4,
            ..tiny_config()
        };
        assert!(matches!(
            TrainedModel::from_checkpoint(&ck, &other_cfg, &v),
            Err(Error::Fingerprint(_))
        ));
        let other_vocab = build_vocab(&[tokenize("good bad")], 1, 100).unwrap();
        assert!(matches!(
            TrainedModel::from_checkpoint(&ck, &tiny_config(), &other_vocab),
            Err(Error::Fingerprint(_))
        ));
    }

    #[test]
    fn keyword_fixture_is_learned_across_seeds() {
        let fx = keyword_fixture();
        assert_eq!(fx.len(), 40);
        assert_eq!(fx.iter().filter(|(_, l)| *l == 1).count(), 20);
        let corpus: Vec<Vec<String>> = fx.iter().map(|(t, _)| tokenize(&clean_text(t))).collect();
        let v = build_vocab(&corpus, 1, 1000).unwrap();
        let data: Vec<Example> = fx
            .iter()
            .map(|(t, l)| Example {
                encoded: encode_text(t, &v, 8).unwrap(),
                target: *l,
            })
            .collect();
        for seed in [1, 2, 3] {
            let cfg = TrainConfig {
                batch_size: 8,
                cell_size: 8,
                epochs: 30,
                seq_len: 8,
                seed,
                ..TrainConfig::default()
            };
            let emb = EmbeddingMatrix::random(v.len(), cfg.embed_dim, &mut SeededRng::new(seed + 100), 0.25);
            let out = train(&cfg, &data, &[], emb).unwrap();
            assert!(evaluate(&out.trained, &data).unwrap().accuracy >= 0.95, "seed {seed}");
            assert!(out
                .history
                .windows(2)
                .take(4)
                .all(|w| w[1].train_loss < w[0].train_loss));
        }
    }
}
