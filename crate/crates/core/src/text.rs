//! Review text cleaning, tokenization, vocabulary, fixed-length encoding and
//! GloVe embedding loading.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

pub const PAD: usize = 0;
pub const OOV: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<oov>";

/// Lowercases, maps CR/LF and anything outside `[a-z0-9' ]` to spaces, then
/// collapses runs of spaces and trims.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars().flat_map(char::to_lowercase) {
        let keep = ch.is_ascii_lowercase() || ch.is_ascii_digit() || ch == '\'';
        if keep {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch);
        } else {
            pending_space = true;
        }
    }
    out
}

pub fn tokenize(clean: &str) -> Vec<String> {
    clean.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    frozen: bool,
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::new()
    }
}

impl Vocab {
    /// Empty, unfrozen vocabulary holding only PAD and OOV.
    pub fn new() -> Self {
        let tokens = vec![PAD_TOKEN.to_string(), OOV_TOKEN.to_string()];
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocab {
            tokens,
            index,
            frozen: false,
        }
    }

    pub fn insert(&mut self, token: &str) -> Result<usize> {
        if let Some(&i) = self.index.get(token) {
            return Ok(i);
        }
        if self.frozen {
            return Err(Error::InvalidArgument(format!(
                "vocabulary is frozen; cannot add `{token}`"
            )));
        }
        let i = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        Ok(i)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.get(token).unwrap_or(OOV)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// `token<TAB>index` lines in index order.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            let _ = writeln!(s, "{t}\t{i}");
        }
        s
    }

    /// Parses [`Vocab::to_tsv`] output; the result is frozen.
    pub fn from_tsv(text: &str, origin: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: n + 1,
                message,
            };
            let (tok, idx) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `token<TAB>index`".into()))?;
            let idx: usize = idx.parse().map_err(|_| parse_err(format!("bad index `{idx}`")))?;
            if idx != tokens.len() {
                return Err(parse_err(format!("index {idx} out of sequence")));
            }
            tokens.push(tok.to_string());
        }
        if tokens.len() < 2 || tokens[PAD] != PAD_TOKEN || tokens[OOV] != OOV_TOKEN {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: 1,
                message: "first two entries must be the PAD and OOV tokens".into(),
            });
        }
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocab {
            tokens,
            index,
            frozen: true,
        })
    }

    /// FNV-1a 64 over the TSV export; identifies the exact token→index map.
    pub fn hash(&self) -> u64 {
        fnv1a64(self.to_tsv().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Tokens with count ≥ `min_freq`, ranked by count descending then token
/// ascending, capped so the vocabulary (with PAD and OOV) has at most `max_size` entries.
pub fn build_vocab<S: AsRef<str>>(corpus: &[Vec<S>], min_freq: usize, max_size: usize) -> Result<Vocab> {
    if min_freq == 0 {
        return Err(Error::InvalidArgument("min_freq must be >= 1".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        for tok in doc {
            *counts.entry(tok.as_ref()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(t, c)| c >= min_freq && t != PAD_TOKEN && t != OOV_TOKEN)
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size.saturating_sub(2));
    let mut vocab = Vocab::new();
    for (t, _) in ranked {
        vocab.insert(t)?;
    }
    vocab.freeze();
    Ok(vocab)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedReview {
    pub indices: Vec<usize>,
    pub original_len: usize,
}

/// Maps tokens through `vocab`, keeps the first `len` and post-pads with PAD.
pub fn encode_pad<S: AsRef<str>>(tokens: &[S], vocab: &Vocab, len: usize) -> Result<EncodedReview> {
    if len == 0 {
        return Err(Error::InvalidArgument("sequence length must be >= 1".into()));
    }
    let mut indices: Vec<usize> = tokens.iter().take(len).map(|t| vocab.lookup(t.as_ref())).collect();
    indices.resize(len, PAD);
    Ok(EncodedReview {
        indices,
        original_len: tokens.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub table: Tensor,
    pub trainable: bool,
}

impl EmbeddingMatrix {
    /// Random rows on ±`scale`; PAD row zero.
    pub fn random(vocab_size: usize, dim: usize, rng: &mut SeededRng, scale: f64) -> Self {
        let mut table = Tensor::init_uniform(vocab_size, dim, rng, scale);
        if vocab_size > 0 {
            table.row_mut(PAD).fill(0.0);
        }
        EmbeddingMatrix { table, trainable: true }
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn vocab_size(&self) -> usize {
        self.table.rows()
    }

    pub fn row(&self, index: usize) -> &[f64] {
        self.table.row(index)
    }

    /// Restores the PAD row to zero.
    pub fn zero_pad_row(&mut self) {
        self.table.row_mut(PAD).fill(0.0);
    }
}

pub const GLOVE_UNKNOWN_SCALE: f64 = 0.25;

/// Reads GloVe text vectors (`token v1 … vd` per line) for the tokens in
/// `vocab`. Rows for tokens missing from the file, and the OOV row, are drawn
/// uniformly from ±0.25 with `rng`; PAD stays zero. The dimension is taken
/// from the first line and every later line must match it.
pub fn load_glove(path: &Path, vocab: &Vocab, rng: &mut SeededRng) -> Result<EmbeddingMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_glove(&text, &path.display().to_string(), vocab, rng)
}

pub fn parse_glove(text: &str, origin: &str, vocab: &Vocab, rng: &mut SeededRng) -> Result<EmbeddingMatrix> {
    let mut dim: Option<usize> = None;
    let mut found: HashMap<usize, Vec<f64>> = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: n + 1,
            message,
        };
        let mut parts = line.split(' ');
        let token = parts.next().unwrap_or_default();
        let values = parts
            .map(|v| v.parse::<f64>().map_err(|_| parse_err(format!("bad float `{v}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(parse_err("line has no vector components".into()));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(parse_err(format!("expected {d} components, found {}", values.len())));
            }
            _ => {}
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err("non-finite vector component".into()));
        }
        if let Some(idx) = vocab.get(token) {
            if idx != PAD && idx != OOV {
                found.entry(idx).or_insert(values);
            }
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse {
        path: origin.to_string(),
        line: 0,
        message: "no vectors in file".into(),
    })?;
    let mut emb = EmbeddingMatrix::random(vocab.len(), dim, rng, GLOVE_UNKNOWN_SCALE);
    for (idx, values) in found {
        emb.table.row_mut(idx).copy_from_slice(&values);
    }
    Ok(emb)
}

/// One `(dim, 1)` column per position; PAD positions are zero vectors.
pub fn embed(encoded: &EncodedReview, emb: &EmbeddingMatrix) -> Result<Vec<Tensor>> {
    embed_batch(std::slice::from_ref(encoded), emb)
}

/// Embeds a batch of equal-length encodings into per-step `(dim, batch)` tensors.
pub fn embed_batch(batch: &[EncodedReview], emb: &EmbeddingMatrix) -> Result<Vec<Tensor>> {
    let len = batch.first().map_or(0, |e| e.indices.len());
    let dim = emb.dim();
    let b = batch.len();
    let mut steps = vec![Tensor::zeros(dim, b); len];
    for (col, enc) in batch.iter().enumerate() {
        if enc.indices.len() != len {
            return Err(Error::InvalidArgument("batch encodings differ in length".into()));
        }
        for (t, &idx) in enc.indices.iter().enumerate() {
            if idx >= emb.vocab_size() {
                return Err(Error::InvalidArgument(format!(
                    "token index {idx} out of range for vocabulary of {}",
                    emb.vocab_size()
                )));
            }
            for (d, &v) in emb.row(idx).iter().enumerate() {
                steps[t].set(d, col, v);
            }
        }
    }
    Ok(steps)
}
