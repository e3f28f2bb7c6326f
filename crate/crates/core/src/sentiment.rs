//! Lexicon-based compound sentiment scoring and dataset auto-labeling.
//!
//! Each lexicon hit contributes its valence. A booster directly before the hit
//! moves the valence away from zero by the booster's increment; a negator in
//! the three preceding tokens then multiplies it by −0.74. The sum `s` is
//! squashed to `s / √(s² + 15)`, and the label uses ±0.05 thresholds.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::data::ReviewRecord;
use crate::error::{Error, Result};
use crate::text::{clean_text, tokenize};

pub const NEGATION_FACTOR: f64 = -0.74;
pub const NEGATION_WINDOW: usize = 3;
pub const NORMALIZATION_ALPHA: f64 = 15.0;
pub const LABEL_THRESHOLD: f64 = 0.05;
pub const VALENCE_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
        SentimentLabel::Positive,
    ];

    /// Class index used by the classifier: 0 negative, 1 neutral, 2 positive.
    pub fn class_index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Positive => "positive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "negative" => Some(SentimentLabel::Negative),
            "neutral" => Some(SentimentLabel::Neutral),
            "positive" => Some(SentimentLabel::Positive),
            _ => None,
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SentimentScore {
    pub compound: f64,
    pub label: SentimentLabel,
}

/// Scoring constants; the defaults are the module constants above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringParams {
    pub negation_factor: f64,
    pub negation_window: usize,
    pub alpha: f64,
    pub threshold: f64,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            negation_factor: NEGATION_FACTOR,
            negation_window: NEGATION_WINDOW,
            alpha: NORMALIZATION_ALPHA,
            threshold: LABEL_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
    negators: HashSet<String>,
    boosters: HashMap<String, f64>,
    pub params: ScoringParams,
}

const DEFAULT_NEGATORS: &[&str] = &[
    "not",
    "no",
    "never",
    "none",
    "nor",
    "nothing",
    "nobody",
    "neither",
    "without",
    "don't",
    "doesn't",
    "didn't",
    "isn't",
    "wasn't",
    "aren't",
    "weren't",
    "can't",
    "cannot",
    "couldn't",
    "won't",
    "wouldn't",
    "shouldn't",
    "hasn't",
    "haven't",
];

const DEFAULT_BOOSTERS: &[(&str, f64)] = &[
    ("very", 0.293),
    ("really", 0.293),
    ("extremely", 0.293),
    ("so", 0.293),
    ("absolutely", 0.293),
    ("totally", 0.293),
    ("super", 0.293),
    ("incredibly", 0.293),
    ("slightly", -0.293),
    ("somewhat", -0.293),
    ("barely", -0.293),
    ("kinda", -0.293),
];

/// Built-in test lexicon: VADER-style valences for common review vocabulary.
const BUILTIN_VALENCES: &[(&str, f64)] = &[
    ("good", 1.9),
    ("great", 3.1),
    ("love", 3.2),
    ("loved", 2.9),
    ("beautiful", 2.9),
    ("perfect", 2.7),
    ("nice", 1.8),
    ("comfortable", 1.5),
    ("happy", 2.7),
    ("excellent", 2.7),
    ("amazing", 2.8),
    ("cute", 2.0),
    ("lovely", 2.8),
    ("pretty", 2.2),
    ("gorgeous", 3.0),
    ("soft", 1.0),
    ("flattering", 1.6),
    ("fantastic", 2.6),
    ("best", 3.2),
    ("glad", 2.0),
    ("recommend", 1.5),
    ("bad", -2.5),
    ("poor", -2.1),
    ("terrible", -2.1),
    ("awful", -2.0),
    ("disappointed", -1.9),
    ("disappointing", -2.2),
    ("ugly", -2.3),
    ("cheap", -0.8),
    ("hate", -2.7),
    ("worst", -3.1),
    ("horrible", -2.5),
    ("wrong", -2.1),
    ("unfortunately", -1.6),
    ("itchy", -1.2),
    ("sadly", -1.9),
    ("sad", -2.1),
    ("problem", -1.7),
    ("returned", -0.6),
    ("returning", -0.6),
    ("scratchy", -1.0),
    ("uncomfortable", -1.6),
];

impl Lexicon {
    pub fn new(valences: HashMap<String, f64>) -> Result<Self> {
        for (t, &v) in &valences {
            if !(-VALENCE_LIMIT..=VALENCE_LIMIT).contains(&v) {
                return Err(Error::InvalidArgument(format!("valence {v} for `{t}` outside [-4, 4]")));
            }
        }
        Ok(Lexicon {
            valences,
            negators: DEFAULT_NEGATORS.iter().map(|s| s.to_string()).collect(),
            boosters: DEFAULT_BOOSTERS.iter().map(|&(s, v)| (s.to_string(), v)).collect(),
            params: ScoringParams::default(),
        })
    }

    pub fn builtin() -> Self {
        Lexicon::new(BUILTIN_VALENCES.iter().map(|&(t, v)| (t.to_string(), v)).collect())
            .expect("built-in valences are in range")
    }

    pub fn with_modifiers(mut self, negators: HashSet<String>, boosters: HashMap<String, f64>) -> Result<Self> {
        if let Some(t) = negators.iter().find(|t| boosters.contains_key(*t)) {
            return Err(Error::InvalidArgument(format!("`{t}` is both a negator and a booster")));
        }
        self.negators = negators;
        self.boosters = boosters;
        Ok(self)
    }

    /// Parses `token<TAB>valence` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut valences = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: n + 1,
                message,
            };
            let (tok, val) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `token<TAB>valence`".into()))?;
            let v: f64 = val
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad valence `{val}`")))?;
            if !(-VALENCE_LIMIT..=VALENCE_LIMIT).contains(&v) {
                return Err(parse_err(format!("valence {v} outside [-4, 4]")));
            }
            valences.insert(tok.trim().to_string(), v);
        }
        Lexicon::new(valences)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lexicon::parse(&text, &path.display().to_string())
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn booster(&self, token: &str) -> Option<f64> {
        self.boosters.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

pub fn compound_from_sum(s: f64, alpha: f64) -> f64 {
    s / (s * s + alpha).sqrt()
}

pub fn label_from_compound(c: f64) -> SentimentLabel {
    label_with_threshold(c, LABEL_THRESHOLD)
}

pub fn label_with_threshold(c: f64, threshold: f64) -> SentimentLabel {
    if c >= threshold {
        SentimentLabel::Positive
    } else if c <= -threshold {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    }
}

/// Sum of adjusted valences before normalization.
pub fn valence_sum<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> f64 {
    let p = &lexicon.params;
    let mut s = 0.0;
    for (k, tok) in tokens.iter().enumerate() {
        let Some(mut v) = lexicon.valence(tok.as_ref()) else {
            continue;
        };
        if k > 0 {
            if let Some(inc) = lexicon.booster(tokens[k - 1].as_ref()) {
                v += inc * v.signum();
            }
        }
        let window = &tokens[k.saturating_sub(p.negation_window)..k];
        if window.iter().any(|t| lexicon.is_negator(t.as_ref())) {
            v *= p.negation_factor;
        }
        s += v;
    }
    s
}

pub fn score_text<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> SentimentScore {
    let s = valence_sum(tokens, lexicon);
    let compound = compound_from_sum(s, lexicon.params.alpha);
    SentimentScore {
        compound,
        label: label_with_threshold(compound, lexicon.params.threshold),
    }
}

/// Labels a raw review text; absent text scores as empty.
pub fn score_review(text: Option<&str>, lexicon: &Lexicon) -> SentimentScore {
    let tokens = tokenize(&clean_text(text.unwrap_or("")));
    score_text(&tokens, lexicon)
}

/// Binary rating-threshold labels: positive when the rating exceeds the
/// threshold (or equals it, when `inclusive`), negative otherwise.
pub fn label_by_rating(rating: u8, threshold: u8, inclusive: bool) -> SentimentLabel {
    let positive = if inclusive {
        rating >= threshold
    } else {
        rating > threshold
    };
    if positive {
        SentimentLabel::Positive
    } else {
        SentimentLabel::Negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledDataset {
    pub scores: Vec<SentimentScore>,
    /// `(recommended, label) → count`.
    pub counts: BTreeMap<(bool, SentimentLabel), usize>,
}

impl LabeledDataset {
    /// Rows `recommended ∈ {0, 1}` × columns negative/neutral/positive.
    pub fn count_table(&self) -> Vec<(bool, [usize; 3])> {
        [false, true]
            .into_iter()
            .map(|rec| {
                let mut row = [0; 3];
                for l in SentimentLabel::ALL {
                    row[l.class_index()] = self.counts.get(&(rec, l)).copied().unwrap_or(0);
                }
                (rec, row)
            })
            .collect()
    }
}

pub fn auto_label_dataset(records: &[ReviewRecord], lexicon: &Lexicon) -> LabeledDataset {
    let scores: Vec<SentimentScore> = records
        .iter()
        .map(|r| score_review(r.review_text.as_deref(), lexicon))
        .collect();
    let mut counts = BTreeMap::new();
    for (r, s) in records.iter().zip(&scores) {
        *counts.entry((r.recommended, s.label)).or_insert(0) += 1;
    }
    LabeledDataset { scores, counts }
}
