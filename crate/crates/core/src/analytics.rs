//! Descriptive statistics, frequency tables, cross-tabulations, grouped
//! correlations and word-frequency rankings over review records.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::data::{self, ReviewRecord};
use crate::error::{Error, Result};
use crate::text::{clean_text, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Feature {
    ClothingId,
    Age,
    Title,
    ReviewText,
    Rating,
    Recommended,
    PositiveFeedback,
    Division,
    Department,
    ClassName,
}

impl Feature {
    pub const ALL: [Feature; 10] = [
        Feature::ClothingId,
        Feature::Age,
        Feature::Title,
        Feature::ReviewText,
        Feature::Rating,
        Feature::Recommended,
        Feature::PositiveFeedback,
        Feature::Division,
        Feature::Department,
        Feature::ClassName,
    ];

    pub const NUMERIC: [Feature; 5] = [
        Feature::ClothingId,
        Feature::Age,
        Feature::Rating,
        Feature::Recommended,
        Feature::PositiveFeedback,
    ];

    /// Column name in the dataset header.
    pub fn column(self) -> &'static str {
        match self {
            Feature::ClothingId => data::COL_CLOTHING_ID,
            Feature::Age => data::COL_AGE,
            Feature::Title => data::COL_TITLE,
            Feature::ReviewText => data::COL_TEXT,
            Feature::Rating => data::COL_RATING,
            Feature::Recommended => data::COL_RECOMMENDED,
            Feature::PositiveFeedback => data::COL_FEEDBACK,
            Feature::Division => data::COL_DIVISION,
            Feature::Department => data::COL_DEPARTMENT,
            Feature::ClassName => data::COL_CLASS,
        }
    }

    /// Short identifier used in file names.
    pub fn slug(self) -> &'static str {
        match self {
            Feature::ClothingId => "clothing_id",
            Feature::Age => "age",
            Feature::Title => "title",
            Feature::ReviewText => "review_text",
            Feature::Rating => "rating",
            Feature::Recommended => "recommended",
            Feature::PositiveFeedback => "positive_feedback",
            Feature::Division => "division",
            Feature::Department => "department",
            Feature::ClassName => "class_name",
        }
    }

    pub fn value(self, r: &ReviewRecord) -> Option<String> {
        match self {
            Feature::ClothingId => Some(r.clothing_id.to_string()),
            Feature::Age => Some(r.age.to_string()),
            Feature::Title => r.title.clone(),
            Feature::ReviewText => r.review_text.clone(),
            Feature::Rating => Some(r.rating.to_string()),
            Feature::Recommended => Some(u8::from(r.recommended).to_string()),
            Feature::PositiveFeedback => Some(r.positive_feedback_count.to_string()),
            Feature::Division => r.division.clone(),
            Feature::Department => r.department.clone(),
            Feature::ClassName => r.class_name.clone(),
        }
    }

    pub fn numeric(self, r: &ReviewRecord) -> Option<f64> {
        match self {
            Feature::ClothingId => Some(r.clothing_id as f64),
            Feature::Age => Some(r.age as f64),
            Feature::Rating => Some(r.rating as f64),
            Feature::Recommended => Some(if r.recommended { 1.0 } else { 0.0 }),
            Feature::PositiveFeedback => Some(r.positive_feedback_count as f64),
            _ => None,
        }
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.slug() == s || f.column() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub feature: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor n − 1); 0 when count is 1.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn describe_values(name: &str, values: &[f64]) -> Result<DescriptiveStats> {
    if values.is_empty() {
        return Err(Error::Empty("no non-missing values to describe"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std = if values.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
    Ok(DescriptiveStats {
        feature: name.to_string(),
        count: values.len(),
        mean,
        std,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

pub fn describe(records: &[ReviewRecord], feature: Feature) -> Result<DescriptiveStats> {
    if Feature::NUMERIC.iter().all(|&f| f != feature) {
        return Err(Error::InvalidArgument(format!("`{}` is not numeric", feature.column())));
    }
    let values: Vec<f64> = records.iter().filter_map(|r| feature.numeric(r)).collect();
    describe_values(feature.column(), &values)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniqueCount {
    pub feature: String,
    pub unique: usize,
}

/// Distinct non-missing values per feature, in column order.
pub fn unique_counts(records: &[ReviewRecord]) -> Vec<UniqueCount> {
    Feature::ALL
        .into_iter()
        .map(|f| {
            let distinct: HashSet<String> = records.iter().filter_map(|r| f.value(r)).collect();
            UniqueCount {
                feature: f.column().to_string(),
                unique: distinct.len(),
            }
        })
        .collect()
}

fn rank_counts(counts: BTreeMap<String, usize>, top_n: Option<usize>) -> Vec<(String, usize)> {
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    // BTreeMap order is lexicographic; the stable sort keeps it within equal counts.
    ranked.sort_by_key(|e| std::cmp::Reverse(e.1));
    if let Some(n) = top_n {
        ranked.truncate(n);
    }
    ranked
}

/// Values by descending count, ties lexicographic, truncated to `top_n`.
pub fn freq_dist(records: &[ReviewRecord], feature: Feature, top_n: Option<usize>) -> Vec<(String, usize)> {
    let mut counts = BTreeMap::new();
    for v in records.iter().filter_map(|r| feature.value(r)) {
        *counts.entry(v).or_insert(0) += 1;
    }
    rank_counts(counts, top_n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossTab {
    pub row_feature: String,
    pub col_feature: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
    pub normalized: Option<Vec<Vec<f64>>>,
    /// Records skipped because either feature was missing.
    pub missing: usize,
}

impl CrossTab {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<usize> {
        (0..self.col_labels.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }
}

pub fn crosstab(records: &[ReviewRecord], row: Feature, col: Feature, normalize: bool) -> CrossTab {
    let pairs: Vec<(String, String)> = records
        .iter()
        .filter_map(|r| Some((row.value(r)?, col.value(r)?)))
        .collect();
    let missing = records.len() - pairs.len();
    let row_labels: Vec<String> = pairs
        .iter()
        .map(|p| p.0.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let col_labels: Vec<String> = pairs
        .iter()
        .map(|p| p.1.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut counts = vec![vec![0usize; col_labels.len()]; row_labels.len()];
    for (a, b) in &pairs {
        let i = row_labels.binary_search(a).expect("label collected above");
        let j = col_labels.binary_search(b).expect("label collected above");
        counts[i][j] += 1;
    }
    let normalized = normalize.then(|| {
        counts
            .iter()
            .map(|r| {
                let total: usize = r.iter().sum();
                r.iter().map(|&c| c as f64 / total as f64).collect()
            })
            .collect()
    });
    CrossTab {
        row_feature: row.column().to_string(),
        col_feature: col.column().to_string(),
        row_labels,
        col_labels,
        counts,
        normalized,
        missing,
    }
}

/// Pearson correlation; `None` when either input has zero variance or fewer than 2 points.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    /// `None` where a variable is constant.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub groups: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == a)?;
        let j = self.variables.iter().position(|v| v == b)?;
        self.matrix[i][j]
    }
}

pub fn correlation_matrix(names: &[&str], columns: &[Vec<f64>], groups: usize) -> CorrelationMatrix {
    let k = columns.len();
    let mut matrix = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = if i == j {
                pearson(&columns[i], &columns[j]).map(|_| 1.0)
            } else {
                pearson(&columns[i], &columns[j])
            };
            matrix[i][j] = v;
            matrix[j][i] = v;
        }
    }
    CorrelationMatrix {
        variables: names.iter().map(|s| s.to_string()).collect(),
        matrix,
        groups,
    }
}

pub const GROUP_MEAN_RATING: &str = "mean_rating";
pub const GROUP_REVIEW_COUNT: &str = "review_count";
pub const GROUP_MEAN_RECOMMENDED: &str = "mean_recommended";

/// Per clothing id: mean rating, review count and mean recommendation, then
/// Pearson correlations among the three.
pub fn grouped_rating_corr(records: &[ReviewRecord]) -> Result<CorrelationMatrix> {
    let mut groups: BTreeMap<u32, (f64, f64, f64)> = BTreeMap::new();
    for r in records {
        let g = groups.entry(r.clothing_id).or_insert((0.0, 0.0, 0.0));
        g.0 += r.rating as f64;
        g.1 += 1.0;
        g.2 += if r.recommended { 1.0 } else { 0.0 };
    }
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 clothing-id groups, got {}",
            groups.len()
        )));
    }
    let mut rating = Vec::with_capacity(groups.len());
    let mut count = Vec::with_capacity(groups.len());
    let mut rec = Vec::with_capacity(groups.len());
    for (sum_rating, n, sum_rec) in groups.values() {
        rating.push(sum_rating / n);
        count.push(*n);
        rec.push(sum_rec / n);
    }
    Ok(correlation_matrix(
        &[GROUP_MEAN_RATING, GROUP_REVIEW_COUNT, GROUP_MEAN_RECOMMENDED],
        &[rating, count, rec],
        groups.len(),
    ))
}

/// Common English function words excluded from word-frequency tables.
pub const STOP_WORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "i'm",
    "i've",
    "if",
    "in",
    "into",
    "is",
    "it",
    "it's",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
];

pub fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.contains(&token)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    /// Review titles.
    Titles,
    /// All review texts.
    Reviews,
    /// Review texts with rating strictly above the threshold.
    RatingAbove(u8),
    /// Review texts with rating at or below the threshold.
    RatingAtMost(u8),
    /// Review texts of one division.
    Division(String),
}

pub const DEFAULT_RATING_SPLIT: u8 = 3;

impl Segment {
    pub fn name(&self) -> String {
        match self {
            Segment::Titles => "titles".into(),
            Segment::Reviews => "reviews".into(),
            Segment::RatingAbove(t) => format!("rating>{t}"),
            Segment::RatingAtMost(t) => format!("rating<={t}"),
            Segment::Division(d) => format!("division:{d}"),
        }
    }

    /// File-name friendly form of [`Segment::name`].
    pub fn slug(&self) -> String {
        match self {
            Segment::RatingAbove(t) => format!("rating_gt_{t}"),
            Segment::RatingAtMost(t) => format!("rating_le_{t}"),
            Segment::Division(d) => format!(
                "division_{}",
                d.chars()
                    .map(|c| if c.is_ascii_alphanumeric() {
                        c.to_ascii_lowercase()
                    } else {
                        '_'
                    })
                    .collect::<String>()
            ),
            other => other.name(),
        }
    }

    fn text<'a>(&self, r: &'a ReviewRecord) -> Option<&'a str> {
        match self {
            Segment::Titles => r.title.as_deref(),
            Segment::Reviews => r.review_text.as_deref(),
            Segment::RatingAbove(t) => r.review_text.as_deref().filter(|_| r.rating > *t),
            Segment::RatingAtMost(t) => r.review_text.as_deref().filter(|_| r.rating <= *t),
            Segment::Division(d) => r
                .review_text
                .as_deref()
                .filter(|_| r.division.as_deref() == Some(d.as_str())),
        }
    }
}

impl FromStr for Segment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let threshold = |t: &str| t.parse::<u8>().map_err(|_| Error::UnknownSegment(s.to_string()));
        match s {
            "titles" => Ok(Segment::Titles),
            "reviews" => Ok(Segment::Reviews),
            _ => {
                if let Some(t) = s.strip_prefix("rating<=") {
                    Ok(Segment::RatingAtMost(threshold(t)?))
                } else if let Some(t) = s.strip_prefix("rating>") {
                    Ok(Segment::RatingAbove(threshold(t)?))
                } else if let Some(d) = s.strip_prefix("division:").filter(|d| !d.is_empty()) {
                    Ok(Segment::Division(d.to_string()))
                } else {
                    Err(Error::UnknownSegment(s.to_string()))
                }
            }
        }
    }
}

/// Token counts over a segment's cleaned texts with stop words removed.
pub fn word_freq(records: &[ReviewRecord], segment: &Segment, top_n: Option<usize>) -> Vec<(String, usize)> {
    let mut counts = BTreeMap::new();
    for text in records.iter().filter_map(|r| segment.text(r)) {
        for tok in tokenize(&clean_text(text)) {
            if !is_stop_word(&tok) {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
    }
    rank_counts(counts, top_n)
}

/// Like [`word_freq`] but takes the segment by name (`titles`, `reviews`,
/// `rating>3`, `rating<=3`, `division:<name>`). A division absent from the
/// data is an unknown segment.
pub fn word_freq_by_segment(
    records: &[ReviewRecord],
    segment: &str,
    top_n: Option<usize>,
) -> Result<Vec<(String, usize)>> {
    let seg: Segment = segment.parse()?;
    if let Segment::Division(d) = &seg {
        if !records.iter().any(|r| r.division.as_deref() == Some(d.as_str())) {
            return Err(Error::UnknownSegment(segment.to_string()));
        }
    }
    Ok(word_freq(records, &seg, top_n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgeBin {
    pub lo: u32,
    pub hi: u32,
    pub reviews: usize,
    pub positive_feedback: u64,
}

/// Non-empty `[lo, lo + width)` age bins in ascending order.
pub fn age_bin_positive_feedback(records: &[ReviewRecord], bin_width: u32) -> Result<Vec<AgeBin>> {
    if bin_width == 0 {
        return Err(Error::InvalidArgument("bin width must be >= 1".into()));
    }
    let mut bins: BTreeMap<u32, (usize, u64)> = BTreeMap::new();
    for r in records {
        let b = bins.entry(r.age / bin_width).or_insert((0, 0));
        b.0 += 1;
        b.1 += r.positive_feedback_count as u64;
    }
    Ok(bins
        .into_iter()
        .map(|(k, (reviews, fb))| AgeBin {
            lo: k * bin_width,
            hi: (k + 1) * bin_width,
            reviews,
            positive_feedback: fb,
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedTable {
    pub name: String,
    pub rows: Vec<(String, usize)>,
}

/// Everything produced by a full analytics run.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticsReport {
    pub records: usize,
    pub describe: Vec<DescriptiveStats>,
    pub unique_counts: Vec<UniqueCount>,
    pub freq_dist: Vec<RankedTable>,
    pub crosstabs: Vec<CrossTab>,
    pub grouped_rating_corr: Option<CorrelationMatrix>,
    pub word_freq: Vec<RankedTable>,
    pub age_bins: Vec<AgeBin>,
}

pub const FREQ_FEATURES: [(Feature, Option<usize>); 5] = [
    (Feature::ClassName, None),
    (Feature::ClothingId, Some(60)),
    (Feature::Division, None),
    (Feature::Department, None),
    (Feature::Rating, None),
];

pub const CROSSTABS: [(Feature, Feature); 6] = [
    (Feature::Division, Feature::Department),
    (Feature::ClassName, Feature::Department),
    (Feature::Rating, Feature::Recommended),
    (Feature::Department, Feature::Rating),
    (Feature::Division, Feature::Rating),
    (Feature::ClassName, Feature::Rating),
];

pub const WORD_FREQ_TOP_N: usize = 50;

pub fn run_all(records: &[ReviewRecord]) -> Result<AnalyticsReport> {
    let describe = Feature::NUMERIC
        .iter()
        .filter_map(|&f| describe(records, f).ok())
        .collect();
    let freq = FREQ_FEATURES
        .iter()
        .map(|&(f, top)| RankedTable {
            name: match top {
                Some(n) => format!("{}__top{n}", f.slug()),
                None => f.slug().to_string(),
            },
            rows: freq_dist(records, f, top),
        })
        .collect();
    let crosstabs = CROSSTABS.iter().map(|&(a, b)| crosstab(records, a, b, true)).collect();
    let mut segments = vec![
        Segment::Titles,
        Segment::RatingAbove(DEFAULT_RATING_SPLIT),
        Segment::RatingAtMost(DEFAULT_RATING_SPLIT),
    ];
    let divisions: BTreeSet<&str> = records.iter().filter_map(|r| r.division.as_deref()).collect();
    segments.extend(divisions.into_iter().map(|d| Segment::Division(d.to_string())));
    let word_freq_tables = segments
        .iter()
        .map(|s| RankedTable {
            name: s.slug(),
            rows: word_freq(records, s, Some(WORD_FREQ_TOP_N)),
        })
        .collect();
    Ok(AnalyticsReport {
        records: records.len(),
        describe,
        unique_counts: unique_counts(records),
        freq_dist: freq,
        crosstabs,
        grouped_rating_corr: grouped_rating_corr(records).ok(),
        word_freq: word_freq_tables,
        age_bins: age_bin_positive_feedback(records, 10)?,
    })
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl AnalyticsReport {
    /// `(file name, CSV contents)` for every table, named `<operation>__<params>.csv`.
    pub fn csv_tables(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();

        let mut s = String::from("feature,count,mean,std,min,max\n");
        for d in &self.describe {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                csv_escape(&d.feature),
                d.count,
                d.mean,
                d.std,
                d.min,
                d.max
            );
        }
        out.push(("describe__numeric.csv".to_string(), s));

        let mut s = String::from("feature,unique_count\n");
        for u in &self.unique_counts {
            let _ = writeln!(s, "{},{}", csv_escape(&u.feature), u.unique);
        }
        out.push(("unique_counts__all.csv".to_string(), s));

        for t in &self.freq_dist {
            let mut s = String::from("value,count\n");
            for (v, c) in &t.rows {
                let _ = writeln!(s, "{},{}", csv_escape(v), c);
            }
            out.push((format!("freq_dist__{}.csv", t.name), s));
        }

        for ct in &self.crosstabs {
            let stem = format!(
                "crosstab__{}_by_{}",
                slug_of_column(&ct.row_feature),
                slug_of_column(&ct.col_feature)
            );
            let header: Vec<String> = std::iter::once(csv_escape(&ct.row_feature))
                .chain(ct.col_labels.iter().map(|l| csv_escape(l)))
                .collect();
            let mut s = header.join(",") + "\n";
            for (label, row) in ct.row_labels.iter().zip(&ct.counts) {
                let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(s, "{},{}", csv_escape(label), cells.join(","));
            }
            out.push((format!("{stem}.csv"), s));
            if let Some(norm) = &ct.normalized {
                let mut s = header.join(",") + "\n";
                for (label, row) in ct.row_labels.iter().zip(norm) {
                    let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(s, "{},{}", csv_escape(label), cells.join(","));
                }
                out.push((format!("{stem}__normalized.csv"), s));
            }
        }

        let mut s = String::from("variable,");
        if let Some(cm) = &self.grouped_rating_corr {
            s += &cm.variables.join(",");
            s.push('\n');
            for (v, row) in cm.variables.iter().zip(&cm.matrix) {
                let cells: Vec<String> = row.iter().map(|x| fmt_opt(*x)).collect();
                let _ = writeln!(s, "{v},{}", cells.join(","));
            }
        } else {
            s += &[GROUP_MEAN_RATING, GROUP_REVIEW_COUNT, GROUP_MEAN_RECOMMENDED].join(",");
            s.push('\n');
        }
        out.push(("grouped_rating_corr__clothing_id.csv".to_string(), s));

        for t in &self.word_freq {
            let mut s = String::from("token,count\n");
            for (v, c) in &t.rows {
                let _ = writeln!(s, "{},{}", csv_escape(v), c);
            }
            out.push((format!("word_freq__{}.csv", t.name), s));
        }

        let mut s = String::from("age_lo,age_hi,reviews,positive_feedback\n");
        for b in &self.age_bins {
            let _ = writeln!(s, "{},{},{},{}", b.lo, b.hi, b.reviews, b.positive_feedback);
        }
        out.push(("age_bin_positive_feedback__width10.csv".to_string(), s));
        out
    }

    /// Writes every CSV table and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in self.csv_tables() {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join("report.json");
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }
}

fn slug_of_column(col: &str) -> &'static str {
    Feature::ALL
        .into_iter()
        .find(|f| f.column() == col)
        .map_or("unknown", Feature::slug)
}
