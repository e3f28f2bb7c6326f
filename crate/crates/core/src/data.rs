//! Review dataset CSV ingest, filtering and the 60/20/20 split.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub const COL_CLOTHING_ID: &str = "Clothing ID";
pub const COL_AGE: &str = "Age";
pub const COL_TITLE: &str = "Title";
pub const COL_TEXT: &str = "Review Text";
pub const COL_RATING: &str = "Rating";
pub const COL_RECOMMENDED: &str = "Recommended IND";
pub const COL_FEEDBACK: &str = "Positive Feedback Count";
pub const COL_DIVISION: &str = "Division Name";
pub const COL_DEPARTMENT: &str = "Department Name";
pub const COL_CLASS: &str = "Class Name";

pub const COLUMNS: [&str; 10] = [
    COL_CLOTHING_ID,
    COL_AGE,
    COL_TITLE,
    COL_TEXT,
    COL_RATING,
    COL_RECOMMENDED,
    COL_FEEDBACK,
    COL_DIVISION,
    COL_DEPARTMENT,
    COL_CLASS,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReviewRecord {
    pub row_id: usize,
    pub clothing_id: u32,
    pub age: u32,
    pub title: Option<String>,
    pub review_text: Option<String>,
    pub rating: u8,
    pub recommended: bool,
    pub positive_feedback_count: u32,
    pub division: Option<String>,
    pub department: Option<String>,
    pub class_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    /// 1-based line of the record in the file (header is line 1).
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedDataset {
    pub records: Vec<ReviewRecord>,
    pub issues: Vec<RowIssue>,
    /// Total data rows seen, valid or not.
    pub rows_read: usize,
}

impl ParsedDataset {
    /// Issues as line-delimited text.
    pub fn issues_report(&self) -> String {
        self.issues.iter().map(|i| format!("{i}\n")).collect()
    }
}

pub fn parse_csv(path: &Path) -> Result<ParsedDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv_reader(file)
}

pub fn parse_csv_str(text: &str) -> Result<ParsedDataset> {
    parse_csv_reader(text.as_bytes())
}

pub fn parse_csv_reader<R: std::io::Read>(reader: R) -> Result<ParsedDataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let positions: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
    let missing: Vec<String> = COLUMNS
        .iter()
        .filter(|c| !positions.contains_key(*c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(missing));
    }
    let index_col = headers.get(0).filter(|h| h.trim().is_empty()).map(|_| 0usize);
    let col = |name: &str| positions[name];

    let mut out = ParsedDataset::default();
    for (n, row) in rdr.records().enumerate() {
        out.rows_read += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(n as u64 + 2, |p| p.line());
                out.issues.push(RowIssue {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(n as u64 + 2, |p| p.line());
        let field = |name: &str| row.get(col(name)).unwrap_or("");
        let optional = |name: &str| {
            let v = field(name);
            if v.trim().is_empty() {
                None
            } else {
                Some(v.to_string())
            }
        };
        let parsed = (|| -> std::result::Result<ReviewRecord, String> {
            let num = |name: &str| -> std::result::Result<u32, String> {
                let raw = field(name).trim();
                raw.parse::<u32>()
                    .map_err(|_| format!("{name}: cannot parse `{raw}` as a non-negative integer"))
            };
            let rating = num(COL_RATING)?;
            if !(1..=5).contains(&rating) {
                return Err(format!("rating out of range: {rating}"));
            }
            let recommended = match num(COL_RECOMMENDED)? {
                0 => false,
                1 => true,
                other => return Err(format!("{COL_RECOMMENDED} must be 0 or 1, got {other}")),
            };
            let row_id = match index_col {
                Some(i) => {
                    let raw = row.get(i).unwrap_or("").trim();
                    raw.parse::<usize>()
                        .map_err(|_| format!("index column: bad value `{raw}`"))?
                }
                None => n,
            };
            Ok(ReviewRecord {
                row_id,
                clothing_id: num(COL_CLOTHING_ID)?,
                age: num(COL_AGE)?,
                title: optional(COL_TITLE),
                review_text: optional(COL_TEXT),
                rating: rating as u8,
                recommended,
                positive_feedback_count: num(COL_FEEDBACK)?,
                division: optional(COL_DIVISION),
                department: optional(COL_DEPARTMENT),
                class_name: optional(COL_CLASS),
            })
        })();
        match parsed {
            Ok(r) => out.records.push(r),
            Err(message) => out.issues.push(RowIssue { line, message }),
        }
    }
    Ok(out)
}

/// Writes records in the input schema (leading unnamed index column), with
/// optional extra columns appended to every row.
pub fn write_csv<W: std::io::Write>(
    writer: W,
    records: &[ReviewRecord],
    extra_headers: &[&str],
    extra: impl Fn(usize) -> Vec<String>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![""];
    header.extend(COLUMNS);
    header.extend(extra_headers);
    w.write_record(&header)?;
    for (k, r) in records.iter().enumerate() {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        let mut row = vec![
            r.row_id.to_string(),
            r.clothing_id.to_string(),
            r.age.to_string(),
            opt(&r.title),
            opt(&r.review_text),
            r.rating.to_string(),
            u8::from(r.recommended).to_string(),
            r.positive_feedback_count.to_string(),
            opt(&r.division),
            opt(&r.department),
            opt(&r.class_name),
        ];
        row.extend(extra(k));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Keeps records that have review text; returns them with the dropped count.
pub fn filter_for_classification(records: &[ReviewRecord]) -> (Vec<ReviewRecord>, usize) {
    let kept: Vec<ReviewRecord> = records.iter().filter(|r| r.review_text.is_some()).cloned().collect();
    let dropped = records.len() - kept.len();
    (kept, dropped)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Train and validation sizes for `n` records; the remainder is the test size.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = n * 6 / 10;
    let validation = n * 2 / 10;
    (train, validation, n - train - validation)
}

/// Seeded shuffle of `0..n`, then contiguous 60/20/20 slices (floor, floor, remainder).
pub fn split_60_20_20(n: usize, seed: u64) -> Result<DatasetSplit> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!(
            "need at least 5 records to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut order);
    let (tr, va, _) = split_sizes(n);
    let test = order.split_off(tr + va);
    let validation = order.split_off(tr);
    Ok(DatasetSplit {
        train: order,
        validation,
        test,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str =
        ",Clothing ID,Age,Title,Review Text,Rating,Recommended IND,Positive Feedback Count,Division Name,Department Name,Class Name\n";

    #[test]
    fn quoted_comma_is_one_field() {
        let csv = format!("{HEADER}0,767,33,,\"Great, fits!\",4,1,0,Initmates,Intimate,Intimates\n");
        let d = parse_csv_str(&csv).unwrap();
        assert!(d.issues.is_empty(), "{:?}", d.issues);
        assert_eq!(d.records[0].review_text.as_deref(), Some("Great, fits!"));
        assert_eq!(d.records[0].title, None);
    }

    #[test]
    fn rating_out_of_range_is_issue() {
        let csv = format!("{HEADER}0,767,33,t,text,6,1,0,a,b,c\n1,768,40,t,text,5,1,2,a,b,c\n");
        let d = parse_csv_str(&csv).unwrap();
        assert_eq!(d.records.len(), 1);
        assert_eq!(d.issues.len(), 1);
        assert!(d.issues[0].message.contains("rating out of range"));
        assert_eq!(d.issues[0].line, 2);
        assert_eq!(d.rows_read, 2);
        assert!(d.issues_report().starts_with("line 2: rating out of range"));
    }

    #[test]
    fn empty_text_is_absent() {
        let csv = format!("{HEADER}0,1,20,,,3,0,0,,,\n");
        let d = parse_csv_str(&csv).unwrap();
        assert_eq!(d.records[0].review_text, None);
        assert_eq!(d.records[0].division, None);
    }

    #[test]
    fn missing_columns_listed() {
        let err = parse_csv_str("Clothing ID,Age\n1,2\n").unwrap_err();
        match err {
            Error::Schema(cols) => {
                assert!(cols.contains(&"Rating".to_string()));
                assert!(!cols.contains(&"Age".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_without_index_column() {
        let csv = "Clothing ID,Age,Title,Review Text,Rating,Recommended IND,Positive Feedback Count,Division Name,Department Name,Class Name\n5,30,,ok,5,1,0,General,Tops,Knits\n";
        let d = parse_csv_str(csv).unwrap();
        assert_eq!(d.records[0].row_id, 0);
        assert_eq!(d.records[0].clothing_id, 5);
    }

    #[test]
    fn bad_recommended_flag() {
        let csv = format!("{HEADER}0,1,20,,x,3,2,0,,,\n");
        let d = parse_csv_str(&csv).unwrap();
        assert!(d.records.is_empty());
        assert_eq!(d.issues.len(), 1);
    }

    #[test]
    fn filter_rules() {
        let csv = format!("{HEADER}0,1,20,,has text,3,0,0,,,\n1,1,20,,,3,0,0,,,\n");
        let d = parse_csv_str(&csv).unwrap();
        let (kept, dropped) = filter_for_classification(&d.records);
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped, 1);
        let (again, dropped2) = filter_for_classification(&kept);
        assert_eq!(again, kept);
        assert_eq!(dropped2, 0);
    }

    #[test]
    fn split_sizes_follow_rounding_rule() {
        let s = split_60_20_20(10, 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (6, 2, 2));
        let s = split_60_20_20(11, 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (6, 2, 3));
        assert_eq!(split_60_20_20(11, 1).unwrap(), s);
        assert!(split_60_20_20(4, 1).is_err());
    }

    fn record_strategy() -> impl Strategy<Value = ReviewRecord> {
        let opt = || proptest::option::of("[A-Za-z ,\"'\n!]{1,20}".prop_filter("non-blank", |s| !s.trim().is_empty()));
        (
            (0usize..100_000, 0u32..2000, 0u32..100, opt(), opt()),
            (1u8..=5, any::<bool>(), 0u32..200, opt(), opt(), opt()),
        )
            .prop_map(
                |(
                    (row_id, clothing_id, age, title, review_text),
                    (rating, recommended, fb, division, department, class_name),
                )| {
                    ReviewRecord {
                        row_id,
                        clothing_id,
                        age,
                        title,
                        review_text,
                        rating,
                        recommended,
                        positive_feedback_count: fb,
                        division,
                        department,
                        class_name,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 5usize..400, seed in any::<u64>()) {
            let s = split_60_20_20(n, seed).unwrap();
            let (tr, va, te) = split_sizes(n);
            prop_assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (tr, va, te));
            let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn serialize_parse_round_trip(records in proptest::collection::vec(record_strategy(), 0..10)) {
            let mut buf = Vec::new();
            write_csv(&mut buf, &records, &[], |_| vec![]).unwrap();
            let back = parse_csv_reader(buf.as_slice()).unwrap();
            prop_assert!(back.issues.is_empty());
            prop_assert_eq!(back.records, records);
        }
    }
}
