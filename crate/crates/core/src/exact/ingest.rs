//! Count-table ingestion.
//!
//! Input is delimited text (comma or tab, detected from the header line) with
//! a header row. The first column is a feature id; the remaining columns are
//! split evenly between group 1 and group 2:
//!
//! | test | group columns                         |
//! |------|---------------------------------------|
//! | bin  | `x` (one count per group)             |
//! | fet  | `x`, `r` (successes, trials)          |
//! | ent  | one column per replicate sample       |
//!
//! Total-count filters apply to each group's trials for `fet` (both groups
//! must fall in range) and to the row total for `bin` and `ent`.

use std::io::{BufRead, Cursor, Read};

use serde::{Deserialize, Serialize};

use super::{binomial_test_with, fisher_test_with, nb_exact_test_with, TestKind, TestResult, TwoSided};
use crate::error::{invalid, Error, Result};
use crate::estimators::{PValueProfile, Study};

/// How to interpret and filter a count table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSchema {
    pub kind: TestKind,
    /// Negative binomial size per sample (`ent` only).
    pub size: Option<f64>,
    pub min_total: Option<u64>,
    pub max_total: Option<u64>,
}

impl CountSchema {
    pub fn new(kind: TestKind) -> Self {
        CountSchema {
            kind,
            size: None,
            min_total: None,
            max_total: None,
        }
    }

    pub fn with_total_range(mut self, min: Option<u64>, max: Option<u64>) -> Self {
        self.min_total = min;
        self.max_total = max;
        self
    }

    pub fn with_size(mut self, size: f64) -> Self {
        self.size = Some(size);
        self
    }

    fn in_range(&self, total: u64) -> bool {
        self.min_total.is_none_or(|lo| total >= lo) && self.max_total.is_none_or(|hi| total <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCounts {
    pub id: String,
    pub group1: Vec<u64>,
    pub group2: Vec<u64>,
}

impl FeatureCounts {
    pub fn total(&self) -> u64 {
        self.group1.iter().chain(&self.group2).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub schema: CountSchema,
    pub rows: Vec<FeatureCounts>,
    /// Columns per group, as read from the header.
    pub columns_per_group: usize,
    /// Rows removed by the total-count filter.
    pub dropped: usize,
}

impl CountTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Runs the schema's test on every row.
    pub fn test_all(&self, convention: TwoSided) -> Result<Vec<TestResult>> {
        self.rows
            .iter()
            .map(|row| run_test(&self.schema, row, convention))
            .collect()
    }

    /// Tests every row and collects the results into a study.
    pub fn to_study(&self, convention: TwoSided) -> Result<Study> {
        let profiles = self
            .test_all(convention)?
            .into_iter()
            .map(PValueProfile::from)
            .collect();
        Study::new(profiles)
    }
}

fn run_test(schema: &CountSchema, row: &FeatureCounts, convention: TwoSided) -> Result<TestResult> {
    match schema.kind {
        TestKind::Bin => Ok(binomial_test_with(row.group1[0], row.group2[0], convention)),
        TestKind::Fet => fisher_test_with(
            row.group1[0],
            row.group1[1],
            row.group2[0],
            row.group2[1],
            convention,
        )
        .map_err(|e| invalid(format!("feature {}: {e}", row.id))),
        TestKind::Ent => {
            let size = schema
                .size
                .ok_or_else(|| invalid("the ent test needs a negative binomial size"))?;
            nb_exact_test_with(
                row.group1.iter().sum(),
                row.group2.iter().sum(),
                size,
                row.group1.len() as u32,
                convention,
            )
        }
    }
}

/// Parses a count table from `source`, applying the schema's filters.
pub fn ingest_counts<R: Read>(source: R, schema: &CountSchema) -> Result<CountTable> {
    let mut reader = std::io::BufReader::new(source);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    if header.trim().is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let delimiter = if header.contains('\t') { b'\t' } else { b',' };

    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(Cursor::new(header.into_bytes()).chain(reader));

    let ncols = csv.headers()?.len();
    if ncols < 3 || (ncols - 1) % 2 != 0 {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected a feature id followed by an equal number of columns per group, found {ncols} columns"
            ),
        });
    }
    let per_group = (ncols - 1) / 2;
    let expected = match schema.kind {
        TestKind::Bin => Some(1),
        TestKind::Fet => Some(2),
        TestKind::Ent => None,
    };
    if let Some(want) = expected {
        if per_group != want {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "the {} test expects {want} column(s) per group, header has {per_group}",
                    schema.kind
                ),
            });
        }
    }
    if schema.kind == TestKind::Ent && schema.size.is_none() {
        return Err(invalid("the ent test needs a negative binomial size"));
    }

    let mut rows = Vec::new();
    let mut dropped = 0;
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != ncols {
            return Err(Error::Parse {
                line,
                message: format!("expected {ncols} fields, found {}", record.len()),
            });
        }
        let counts = record
            .iter()
            .skip(1)
            .map(|tok| parse_count(tok, line))
            .collect::<Result<Vec<u64>>>()?;
        let (g1, g2) = counts.split_at(per_group);
        let row = FeatureCounts {
            id: record[0].to_string(),
            group1: g1.to_vec(),
            group2: g2.to_vec(),
        };
        if schema.kind == TestKind::Fet {
            for (x, r) in [(g1[0], g1[1]), (g2[0], g2[1])] {
                if x > r {
                    return Err(Error::Parse {
                        line,
                        message: format!("successes {x} exceed trials {r}"),
                    });
                }
            }
        }
        let keep = match schema.kind {
            TestKind::Fet => schema.in_range(g1[1]) && schema.in_range(g2[1]),
            TestKind::Bin | TestKind::Ent => schema.in_range(row.total()),
        };
        if keep {
            rows.push(row);
        } else {
            dropped += 1;
        }
    }

    Ok(CountTable {
        schema: schema.clone(),
        rows,
        columns_per_group: per_group,
        dropped,
    })
}

fn parse_count(token: &str, line: usize) -> Result<u64> {
    token.parse::<u64>().map_err(|_| {
        let message = if token.starts_with('-') && token[1..].parse::<u64>().is_ok() {
            format!("negative count {token:?}")
        } else {
            format!("not a nonnegative integer count: {token:?}")
        };
        Error::Parse { line, message }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin() -> CountSchema {
        CountSchema::new(TestKind::Bin)
    }

    #[test]
    fn two_valid_rows() {
        let t = ingest_counts("id,a,b\ng1,3,4\ng2,0,9\n".as_bytes(), &bin()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows[1].group2, vec![9]);
        assert_eq!(t.dropped, 0);
    }

    #[test]
    fn tab_delimited() {
        let t = ingest_counts("id\ta\tb\ng1\t3\t4\n".as_bytes(), &bin()).unwrap();
        assert_eq!(t.rows[0].group1, vec![3]);
    }

    #[test]
    fn filter_drops_zero_totals() {
        let schema = bin().with_total_range(Some(1), None);
        let t = ingest_counts("id,a,b\ng1,0,0\ng2,1,0\n".as_bytes(), &schema).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.dropped, 1);
        assert_eq!(t.rows[0].id, "g2");
    }

    #[test]
    fn fet_filter_applies_to_each_group() {
        let schema = CountSchema::new(TestKind::Fet).with_total_range(Some(1), Some(25));
        let src = "id,x1,r1,x2,r2\nc1,3,10,2,12\nc2,0,0,3,5\nc3,1,30,0,4\n";
        let t = ingest_counts(src.as_bytes(), &schema).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.dropped, 2);
    }

    #[test]
    fn non_integer_token_reports_line() {
        let err = ingest_counts("id,a,b\ng1,3,4\ng2,x,1\n".as_bytes(), &bin()).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("\"x\""));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_count_rejected() {
        let err = ingest_counts("id,a,b\ng1,-3,4\n".as_bytes(), &bin()).unwrap_err();
        assert!(err.to_string().contains("negative count"), "{err}");
        assert!(err.to_string().starts_with("line 2"), "{err}");
    }

    #[test]
    fn ragged_row_rejected() {
        let err = ingest_counts("id,a,b\ng1,3\n".as_bytes(), &bin()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn ent_rows_split_replicates() {
        let schema = CountSchema::new(TestKind::Ent).with_size(2.0);
        let t = ingest_counts("id,a1,a2,a3,b1,b2,b3\nf,1,2,3,4,5,6\n".as_bytes(), &schema).unwrap();
        assert_eq!(t.columns_per_group, 3);
        assert_eq!(t.rows[0].group2, vec![4, 5, 6]);
        let results = t.test_all(TwoSided::MinLikelihood).unwrap();
        assert_eq!(results.len(), 1);
    }

    #[test]
    fn wrong_width_for_kind() {
        let err = ingest_counts("id,a,b,c,d\nf,1,2,3,4\n".as_bytes(), &bin()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
