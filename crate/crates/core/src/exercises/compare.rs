//! Comparing a submitted result with the expected one.

use serde::Serialize;

use crate::frame::{CellValue, CubeFrame};
use crate::wire::WireValue;

use super::Answer;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMismatch {
    /// 1-based row of the expected frame.
    pub row: usize,
    pub column: String,
    pub expected: WireValue,
    pub found: WireValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerMismatch {
    pub expected: Vec<Answer>,
    pub found: Vec<Answer>,
}

/// Differences between a submission and the expected result. Empty means
/// the submission is right.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GradeDiff {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing_columns: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra_columns: Vec<String>,
    /// Same columns, different order.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub column_order: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<(Vec<String>, Vec<String>)>,
    /// Expected rows (1-based) with no match in the submission.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing_rows: Vec<usize>,
    /// Submitted rows (1-based) that were not expected.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra_rows: Vec<usize>,
    /// Same rows in a different order, where order matters.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub row_order: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellMismatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answers: Option<AnswerMismatch>,
}

impl GradeDiff {
    pub fn is_empty(&self) -> bool {
        *self == GradeDiff::default()
    }

    /// One-line description for terminals and logs.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.missing_columns.is_empty() {
            parts.push(format!("missing columns: {}", self.missing_columns.join(", ")));
        }
        if !self.extra_columns.is_empty() {
            parts.push(format!("unexpected columns: {}", self.extra_columns.join(", ")));
        }
        if self.column_order {
            parts.push("columns in the wrong order".to_string());
        }
        if let Some((want, got)) = &self.groups {
            parts.push(format!(
                "grouped by [{}], expected [{}]",
                got.join(", "),
                want.join(", ")
            ));
        }
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        if !self.missing_rows.is_empty() {
            parts.push(format!("missing expected rows {}", list(&self.missing_rows)));
        }
        if !self.extra_rows.is_empty() {
            parts.push(format!("unexpected rows {}", list(&self.extra_rows)));
        }
        if self.row_order {
            parts.push("rows in the wrong order".to_string());
        }
        if !self.cells.is_empty() {
            parts.push(format!("{} cell(s) differ", self.cells.len()));
        }
        if let Some(a) = &self.answers {
            let show = |v: &[Answer]| v.iter().map(Answer::to_string).collect::<Vec<_>>().join(", ");
            parts.push(format!("answered {}, expected {}", show(&a.found), show(&a.expected)));
        }
        if parts.is_empty() {
            "no differences".to_string()
        } else {
            parts.join("; ")
        }
    }
}

fn names(f: &CubeFrame) -> Vec<String> {
    f.column_names().map(|n| n.to_string()).collect()
}

fn group_names(f: &CubeFrame) -> Vec<String> {
    f.groups()
        .map(|g| g.keys().iter().map(|k| k.to_string()).collect())
        .unwrap_or_default()
}

/// Rows projected onto `cols`, in the given frame's row order.
fn project(f: &CubeFrame, cols: &[String]) -> Vec<Vec<CellValue>> {
    let idx: Vec<usize> = cols
        .iter()
        .map(|c| f.column_index(c).expect("shared column"))
        .collect();
    (0..f.nrows())
        .map(|r| idx.iter().map(|&j| f.columns()[j].cells[r]).collect())
        .collect()
}

/// Greedy multiset matching: (unmatched expected, unmatched found), 1-based.
fn match_rows(expected: &[Vec<CellValue>], found: &[Vec<CellValue>]) -> (Vec<usize>, Vec<usize>) {
    let mut taken = vec![false; found.len()];
    let mut missing = Vec::new();
    for (i, row) in expected.iter().enumerate() {
        match (0..found.len()).find(|&j| !taken[j] && found[j] == *row) {
            Some(j) => taken[j] = true,
            None => missing.push(i + 1),
        }
    }
    let extra = (0..found.len()).filter(|&j| !taken[j]).map(|j| j + 1).collect();
    (missing, extra)
}

/// Compares frames cell by cell on their shared columns. The summary display
/// flag is not part of the answer.
pub fn compare_frames(expected: &CubeFrame, found: &CubeFrame, ordered: bool) -> GradeDiff {
    let want = names(expected);
    let got = names(found);
    let mut diff = GradeDiff {
        missing_columns: want.iter().filter(|n| !got.contains(n)).cloned().collect(),
        extra_columns: got.iter().filter(|n| !want.contains(n)).cloned().collect(),
        ..GradeDiff::default()
    };
    diff.column_order = diff.missing_columns.is_empty() && diff.extra_columns.is_empty() && want != got;
    let (want_groups, got_groups) = (group_names(expected), group_names(found));
    if want_groups != got_groups {
        diff.groups = Some((want_groups, got_groups));
    }

    let shared: Vec<String> = want.iter().filter(|n| got.contains(n)).cloned().collect();
    let e_rows = project(expected, &shared);
    let f_rows = project(found, &shared);
    let (missing, extra) = match_rows(&e_rows, &f_rows);
    if !missing.is_empty() || !extra.is_empty() {
        if ordered && e_rows.len() == f_rows.len() {
            diff.cells = cell_mismatches(&shared, &e_rows, &f_rows);
        } else {
            diff.missing_rows = missing;
            diff.extra_rows = extra;
        }
    } else if ordered && e_rows != f_rows {
        diff.row_order = true;
        diff.cells = cell_mismatches(&shared, &e_rows, &f_rows);
    }
    diff
}

fn cell_mismatches(
    cols: &[String],
    expected: &[Vec<CellValue>],
    found: &[Vec<CellValue>],
) -> Vec<CellMismatch> {
    let mut out = Vec::new();
    for (r, (e, f)) in expected.iter().zip(found).enumerate() {
        for (j, (a, b)) in e.iter().zip(f).enumerate() {
            if a != b {
                out.push(CellMismatch {
                    row: r + 1,
                    column: cols[j].clone(),
                    expected: WireValue(*a),
                    found: WireValue(*b),
                });
            }
        }
    }
    out
}

pub(crate) fn compare_answers(expected: &[Answer], found: &[Answer], ordered: bool) -> GradeDiff {
    let same = expected.len() == found.len()
        && if ordered {
            expected.iter().zip(found).all(|(a, b)| a.matches(b))
        } else {
            let mut taken = vec![false; found.len()];
            expected.iter().all(|a| {
                match (0..found.len()).find(|&j| !taken[j] && a.matches(&found[j])) {
                    Some(j) => {
                        taken[j] = true;
                        true
                    }
                    None => false,
                }
            })
        };
    GradeDiff {
        answers: (!same).then(|| AnswerMismatch {
            expected: expected.to_vec(),
            found: found.to_vec(),
        }),
        ..GradeDiff::default()
    }
}
