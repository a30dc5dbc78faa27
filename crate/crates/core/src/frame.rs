//! The cube-grid data model.
//!
//! A [`CubeFrame`] is a small rectangular table: each column is one cube
//! colour (a variable), each row one chain of cubes (an observation). Cell
//! values are plain numbers or the missing marker; the triangle / square /
//! pentagon / hexagon faces are a display mapping over the numbers 3 to 6.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("ragged rows: row {row} has {found} cells but there are {expected} columns")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("invalid column name `{0}`: names start with a letter and use letters, digits, `_` or `.`")]
    InvalidName(String),
    #[error("unknown group key `{0}`")]
    UnknownGroupKey(String),
    #[error("group keys must be distinct and non-empty")]
    InvalidGroupSpec,
    #[error("inconsistent provenance: {0}")]
    InconsistentProvenance(String),
}

/// One cell: a finite number or `NA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue {
    Num(f64),
    Na,
}

impl CellValue {
    pub fn as_f64(self) -> Option<f64> {
        match self {
            CellValue::Num(v) => Some(v),
            CellValue::Na => None,
        }
    }

    pub fn is_na(self) -> bool {
        matches!(self, CellValue::Na)
    }

    /// Total order used for sorting and group keys: numbers ascending, `NA` last.
    pub fn cmp_na_last(self, other: CellValue) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            // Cells are finite, so `partial_cmp` is total and treats -0 == 0.
            (CellValue::Num(a), CellValue::Num(b)) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
            (CellValue::Num(_), CellValue::Na) => Ordering::Less,
            (CellValue::Na, CellValue::Num(_)) => Ordering::Greater,
            (CellValue::Na, CellValue::Na) => Ordering::Equal,
        }
    }

    /// Parses a decimal number or the literal `NA`.
    pub fn parse(text: &str) -> Option<CellValue> {
        let text = text.trim();
        if text == "NA" {
            return Some(CellValue::Na);
        }
        // `f64::from_str` also accepts "inf" and "nan"; cells are finite decimals only.
        if !text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        {
            return None;
        }
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(CellValue::Num)
    }
}

impl From<f64> for CellValue {
    fn from(v: f64) -> Self {
        CellValue::Num(v)
    }
}

impl From<i32> for CellValue {
    fn from(v: i32) -> Self {
        CellValue::Num(v as f64)
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Rust's shortest round-trip formatting prints 3.0 as "3" and 0.25 as "0.25".
            CellValue::Num(v) => write!(f, "{v}"),
            CellValue::Na => f.write_str("NA"),
        }
    }
}

/// The face a cube shows for a value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ShapeGlyph {
    Triangle,
    Square,
    Pentagon,
    Hexagon,
    /// Anything without a cube face, rendered as its literal text.
    Numeral(String),
}

impl ShapeGlyph {
    pub fn name(&self) -> &str {
        match self {
            ShapeGlyph::Triangle => "triangle",
            ShapeGlyph::Square => "square",
            ShapeGlyph::Pentagon => "pentagon",
            ShapeGlyph::Hexagon => "hexagon",
            ShapeGlyph::Numeral(_) => "numeral",
        }
    }
}

pub fn shape_for(value: CellValue) -> ShapeGlyph {
    match value {
        CellValue::Num(v) if v == 3.0 => ShapeGlyph::Triangle,
        CellValue::Num(v) if v == 4.0 => ShapeGlyph::Square,
        CellValue::Num(v) if v == 5.0 => ShapeGlyph::Pentagon,
        CellValue::Num(v) if v == 6.0 => ShapeGlyph::Hexagon,
        other => ShapeGlyph::Numeral(other.to_string()),
    }
}

const RESERVED_NAMES: [&str; 3] = ["NA", "TRUE", "FALSE"];

/// A column name. Names built with [`ColumnName::new`] are identifiers that
/// the pipeline language can refer to; summary columns carry their
/// expression text instead (e.g. `max(red)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnName(String);

impl ColumnName {
    pub fn new(name: impl Into<String>) -> Result<Self, FrameError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(ColumnName(name))
        } else {
            Err(FrameError::InvalidName(name))
        }
    }

    /// Accepts any non-empty single-line name. Used for computed columns and
    /// when reading frames back from files.
    pub fn derived(name: impl Into<String>) -> Result<Self, FrameError> {
        let name = name.into();
        if name.trim().is_empty() || name.chars().any(char::is_control) {
            Err(FrameError::InvalidName(name))
        } else {
            Ok(ColumnName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ColumnName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ColumnName {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for ColumnName {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for ColumnName {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '.') && !RESERVED_NAMES.contains(&name)
}

/// Registered grouping keys. Attaching one never touches the cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    keys: Vec<ColumnName>,
}

impl GroupSpec {
    pub fn new(keys: Vec<ColumnName>) -> Result<Self, FrameError> {
        let distinct: BTreeSet<_> = keys.iter().collect();
        if keys.is_empty() || distinct.len() != keys.len() {
            return Err(FrameError::InvalidGroupSpec);
        }
        Ok(GroupSpec { keys })
    }

    pub fn keys(&self) -> &[ColumnName] {
        &self.keys
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: ColumnName,
    pub cells: Vec<CellValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeFrame {
    columns: Vec<Column>,
    nrows: usize,
    groups: Option<GroupSpec>,
    summary: bool,
}

impl CubeFrame {
    /// Builds an ungrouped frame from row-major data.
    pub fn make_frame<N: AsRef<str>>(
        names: &[N],
        rows: &[Vec<CellValue>],
    ) -> Result<CubeFrame, FrameError> {
        let names = names
            .iter()
            .map(|n| ColumnName::new(n.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(FrameError::RaggedRows {
                    row: i + 1,
                    expected: names.len(),
                    found: row.len(),
                });
            }
        }
        let columns = names
            .into_iter()
            .enumerate()
            .map(|(j, name)| Column {
                name,
                cells: rows.iter().map(|r| r[j]).collect(),
            })
            .collect();
        CubeFrame::from_columns(columns, rows.len())
    }

    /// Builds a frame from columns. `nrows` is explicit so that zero-column
    /// frames keep their height.
    pub fn from_columns(columns: Vec<Column>, nrows: usize) -> Result<CubeFrame, FrameError> {
        let mut seen = BTreeSet::new();
        for col in &columns {
            if !seen.insert(col.name.as_str()) {
                return Err(FrameError::DuplicateColumn(col.name.to_string()));
            }
            if col.cells.len() != nrows {
                return Err(FrameError::RaggedRows {
                    row: col.cells.len().min(nrows) + 1,
                    expected: nrows,
                    found: col.cells.len(),
                });
            }
        }
        Ok(CubeFrame {
            columns,
            nrows,
            groups: None,
            summary: false,
        })
    }

    pub fn with_groups(mut self, groups: Option<GroupSpec>) -> Result<CubeFrame, FrameError> {
        if let Some(spec) = &groups {
            for key in spec.keys() {
                if self.column(key.as_str()).is_none() {
                    return Err(FrameError::UnknownGroupKey(key.to_string()));
                }
            }
        }
        self.groups = groups;
        Ok(self)
    }

    pub fn with_summary_flag(mut self, summary: bool) -> CubeFrame {
        self.summary = summary;
        self
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.nrows, self.columns.len())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> impl Iterator<Item = &ColumnName> {
        self.columns.iter().map(|c| &c.name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn groups(&self) -> Option<&GroupSpec> {
        self.groups.as_ref()
    }

    pub fn is_summary(&self) -> bool {
        self.summary
    }

    pub fn row(&self, i: usize) -> Vec<CellValue> {
        self.columns.iter().map(|c| c.cells[i]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<CellValue>> {
        (0..self.nrows).map(|i| self.row(i)).collect()
    }

    /// Sorted distinct non-missing values across every cell.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .columns
            .iter()
            .flat_map(|c| c.cells.iter().filter_map(|v| v.as_f64()))
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }

    /// Same cells, names and groups; ignores the summary display flag.
    pub fn same_contents(&self, other: &CubeFrame) -> bool {
        self.columns == other.columns && self.nrows == other.nrows && self.groups == other.groups
    }

    /// Keeps the given source rows, in the given order.
    pub(crate) fn take_rows(&self, rows: &[usize]) -> CubeFrame {
        CubeFrame {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    cells: rows.iter().map(|&r| c.cells[r]).collect(),
                })
                .collect(),
            nrows: rows.len(),
            groups: self.groups.clone(),
            summary: self.summary,
        }
    }
}

/// Row lineage reported by the engine alongside every verb application.
#[derive(Debug, Clone, PartialEq)]
pub enum Lineage {
    /// Output row `i` is input row `rows[i]` (0-based).
    Rows(Vec<usize>),
    /// Output row `i` aggregates the listed input rows (0-based).
    Aggregated(Vec<Vec<usize>>),
}

impl Lineage {
    pub fn identity(nrows: usize) -> Lineage {
        Lineage::Rows((0..nrows).collect())
    }
}

/// What a verb did to a frame. Row numbers are 1-based, the way students
/// count cube chains.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct FrameDiff {
    pub kept_rows: Vec<usize>,
    pub dropped_rows: Vec<usize>,
    pub added_columns: Vec<String>,
    pub dropped_columns: Vec<String>,
    pub changed_columns: Vec<String>,
    /// `row_permutation[i]` is the position output row `i` held among the
    /// kept rows before reordering. Absent when order is unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_permutation: Option<Vec<usize>>,
    /// For summaries: the input rows feeding each output row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregated_rows: Option<Vec<Vec<usize>>>,
}

impl FrameDiff {
    pub fn is_empty(&self) -> bool {
        self.dropped_rows.is_empty()
            && self.added_columns.is_empty()
            && self.dropped_columns.is_empty()
            && self.changed_columns.is_empty()
            && self.row_permutation.is_none()
            && self.aggregated_rows.is_none()
    }
}

pub fn diff_frames(
    before: &CubeFrame,
    after: &CubeFrame,
    lineage: &Lineage,
) -> Result<FrameDiff, FrameError> {
    let n_in = before.nrows();
    // For every output row, the input rows it was computed from.
    let sources: Vec<Vec<usize>> = match lineage {
        Lineage::Rows(rows) => rows.iter().map(|&r| vec![r]).collect(),
        Lineage::Aggregated(groups) => groups.clone(),
    };
    if sources.len() != after.nrows() {
        return Err(FrameError::InconsistentProvenance(format!(
            "lineage describes {} rows but the output has {}",
            sources.len(),
            after.nrows()
        )));
    }
    let mut used = vec![false; n_in];
    for &r in sources.iter().flatten() {
        if r >= n_in {
            return Err(FrameError::InconsistentProvenance(format!(
                "source row {} out of range for {n_in} input rows",
                r + 1
            )));
        }
        if used[r] {
            return Err(FrameError::InconsistentProvenance(format!(
                "source row {} used twice",
                r + 1
            )));
        }
        used[r] = true;
    }

    let kept_rows: Vec<usize> = (0..n_in).filter(|&r| used[r]).map(|r| r + 1).collect();
    let dropped_rows: Vec<usize> = (0..n_in).filter(|&r| !used[r]).map(|r| r + 1).collect();

    let (row_permutation, aggregated_rows) = match lineage {
        Lineage::Rows(rows) => {
            let mut sorted = rows.clone();
            sorted.sort_unstable();
            let perm: Vec<usize> = rows
                .iter()
                .map(|r| sorted.binary_search(r).expect("row present") + 1)
                .collect();
            let is_identity = perm.iter().enumerate().all(|(i, &p)| p == i + 1);
            ((!is_identity).then_some(perm), None)
        }
        Lineage::Aggregated(groups) => (
            None,
            Some(
                groups
                    .iter()
                    .map(|g| g.iter().map(|r| r + 1).collect())
                    .collect(),
            ),
        ),
    };

    let added_columns = after
        .column_names()
        .filter(|n| before.column(n.as_str()).is_none())
        .map(|n| n.to_string())
        .collect();
    let dropped_columns = before
        .column_names()
        .filter(|n| after.column(n.as_str()).is_none())
        .map(|n| n.to_string())
        .collect();
    let changed_columns = after
        .columns()
        .iter()
        .filter_map(|out| {
            let src = before.column(out.name.as_str())?;
            let changed = sources
                .iter()
                .zip(&out.cells)
                .any(|(rows, v)| rows.iter().any(|&r| src.cells[r] != *v));
            changed.then(|| out.name.to_string())
        })
        .collect();

    Ok(FrameDiff {
        kept_rows,
        dropped_rows,
        added_columns,
        dropped_columns,
        changed_columns,
        row_permutation,
        aggregated_rows,
    })
}

pub mod fixtures {
    use super::{CellValue, CubeFrame};

    pub const FIGURE1_NAMES: [&str; 6] = ["red", "orange", "yellow", "green", "blue", "purple"];

    /// The classroom reference kit: three chains of six colours.
    pub fn figure1() -> CubeFrame {
        let columns: [[f64; 3]; 6] = [
            [3.0, 4.0, 5.0],
            [4.0, 3.0, 6.0],
            [5.0, 5.0, 3.0],
            [6.0, 4.0, 5.0],
            [3.0, 6.0, 4.0],
            [4.0, 4.0, 5.0],
        ];
        let rows: Vec<Vec<CellValue>> = (0..3)
            .map(|i| columns.iter().map(|c| CellValue::Num(c[i])).collect())
            .collect();
        CubeFrame::make_frame(&FIGURE1_NAMES, &rows).expect("fixture is well formed")
    }

    pub fn by_id(id: &str) -> Option<CubeFrame> {
        match id {
            "figure1" => Some(figure1()),
            _ => None,
        }
    }

    pub const BUILTIN_IDS: [&str; 1] = ["figure1"];
}
