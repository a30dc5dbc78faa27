//! JSON projection of frames and diagnostics, shared by the service, the
//! CLI's `--format json` and exercise files.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EvalError;
use crate::frame::{shape_for, CellValue, Column, ColumnName, CubeFrame, FrameError, GroupSpec};
use crate::lang::{ParseError, Span};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WireError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("nrows is {nrows} but the frame has columns of length {found}")]
    BadHeight { nrows: usize, found: usize },
}

impl WireError {
    pub fn code(&self) -> &'static str {
        match self {
            WireError::Frame(FrameError::RaggedRows { .. }) => "RaggedRows",
            WireError::Frame(FrameError::DuplicateColumn(_)) => "DuplicateColumn",
            WireError::Frame(FrameError::InvalidName(_)) => "InvalidName",
            WireError::Frame(_) => "InvalidFrame",
            WireError::BadHeight { .. } => "RaggedRows",
        }
    }
}

/// A cell value on the wire: a JSON number or the string `"NA"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireValue(pub CellValue);

impl Serialize for WireValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            CellValue::Na => s.serialize_str("NA"),
            // Integral values print as integers so the JSON reads like the cubes.
            CellValue::Num(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => s.serialize_i64(v as i64),
            CellValue::Num(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for WireValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => match n.as_f64() {
                Some(v) if v.is_finite() => Ok(WireValue(CellValue::from(v))),
                _ => Err(de::Error::custom(format!("{n} is not a finite number"))),
            },
            serde_json::Value::String(s) if s == "NA" => Ok(WireValue(CellValue::Na)),
            other => Err(de::Error::custom(format!(
                "expected a number or \"NA\", found {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WireCell {
    pub value: WireValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub glyph: Option<String>,
}

impl<'de> Deserialize<'de> for WireCell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        // Either a bare value or {value, glyph}; the glyph is ignored on input
        // since it is derived from the value.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Full { value: WireValue },
            Bare(WireValue),
        }
        match Repr::deserialize(d) {
            Ok(Repr::Full { value }) | Ok(Repr::Bare(value)) => Ok(WireCell { value, glyph: None }),
            Err(_) => Err(de::Error::custom(
                "cell must be a number, \"NA\", or {\"value\": ...}",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireColumn {
    pub name: String,
    pub cells: Vec<WireCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireFrame {
    pub columns: Vec<WireColumn>,
    #[serde(default)]
    pub groups: Vec<String>,
    #[serde(default)]
    pub summary_flag: bool,
    /// Only needed for frames with rows but no columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nrows: Option<usize>,
}

impl WireFrame {
    pub fn from_frame(frame: &CubeFrame) -> WireFrame {
        let columns = frame
            .columns()
            .iter()
            .map(|c| WireColumn {
                name: c.name.to_string(),
                cells: c
                    .cells
                    .iter()
                    .map(|&v| WireCell {
                        value: WireValue(v),
                        glyph: Some(shape_for(v).name().to_string()),
                    })
                    .collect(),
            })
            .collect();
        WireFrame {
            columns,
            groups: frame
                .groups()
                .map(|g| g.keys().iter().map(|k| k.to_string()).collect())
                .unwrap_or_default(),
            summary_flag: frame.is_summary(),
            nrows: (frame.ncols() == 0 && frame.nrows() > 0).then_some(frame.nrows()),
        }
    }

    pub fn to_frame(&self) -> Result<CubeFrame, WireError> {
        let height = self.columns.first().map_or(0, |c| c.cells.len());
        let nrows = match (self.nrows, self.columns.is_empty()) {
            (Some(n), true) => n,
            (Some(n), false) if n != height => {
                return Err(WireError::BadHeight {
                    nrows: n,
                    found: height,
                })
            }
            _ => height,
        };
        let mut columns = Vec::with_capacity(self.columns.len());
        for c in &self.columns {
            let name = ColumnName::derived(c.name.clone())?;
            if c.cells.len() != nrows {
                return Err(FrameError::RaggedRows {
                    row: c.cells.len().min(nrows) + 1,
                    expected: nrows,
                    found: c.cells.len(),
                }
                .into());
            }
            columns.push(Column {
                name,
                cells: c.cells.iter().map(|cell| cell.value.0).collect(),
            });
        }
        let groups = if self.groups.is_empty() {
            None
        } else {
            let keys = self
                .groups
                .iter()
                .map(|k| ColumnName::derived(k.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            Some(GroupSpec::new(keys)?)
        };
        Ok(CubeFrame::from_columns(columns, nrows)?
            .with_groups(groups)?
            .with_summary_flag(self.summary_flag))
    }
}

impl From<&CubeFrame> for WireFrame {
    fn from(frame: &CubeFrame) -> Self {
        WireFrame::from_frame(frame)
    }
}

/// A parse or evaluation error in the form students see it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    pub span: Span,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
}

impl From<&ParseError> for Diagnostic {
    fn from(e: &ParseError) -> Self {
        Diagnostic {
            code: e.kind.code().to_string(),
            message: e.kind.to_string(),
            span: e.span,
            hint: e.hint.clone(),
            stage: None,
        }
    }
}

impl From<&EvalError> for Diagnostic {
    fn from(e: &EvalError) -> Self {
        Diagnostic {
            code: e.kind.code().to_string(),
            message: e.kind.to_string(),
            span: e.span,
            hint: e.hint.clone(),
            stage: e.stage,
        }
    }
}

impl Diagnostic {
    /// The message, a caret line under the offending source and the hint.
    pub fn render(&self, source: &str) -> String {
        let mut out = format!("error: {}\n", self.message);
        let mut offset = 0;
        for line in source.split('\n') {
            let len = line.chars().count();
            let (start, end) = (self.span.start, self.span.end);
            if start >= offset && start <= offset + len {
                let col = start - offset;
                let width = end.min(offset + len).saturating_sub(start).max(1);
                out.push_str(&format!("  {line}\n  {}{}\n", " ".repeat(col), "^".repeat(width)));
                break;
            }
            offset += len + 1;
        }
        if let Some(h) = &self.hint {
            out.push_str(&format!("hint: {h}\n"));
        }
        out
    }
}
