//! Gradable classroom exercises.
//!
//! Exercises are data: a start frame, an expected result and a model
//! solution, authored as JSON. The built-in set ships inside the binary.

mod compare;
mod grade;
mod pitfalls;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixtures;
use crate::frame::CubeFrame;
use crate::wire::{WireError, WireFrame};

pub use compare::{compare_frames, AnswerMismatch, CellMismatch, GradeDiff};
pub use grade::{grade, parse_answers, GradeReport, Verdict};
pub use pitfalls::{diagnose_pitfalls, Outcome, PitfallHit, PitfallId};

const BUILTIN_JSON: &str = include_str!("../../data/exercises.json");

#[derive(Debug, Clone, PartialEq)]
pub enum Answer {
    Number(f64),
    Text(String),
}

impl Answer {
    fn matches(&self, other: &Answer) -> bool {
        match (self, other) {
            (Answer::Number(a), Answer::Number(b)) => a == b,
            (Answer::Text(a), Answer::Text(b)) => a.eq_ignore_ascii_case(b),
            _ => false,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Number(v) => write!(f, "{v}"),
            Answer::Text(s) => f.write_str(s),
        }
    }
}

impl Serialize for Answer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Answer::Number(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => s.serialize_i64(*v as i64),
            Answer::Number(v) => s.serialize_f64(*v),
            Answer::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Number(v) => Answer::Number(v),
            Repr::Text(t) => Answer::Text(t),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpectedResult {
    /// Cells, column order and row order must all match.
    ExactFrame(CubeFrame),
    /// Rows may come in any order.
    FrameUpToRowOrder(CubeFrame),
    ScalarAnswers { answers: Vec<Answer>, ordered: bool },
}

impl ExpectedResult {
    pub fn mode(&self) -> &'static str {
        match self {
            ExpectedResult::ExactFrame(_) => "exact_frame",
            ExpectedResult::FrameUpToRowOrder(_) => "frame_up_to_row_order",
            ExpectedResult::ScalarAnswers { .. } => "scalar_answers",
        }
    }

    pub fn frame(&self) -> Option<&CubeFrame> {
        match self {
            ExpectedResult::ExactFrame(f) | ExpectedResult::FrameUpToRowOrder(f) => Some(f),
            ExpectedResult::ScalarAnswers { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exercise {
    pub id: String,
    pub prompt: String,
    pub start_frame: CubeFrame,
    pub expected: ExpectedResult,
    pub model_solution: String,
    pub pitfalls: Vec<PitfallId>,
}

/// What `GET /exercises` shows. The solution only travels in instructor mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExerciseSummary {
    pub id: String,
    pub prompt: String,
    pub mode: &'static str,
    pub dims: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_solution: Option<String>,
}

impl Exercise {
    pub fn summary(&self, with_solution: bool) -> ExerciseSummary {
        ExerciseSummary {
            id: self.id.clone(),
            prompt: self.prompt.clone(),
            mode: self.expected.mode(),
            dims: self.start_frame.dimensions(),
            model_solution: with_solution.then(|| self.model_solution.clone()),
        }
    }

    /// Parses one exercise document and checks that its model solution
    /// grades as correct.
    pub fn from_json(text: &str) -> Result<Exercise, ExerciseError> {
        let doc: ExerciseDoc = serde_json::from_str(text)?;
        doc.into_exercise()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let start = serde_json::to_value(WireFrame::from_frame(&self.start_frame))
            .expect("frames serialize");
        let expected = match &self.expected {
            ExpectedResult::ScalarAnswers { answers, ordered } => serde_json::json!({
                "mode": "scalar_answers", "answers": answers, "ordered": ordered
            }),
            other => serde_json::json!({
                "mode": other.mode(),
                "frame": WireFrame::from_frame(other.frame().expect("frame mode")),
            }),
        };
        serde_json::json!({
            "id": self.id,
            "prompt": self.prompt,
            "start_frame": start,
            "expected": expected,
            "model_solution": self.model_solution,
            "pitfalls": self.pitfalls,
        })
    }
}

#[derive(Debug, Error)]
pub enum ExerciseError {
    #[error("invalid exercise JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("exercise `{id}`: {source}")]
    Frame { id: String, source: WireError },
    #[error("exercise `{id}`: unknown fixture `{fixture}`")]
    UnknownFixture { id: String, fixture: String },
    #[error("exercise `{id}`: model solution does not grade correct ({detail})")]
    ModelSolution { id: String, detail: String },
    #[error("duplicate exercise id `{0}`")]
    DuplicateId(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: Box<ExerciseError> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FrameSource {
    Fixture(String),
    Frame(WireFrame),
}

#[derive(Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum ExpectedDoc {
    ExactFrame { frame: WireFrame },
    FrameUpToRowOrder { frame: WireFrame },
    ScalarAnswers {
        answers: Vec<Answer>,
        #[serde(default)]
        ordered: bool,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExerciseDoc {
    id: String,
    prompt: String,
    start_frame: FrameSource,
    expected: ExpectedDoc,
    model_solution: String,
    #[serde(default)]
    pitfalls: Vec<PitfallId>,
}

impl ExerciseDoc {
    fn into_exercise(self) -> Result<Exercise, ExerciseError> {
        let id = self.id;
        let frame = |w: WireFrame| {
            w.to_frame().map_err(|source| ExerciseError::Frame {
                id: id.clone(),
                source,
            })
        };
        let start_frame = match self.start_frame {
            FrameSource::Fixture(name) => {
                fixtures::by_id(&name).ok_or_else(|| ExerciseError::UnknownFixture {
                    id: id.clone(),
                    fixture: name,
                })?
            }
            FrameSource::Frame(w) => frame(w)?,
        };
        let expected = match self.expected {
            ExpectedDoc::ExactFrame { frame: w } => ExpectedResult::ExactFrame(frame(w)?),
            ExpectedDoc::FrameUpToRowOrder { frame: w } => ExpectedResult::FrameUpToRowOrder(frame(w)?),
            ExpectedDoc::ScalarAnswers { answers, ordered } => {
                ExpectedResult::ScalarAnswers { answers, ordered }
            }
        };
        let ex = Exercise {
            id,
            prompt: self.prompt,
            start_frame,
            expected,
            model_solution: self.model_solution,
            pitfalls: self.pitfalls,
        };
        let report = grade(&ex, &ex.model_solution);
        if report.verdict != Verdict::Correct {
            return Err(ExerciseError::ModelSolution {
                id: ex.id.clone(),
                detail: report.summary_line(),
            });
        }
        Ok(ex)
    }
}

/// Parses a document holding one exercise or an array of them.
pub fn parse_exercises(text: &str) -> Result<Vec<Exercise>, ExerciseError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let docs: Vec<ExerciseDoc> = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value)?,
        other => vec![serde_json::from_value(other)?],
    };
    let mut out: Vec<Exercise> = Vec::with_capacity(docs.len());
    for doc in docs {
        let ex = doc.into_exercise()?;
        if out.iter().any(|e| e.id == ex.id) {
            return Err(ExerciseError::DuplicateId(ex.id));
        }
        out.push(ex);
    }
    Ok(out)
}

pub fn builtin_exercises() -> Vec<Exercise> {
    parse_exercises(BUILTIN_JSON).expect("built-in exercises are valid")
}

pub fn find_exercise<'a>(bank: &'a [Exercise], id: &str) -> Option<&'a Exercise> {
    bank.iter().find(|e| e.id == id)
}

pub fn load_exercise_file(path: &Path) -> Result<Vec<Exercise>, ExerciseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExerciseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_exercises(&text).map_err(|e| ExerciseError::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// Loads every `*.json` file in a directory, in file-name order.
pub fn load_exercise_dir(dir: &Path) -> Result<Vec<Exercise>, ExerciseError> {
    let io_err = |source| ExerciseError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out: Vec<Exercise> = Vec::new();
    for p in paths {
        for ex in load_exercise_file(&p)? {
            if out.iter().any(|e| e.id == ex.id) {
                return Err(ExerciseError::DuplicateId(ex.id));
            }
            out.push(ex);
        }
    }
    Ok(out)
}
