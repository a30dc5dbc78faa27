//! Pipeline evaluation with three-valued missing-value logic.

pub mod eval;
pub mod logic;
pub mod stats;
pub mod verbs;

use std::fmt;

use thiserror::Error;

use crate::frame::{diff_frames, CubeFrame, FrameDiff, FrameError, Lineage};
use crate::lang::{Pipeline, Span, Stage, Verb};

pub use logic::Logical;
pub use verbs::{
    apply_arrange, apply_filter, apply_group_by, apply_mutate, apply_select, apply_summarize,
    partition, VerbOutput,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalErrorKind {
    UnknownColumn { name: String, nearest: Option<String> },
    UnknownFunction { name: String, nearest: Option<String> },
    TypeError { message: String },
    LengthMismatch { expected: usize, got: usize },
    DescOutsideArrange,
    ArrangeKey { found: String },
    GroupKey { found: String },
    SelectDropsGroupKey { name: String },
    NonScalarSummary { expr: String },
    ProbsOutOfRange { value: String },
    Arity { message: String },
    NonFinite,
    Frame(FrameError),
}

impl EvalErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            EvalErrorKind::UnknownColumn { .. } => "UnknownColumn",
            EvalErrorKind::UnknownFunction { .. } => "UnknownFunction",
            EvalErrorKind::TypeError { .. } => "TypeError",
            EvalErrorKind::LengthMismatch { .. } => "LengthMismatch",
            EvalErrorKind::DescOutsideArrange => "DescOutsideArrange",
            EvalErrorKind::ArrangeKey { .. } => "ArrangeKey",
            EvalErrorKind::GroupKey { .. } => "GroupKey",
            EvalErrorKind::SelectDropsGroupKey { .. } => "SelectDropsGroupKey",
            EvalErrorKind::NonScalarSummary { .. } => "NonScalarSummary",
            EvalErrorKind::ProbsOutOfRange { .. } => "ProbsOutOfRange",
            EvalErrorKind::Arity { .. } => "Arity",
            EvalErrorKind::NonFinite => "NonFinite",
            EvalErrorKind::Frame(FrameError::DuplicateColumn(_)) => "DuplicateColumn",
            EvalErrorKind::Frame(_) => "FrameError",
        }
    }
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalErrorKind::UnknownColumn { name, nearest } => {
                write!(f, "unknown column `{name}`")?;
                if let Some(n) = nearest {
                    write!(f, " (nearest match: `{n}`)")?;
                }
                Ok(())
            }
            EvalErrorKind::UnknownFunction { name, .. } => write!(f, "unknown function `{name}`"),
            EvalErrorKind::TypeError { message } => f.write_str(message),
            EvalErrorKind::LengthMismatch { expected, got } => write!(
                f,
                "expected {expected} value{} (one per row) or a single value, got {got}",
                if *expected == 1 { "" } else { "s" }
            ),
            EvalErrorKind::DescOutsideArrange => f.write_str("desc() can only be used inside arrange()"),
            EvalErrorKind::ArrangeKey { found } => {
                write!(f, "arrange() cannot sort by `{found}`")
            }
            EvalErrorKind::GroupKey { found } => write!(f, "group_by() cannot group by `{found}`"),
            EvalErrorKind::SelectDropsGroupKey { name } => {
                write!(f, "select() would drop the grouping column `{name}`")
            }
            EvalErrorKind::NonScalarSummary { expr } => {
                write!(f, "`{expr}` does not reduce each group to a single value")
            }
            EvalErrorKind::ProbsOutOfRange { value } => {
                write!(f, "probs must be between 0 and 1, got {value}")
            }
            EvalErrorKind::Arity { message } => f.write_str(message),
            EvalErrorKind::NonFinite => f.write_str("arithmetic result is too large"),
            EvalErrorKind::Frame(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub span: Span,
    pub hint: Option<String>,
    /// Index of the failing stage, when raised by a pipeline.
    pub stage: Option<usize>,
}

impl EvalError {
    pub fn new(kind: EvalErrorKind, span: Span) -> EvalError {
        EvalError {
            kind,
            span,
            hint: None,
            stage: None,
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> EvalError {
        self.hint = Some(hint.into());
        self
    }
}

/// Snapshot of one verb application.
#[derive(Debug, Clone)]
pub struct StageTrace {
    pub stage: Stage,
    pub input: CubeFrame,
    pub output: CubeFrame,
    pub lineage: Lineage,
    pub diff: FrameDiff,
    pub notes: Vec<String>,
}

impl StageTrace {
    /// Re-applies the verb and compares with the recorded output.
    pub fn recheck(&self) -> bool {
        apply_stage(&self.input, &self.stage).is_ok_and(|out| out.frame == self.output)
    }
}

pub fn apply_stage(frame: &CubeFrame, stage: &Stage) -> Result<VerbOutput, EvalError> {
    match &stage.verb {
        Verb::Filter(p) => apply_filter(frame, p),
        Verb::Select { mode, items } => apply_select(frame, *mode, items),
        Verb::Mutate(a) => apply_mutate(frame, a),
        Verb::Arrange(k) => apply_arrange(frame, k),
        Verb::GroupBy(k) => apply_group_by(frame, k),
        Verb::Summarize(e) => apply_summarize(frame, e),
    }
}

/// Outcome of running a pipeline: the traces of every stage that completed,
/// and the error that stopped it, if any.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub traces: Vec<StageTrace>,
    pub error: Option<EvalError>,
}

pub fn run_pipeline(frame: &CubeFrame, pipeline: &Pipeline) -> PipelineRun {
    let mut traces: Vec<StageTrace> = Vec::with_capacity(pipeline.stages.len());
    for (i, stage) in pipeline.stages.iter().enumerate() {
        let input = traces.last().map_or(frame, |t| &t.output);
        let result = apply_stage(input, stage).and_then(|out| {
            let diff = diff_frames(input, &out.frame, &out.lineage)
                .map_err(|e| EvalError::new(EvalErrorKind::Frame(e), stage.span))?;
            Ok((out, diff))
        });
        match result {
            Ok((out, diff)) => {
                let trace = StageTrace {
                    stage: stage.clone(),
                    input: input.clone(),
                    output: out.frame,
                    lineage: out.lineage,
                    diff,
                    notes: out.notes,
                };
                traces.push(trace);
            }
            Err(mut e) => {
                e.stage = Some(i);
                if e.span.is_empty() {
                    e.span = stage.span;
                }
                return PipelineRun {
                    traces,
                    error: Some(e),
                };
            }
        }
    }
    PipelineRun {
        traces,
        error: None,
    }
}

/// Applies the stages left to right. The input frame is never modified.
pub fn eval_pipeline(
    frame: &CubeFrame,
    pipeline: &Pipeline,
) -> Result<(CubeFrame, Vec<StageTrace>), EvalError> {
    let run = run_pipeline(frame, pipeline);
    if let Some(e) = run.error {
        return Err(e);
    }
    let result = run
        .traces
        .last()
        .map_or_else(|| frame.clone(), |t| t.output.clone());
    Ok((result, run.traces))
}
