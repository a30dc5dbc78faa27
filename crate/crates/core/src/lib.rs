//! Classroom data wrangling on cube-grid frames.
//!
//! Small data sets are [`frame::CubeFrame`]s, the pipeline shorthand
//! (`data |> filter(...) |> summarize(...)`) lives in [`lang`], and
//! [`engine`] evaluates it. [`exercises`] grades student answers.

pub mod engine;
pub mod exercises;
pub mod frame;
pub mod io;
pub mod lang;
pub mod render;
pub mod repl;
#[cfg(feature = "service")]
pub mod service;
pub mod wire;

pub use engine::{eval_pipeline, run_pipeline, EvalError, StageTrace};
pub use frame::{fixtures, shape_for, CellValue, ColumnName, CubeFrame, FrameDiff, ShapeGlyph};
pub use lang::{parse_expression, parse_pipeline, ParseError};
