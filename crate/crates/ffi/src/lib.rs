//! C ABI for the cubes engine.
//!
//! Frames are opaque `CubesFrame` handles released with `cubes_frame_free`.
//! Every call returns a `CubesStatus`; on failure a message is available from
//! `cubes_last_error_message` on the same thread. Strings returned through
//! `char **` out-parameters belong to the caller and are released with
//! `cubes_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cubes::exercises::{builtin_exercises, find_exercise, grade};
use cubes::frame::{CellValue, CubeFrame};
use cubes::wire::Diagnostic;
use cubes::{eval_pipeline, fixtures, io, lang};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubesStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    EvalError = 4,
    InvalidData = 5,
    OutOfRange = 6,
    UnknownExercise = 7,
    Panic = 99,
}

/// An immutable frame.
pub struct CubesFrame {
    inner: CubeFrame,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: CubesStatus,
    message: String,
}

impl Failure {
    fn new(status: CubesStatus, message: impl Into<String>) -> Failure {
        Failure {
            status,
            message: message.into(),
        }
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CubesStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CubesStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            CubesStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(CubesStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(CubesStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn frame<'a>(p: *const CubesFrame) -> Result<&'a CubeFrame, Failure> {
    p.as_ref()
        .map(|f| &f.inner)
        .ok_or_else(|| Failure::new(CubesStatus::NullArgument, "frame is NULL"))
}

unsafe fn put_frame(out: *mut *mut CubesFrame, f: CubeFrame) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(CubesStatus::NullArgument, "out is NULL"));
    }
    *out = Box::into_raw(Box::new(CubesFrame { inner: f }));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(CubesStatus::NullArgument, "out is NULL"));
    }
    let c = CString::new(s).map_err(|_| Failure::new(CubesStatus::InvalidData, "output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

/// The classroom reference kit (3 rows, 6 colours).
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_figure1(out: *mut *mut CubesFrame) -> CubesStatus {
    guard(|| put_frame(out, fixtures::figure1()))
}

/// Parses CSV text with a header row and `NA` for missing cells.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_from_csv(csv: *const c_char, out: *mut *mut CubesFrame) -> CubesStatus {
    guard(|| {
        let f = io::parse_csv(text(csv, "csv")?)
            .map_err(|e| Failure::new(CubesStatus::InvalidData, e.to_string()))?;
        put_frame(out, f)
    })
}

/// Parses a wire-format JSON frame.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_from_json(json: *const c_char, out: *mut *mut CubesFrame) -> CubesStatus {
    guard(|| {
        let f = io::parse_json(text(json, "json")?)
            .map_err(|e| Failure::new(CubesStatus::InvalidData, e.to_string()))?;
        put_frame(out, f)
    })
}

/// # Safety
/// `frame` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_to_csv(frame_: *const CubesFrame, out: *mut *mut c_char) -> CubesStatus {
    guard(|| put_string(out, io::write_csv(frame(frame_)?)))
}

/// # Safety
/// `frame` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_to_json(frame_: *const CubesFrame, out: *mut *mut c_char) -> CubesStatus {
    guard(|| put_string(out, io::write_json(frame(frame_)?)))
}

/// # Safety
/// `frame` must come from this library; `nrows` and `ncols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_dimensions(
    frame_: *const CubesFrame,
    nrows: *mut usize,
    ncols: *mut usize,
) -> CubesStatus {
    guard(|| {
        let f = frame(frame_)?;
        if nrows.is_null() || ncols.is_null() {
            return Err(Failure::new(CubesStatus::NullArgument, "nrows/ncols is NULL"));
        }
        *nrows = f.nrows();
        *ncols = f.ncols();
        Ok(())
    })
}

/// Reads one cell (0-based). Missing cells set `*is_na` and leave `*value` at 0.
///
/// # Safety
/// `frame` must come from this library; `value` and `is_na` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_cell(
    frame_: *const CubesFrame,
    row: usize,
    col: usize,
    value: *mut f64,
    is_na: *mut bool,
) -> CubesStatus {
    guard(|| {
        let f = frame(frame_)?;
        if value.is_null() || is_na.is_null() {
            return Err(Failure::new(CubesStatus::NullArgument, "value/is_na is NULL"));
        }
        if row >= f.nrows() || col >= f.ncols() {
            return Err(Failure::new(
                CubesStatus::OutOfRange,
                format!("cell ({row}, {col}) is outside a {}x{} frame", f.nrows(), f.ncols()),
            ));
        }
        match f.columns()[col].cells[row] {
            CellValue::Num(v) => {
                *value = v;
                *is_na = false;
            }
            CellValue::Na => {
                *value = 0.0;
                *is_na = true;
            }
        }
        Ok(())
    })
}

/// Column name (0-based) as a new string.
///
/// # Safety
/// `frame` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_column_name(
    frame_: *const CubesFrame,
    col: usize,
    out: *mut *mut c_char,
) -> CubesStatus {
    guard(|| {
        let f = frame(frame_)?;
        let c = f
            .columns()
            .get(col)
            .ok_or_else(|| Failure::new(CubesStatus::OutOfRange, format!("no column {col}")))?;
        put_string(out, c.name.to_string())
    })
}

/// Runs a pipeline (`data |> ...`, or stages one per line) over `frame`.
/// The input frame is not modified.
///
/// # Safety
/// `frame` must come from this library; `source` must be NUL-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_eval_pipeline(
    frame_: *const CubesFrame,
    source: *const c_char,
    out: *mut *mut CubesFrame,
) -> CubesStatus {
    guard(|| {
        let f = frame(frame_)?;
        let src = lang::normalize_source(text(source, "source")?);
        let pipeline = lang::parse_pipeline(&src).map_err(|e| {
            Failure::new(CubesStatus::ParseError, Diagnostic::from(&e).render(&src))
        })?;
        let (result, _) = eval_pipeline(f, &pipeline).map_err(|e| {
            Failure::new(CubesStatus::EvalError, Diagnostic::from(&e).render(&src))
        })?;
        put_frame(out, result)
    })
}

/// Grades a submission against a built-in exercise and returns the report
/// as JSON. A wrong answer is still `CUBES_STATUS_OK`; read the verdict.
///
/// # Safety
/// Strings must be NUL-terminated; `report_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubes_grade(
    exercise_id: *const c_char,
    submission: *const c_char,
    report_json: *mut *mut c_char,
) -> CubesStatus {
    guard(|| {
        let id = text(exercise_id, "exercise_id")?;
        let answer = text(submission, "submission")?;
        let bank = builtin_exercises();
        let ex = find_exercise(&bank, id)
            .ok_or_else(|| Failure::new(CubesStatus::UnknownExercise, format!("no exercise `{id}`")))?;
        let json = serde_json::to_string(&grade(ex, answer)).expect("reports serialize");
        put_string(report_json, json)
    })
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn cubes_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cubes_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `frame` must be NULL or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cubes_frame_free(frame: *mut CubesFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}
