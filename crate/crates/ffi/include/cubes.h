/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CUBES_H
#define CUBES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum CubesStatus {
  CUBES_STATUS_OK = 0,
  CUBES_STATUS_NULL_ARGUMENT = 1,
  CUBES_STATUS_INVALID_UTF8 = 2,
  CUBES_STATUS_PARSE_ERROR = 3,
  CUBES_STATUS_EVAL_ERROR = 4,
  CUBES_STATUS_INVALID_DATA = 5,
  CUBES_STATUS_OUT_OF_RANGE = 6,
  CUBES_STATUS_UNKNOWN_EXERCISE = 7,
  CUBES_STATUS_PANIC = 99,
} CubesStatus;

/**
 * An immutable frame.
 */
typedef struct CubesFrame CubesFrame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The classroom reference kit (3 rows, 6 colours).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum CubesStatus cubes_frame_figure1(struct CubesFrame **out);

/**
 * Parses CSV text with a header row and `NA` for missing cells.
 *
 * # Safety
 * `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum CubesStatus cubes_frame_from_csv(const char *csv, struct CubesFrame **out);

/**
 * Parses a wire-format JSON frame.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CubesStatus cubes_frame_from_json(const char *json, struct CubesFrame **out);

/**
 * # Safety
 * `frame` must come from this library; `out` must be writable.
 */
enum CubesStatus cubes_frame_to_csv(const struct CubesFrame *frame_, char **out);

/**
 * # Safety
 * `frame` must come from this library; `out` must be writable.
 */
enum CubesStatus cubes_frame_to_json(const struct CubesFrame *frame_, char **out);

/**
 * # Safety
 * `frame` must come from this library; `nrows` and `ncols` must be writable.
 */
enum CubesStatus cubes_frame_dimensions(const struct CubesFrame *frame_,
                                        size_t *nrows,
                                        size_t *ncols);

/**
 * Reads one cell (0-based). Missing cells set `*is_na` and leave `*value` at 0.
 *
 * # Safety
 * `frame` must come from this library; `value` and `is_na` must be writable.
 */
enum CubesStatus cubes_frame_cell(const struct CubesFrame *frame_,
                                  size_t row,
                                  size_t col,
                                  double *value,
                                  bool *is_na);

/**
 * Column name (0-based) as a new string.
 *
 * # Safety
 * `frame` must come from this library; `out` must be writable.
 */
enum CubesStatus cubes_frame_column_name(const struct CubesFrame *frame_, size_t col, char **out);

/**
 * Runs a pipeline (`data |> ...`, or stages one per line) over `frame`.
 * The input frame is not modified.
 *
 * # Safety
 * `frame` must come from this library; `source` must be NUL-terminated;
 * `out` must be writable.
 */
enum CubesStatus cubes_eval_pipeline(const struct CubesFrame *frame_,
                                     const char *source,
                                     struct CubesFrame **out);

/**
 * Grades a submission against a built-in exercise and returns the report
 * as JSON. A wrong answer is still `CUBES_STATUS_OK`; read the verdict.
 *
 * # Safety
 * Strings must be NUL-terminated; `report_json` must be writable.
 */
enum CubesStatus cubes_grade(const char *exercise_id, const char *submission, char **report_json);

/**
 * Message for the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread; do not free it.
 */
const char *cubes_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed once.
 */
void cubes_string_free(char *s);

/**
 * # Safety
 * `frame` must be NULL or a handle returned by this library, freed once.
 */
void cubes_frame_free(struct CubesFrame *frame);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUBES_H */
