/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SZZ_H
#define SZZ_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SzzStatus {
  SZZ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SZZ_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SZZ_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad option value, such as an unknown variant or blame mode.
   */
  SZZ_STATUS_USAGE = 3,
  /**
   * Unreadable input, unknown commit, corrupt history and the like.
   */
  SZZ_STATUS_DATA = 4,
  /**
   * The version-control backend could not be used.
   */
  SZZ_STATUS_BACKEND = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  SZZ_STATUS_INTERNAL = 6,
} SzzStatus;

/**
 * Loaded repository history.
 */
typedef struct SzzHistory SzzHistory;

/**
 * Trained linker classifier.
 */
typedef struct SzzModel SzzModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. Owned by the
 * library; valid until the next call on this thread.
 */
const char *szz_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void szz_string_free(char *s);

/**
 * Loads a git working tree or JSON history fixture.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SzzStatus szz_history_load(const char *path, bool first_parent, struct SzzHistory **out);

/**
 * Number of commits in the history; 0 for null.
 *
 * # Safety
 * `history` must be null or a live handle.
 */
size_t szz_history_len(const struct SzzHistory *history);

/**
 * # Safety
 * `history` must be null or a handle from [`szz_history_load`] not yet freed.
 */
void szz_history_free(struct SzzHistory *history);

/**
 * Runs one SZZ variant (`B`, `AG`, `L`, `R`, `X`) on a fixing commit and
 * writes the candidate report as JSON to `out_json`.
 *
 * # Safety
 * Pointers must be valid; `skip_list` may be null.
 */
enum SzzStatus szz_run_variant(const struct SzzHistory *history,
                               const char *commit,
                               const char *variant,
                               const char *skip_list,
                               char **out_json);

/**
 * Blames the lines a fixing commit removed or changed. `mode` is `plain`,
 * `skip` or `graph`; the result is JSON in `out_json`.
 *
 * # Safety
 * Pointers must be valid; `skip_list` may be null.
 */
enum SzzStatus szz_blame(const struct SzzHistory *history,
                         const char *commit,
                         const char *mode,
                         const char *skip_list,
                         char **out_json);

/**
 * Loads a model written by `szz train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SzzStatus szz_model_load(const char *path, struct SzzModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`szz_model_load`] not yet freed.
 */
void szz_model_free(struct SzzModel *model);

/**
 * Number of raw features a model expects.
 */
size_t szz_feature_count(void);

/**
 * Scores one unscaled feature vector of length [`szz_feature_count`].
 * `out_accepted` may be null.
 *
 * # Safety
 * `features` must point at `len` doubles; `out_score` must be writable.
 */
enum SzzStatus szz_model_score(const struct SzzModel *model,
                               const double *features,
                               size_t len,
                               double *out_score,
                               bool *out_accepted);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SZZ_H */
