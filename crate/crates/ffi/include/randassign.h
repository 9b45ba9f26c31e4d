#ifndef RANDASSIGN_H
#define RANDASSIGN_H

/* Generated by cbindgen from randassign-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every FFI call.
 */
typedef enum {
  RANDASSIGN_STATUS_OK = 0,
  RANDASSIGN_STATUS_FAIL = 1,
  RANDASSIGN_STATUS_INVALID_INPUT = 2,
  RANDASSIGN_STATUS_BUDGET_EXCEEDED = 3,
  RANDASSIGN_STATUS_MISUSE = 4,
} randassign_status;

/**
 * Opaque handle to a validated preference profile.
 */
typedef struct randassign_profile randassign_profile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread; valid until the next failing call.
 */
const char *randassign_last_error(void);

/**
 * Release a string allocated by this library.
 *
 * # Safety
 * `s` must have been returned by a `randassign_*` function and not freed
 * before.
 */
void randassign_string_free(char *s);

/**
 * Parse a profile document (JSON) into an opaque handle.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
randassign_status randassign_profile_parse(const char *json, randassign_profile **out);

/**
 * Number of agents (= items) in the profile; 0 for a null handle.
 *
 * # Safety
 * `profile` must be a live handle from [`randassign_profile_parse`].
 */
uintptr_t randassign_profile_size(const randassign_profile *profile);

/**
 * Release a profile handle.
 *
 * # Safety
 * `profile` must come from [`randassign_profile_parse`] and not be freed
 * twice.
 */
void randassign_profile_free(randassign_profile *profile);

/**
 * Run a mechanism; `options_json` may be NULL. The assignment document is
 * returned through `out_json`.
 *
 * # Safety
 * Pointer arguments must satisfy the usual contracts described above.
 */
randassign_status randassign_run(const randassign_profile *profile,
                                 const char *mechanism,
                                 const char *options_json,
                                 char **out_json);

/**
 * Check a property of an assignment document. Returns `Ok` when it holds
 * and `Fail` when it does not; `out_json` carries the verdict and witness
 * either way.
 *
 * # Safety
 * Pointer arguments must satisfy the usual contracts described above.
 */
randassign_status randassign_check(const randassign_profile *profile,
                                   const char *property,
                                   const char *assignment_json,
                                   char **out_json);

/**
 * Decompose an assignment into deterministic assignments; when
 * `base_property` is non-NULL the components are restricted to that
 * property and infeasibility returns `Fail`.
 *
 * # Safety
 * Pointer arguments must satisfy the usual contracts described above.
 */
randassign_status randassign_decompose(const randassign_profile *profile,
                                       const char *assignment_json,
                                       const char *base_property,
                                       char **out_json);

/**
 * Replay a fixture audit; the report (one line per checked rational) is
 * returned as JSON. Diverged audits return `Fail`.
 *
 * # Safety
 * Pointer arguments must satisfy the usual contracts described above.
 */
randassign_status randassign_audit(const char *fixture, char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RANDASSIGN_H */
