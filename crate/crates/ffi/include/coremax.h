#ifndef COREMAX_H
#define COREMAX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CmxAlgorithm {
  CMX_ALGORITHM_BNB = 0,
  CMX_ALGORITHM_WPM1 = 1,
  CMX_ALGORITHM_MSU3 = 2,
} CmxAlgorithm;

typedef enum CmxOutcome {
  CMX_OUTCOME_OPTIMAL = 0,
  CMX_OUTCOME_UNSATISFIABLE = 1,
  CMX_OUTCOME_UNKNOWN = 2,
} CmxOutcome;

typedef enum CmxStatus {
  CMX_STATUS_OK = 0,
  CMX_STATUS_NULL_POINTER = -1,
  CMX_STATUS_PARSE_ERROR = -2,
  CMX_STATUS_INVALID_ARGUMENT = -3,
  /**
   * The result holds no model or cost.
   */
  CMX_STATUS_NO_RESULT = -4,
  CMX_STATUS_BUFFER_TOO_SMALL = -5,
  CMX_STATUS_PANIC = -6,
} CmxStatus;

/**
 * Opaque weighted partial MaxSAT instance.
 */
typedef struct CmxInstance CmxInstance;

/**
 * Opaque solver result.
 */
typedef struct CmxResult CmxResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *cmx_last_error(void);

/**
 * Parse WCNF text. On success `*out` owns a new instance.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a writable pointer.
 */
enum CmxStatus cmx_instance_parse_wcnf(const char *text, struct CmxInstance **out);

/**
 * Empty instance over `num_vars` variables.
 */
struct CmxInstance *cmx_instance_new(size_t num_vars);

/**
 * Append a clause of DIMACS literals. `weight` is ignored when `hard`.
 *
 * # Safety
 * `inst` must come from this API; `lits` must point to `len` integers.
 */
enum CmxStatus cmx_instance_add_clause(struct CmxInstance *inst,
                                       const int32_t *lits,
                                       size_t len,
                                       uint64_t weight,
                                       bool hard);

/**
 * # Safety
 * `inst` must come from this API (or be null) and not be used afterwards.
 */
void cmx_instance_free(struct CmxInstance *inst);

/**
 * Solve `inst`. A nonpositive `timeout_s` means no time limit.
 *
 * # Safety
 * `inst` must come from this API and `out` be a writable pointer.
 */
enum CmxStatus cmx_solve(const struct CmxInstance *inst,
                         enum CmxAlgorithm algorithm,
                         double timeout_s,
                         struct CmxResult **out);

/**
 * # Safety
 * `res` must come from this API and `out` be a writable pointer.
 */
enum CmxStatus cmx_result_outcome(const struct CmxResult *res, enum CmxOutcome *out);

/**
 * Cost of the best model found.
 *
 * # Safety
 * `res` must come from this API and `out` be a writable pointer.
 */
enum CmxStatus cmx_result_cost(const struct CmxResult *res, uint64_t *out);

/**
 * Number of cores the driver extracted.
 *
 * # Safety
 * `res` must come from this API or be null.
 */
size_t cmx_result_num_cores(const struct CmxResult *res);

/**
 * Write the model as DIMACS literals, one per instance variable. `*len`
 * receives the number of literals even when `cap` is too small.
 *
 * # Safety
 * `res` must come from this API, `buf` must hold `cap` integers (or be
 * null when `cap` is 0) and `len` must be writable.
 */
enum CmxStatus cmx_result_model(const struct CmxResult *res, int32_t *buf, size_t cap, size_t *len);

/**
 * # Safety
 * `res` must come from this API (or be null) and not be used afterwards.
 */
void cmx_result_free(struct CmxResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COREMAX_H */
