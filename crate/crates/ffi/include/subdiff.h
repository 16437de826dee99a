#ifndef SUBDIFF_H
#define SUBDIFF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `SdcStatus::Ok` is zero.
 */
typedef enum SdcStatus {
  SDC_STATUS_OK = 0,
  SDC_STATUS_NULL_POINTER,
  SDC_STATUS_INVALID_UTF8,
  SDC_STATUS_PARSE,
  SDC_STATUS_VALIDATION,
  SDC_STATUS_DOMAIN,
  SDC_STATUS_NON_STRATEGIC,
  SDC_STATUS_SINGULAR_GRAMIAN,
  SDC_STATUS_QUADRATURE,
  SDC_STATUS_NUMERICAL,
  SDC_STATUS_TRANSFER_MISSED,
  SDC_STATUS_BUFFER_TOO_SMALL,
  SDC_STATUS_IO,
  SDC_STATUS_PANIC,
} SdcStatus;

/**
 * A validated problem.
 */
typedef struct SdcProblem SdcProblem;

/**
 * A synthesized minimum-energy control and its verification.
 */
typedef struct SdcSynthesis SdcSynthesis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a JSON problem description.
 *
 * # Safety
 * `json` must be null or a NUL-terminated string; `out` must be null or
 * valid for one pointer write.
 */
enum SdcStatus sdc_problem_from_json(const char *json, struct SdcProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from `sdc_problem_from_json` that has
 * not been freed.
 */
void sdc_problem_free(struct SdcProblem *problem);

/**
 * `E_{p,q}(z)` for real `z`.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum SdcStatus sdc_mittag_leffler(double p, double q, double z, double *out);

/**
 * Synthesizes the minimum-energy control steering the problem into its
 * target subspace.
 *
 * # Safety
 * `problem` must be a live handle; `out` must be valid for one write.
 */
enum SdcStatus sdc_synthesize(const struct SdcProblem *problem, struct SdcSynthesis **out);

/**
 * Number of control samples (`n_steps + 1`); 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t sdc_synthesis_control_len(const struct SdcSynthesis *s);

/**
 * Copies the control samples into `buf`, which must hold at least
 * `sdc_synthesis_control_len` values.
 *
 * # Safety
 * `s` must be a live handle and `buf` valid for `len` writes.
 */
enum SdcStatus sdc_synthesis_control(const struct SdcSynthesis *s, double *buf, size_t len);

/**
 * `½∫u²`; NaN for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
double sdc_synthesis_energy(const struct SdcSynthesis *s);

/**
 * Distance of the simulated final state to the target; NaN for a null
 * handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
double sdc_synthesis_distance(const struct SdcSynthesis *s);

/**
 * # Safety
 * `s` must be null or a handle from `sdc_synthesize` that has not been
 * freed.
 */
void sdc_synthesis_free(struct SdcSynthesis *s);

/**
 * Strategic-actuator check. Writes 1 or 0 to `strategic`, the number of
 * dead modes to `n_dead`, and up to `cap` of the (1-based) dead modes to
 * `dead`. Returns `BufferTooSmall` when `cap < *n_dead`; the count is
 * still written.
 *
 * # Safety
 * `problem` must be a live handle, `strategic` and `n_dead` valid for one
 * write, and `dead` null (with `cap == 0`) or valid for `cap` writes.
 */
enum SdcStatus sdc_analyze(const struct SdcProblem *problem,
                           int32_t *strategic,
                           size_t *dead,
                           size_t cap,
                           size_t *n_dead);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *sdc_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBDIFF_H */
