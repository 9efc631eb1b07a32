#ifndef QTRIPLE_H
#define QTRIPLE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Zero is success.
 */
typedef enum QtStatus {
  QT_STATUS_OK = 0,
  QT_STATUS_NULL_POINTER = 1,
  QT_STATUS_INVALID_UTF8 = 2,
  QT_STATUS_CONFIG = 3,
  QT_STATUS_DOMAIN = 4,
  QT_STATUS_HYPOTHESIS = 5,
  QT_STATUS_NON_CONVERGENCE = 6,
  QT_STATUS_CONDITIONING = 7,
  QT_STATUS_ITERATION_DIVERGED = 8,
  QT_STATUS_OUT_OF_RANGE = 9,
  QT_STATUS_SOLVER = 10,
  QT_STATUS_PANIC = 11,
} QtStatus;

/**
 * Commands accepted by [`qt_run`].
 */
typedef enum QtCommand {
  /**
   * Use the `command` key of the configuration.
   */
  QT_COMMAND_FROM_CONFIG = 0,
  QT_COMMAND_VERIFY = 1,
  QT_COMMAND_SOLVE_DUAL = 2,
  QT_COMMAND_SOLVE_TRIPLE = 3,
  QT_COMMAND_SOLVE_TRIPLE2 = 4,
  QT_COMMAND_EXAMPLE1 = 5,
  QT_COMMAND_EXAMPLE2 = 6,
} QtCommand;

/**
 * Opaque result of one run.
 */
typedef struct QtRun QtRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Runs `command` on the TOML configuration `config` and stores a new handle
 * in `*out`. Nothing is written to disk.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QtStatus qt_run(const char *config, enum QtCommand command, struct QtRun **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `run` must come from [`qt_run`] and not have been freed.
 */
void qt_run_free(struct QtRun *run);

/**
 * Number of `(k, u, psi)` samples.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
size_t qt_run_len(const struct QtRun *run);

/**
 * Reads sample `index`.
 *
 * # Safety
 * `run` must be a live handle; the output pointers must be valid.
 */
enum QtStatus qt_run_sample(const struct QtRun *run,
                            size_t index,
                            int64_t *k,
                            double *u,
                            double *psi);

/**
 * Largest residual of the run, or NaN for a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
double qt_run_max_residual(const struct QtRun *run);

/**
 * 1 when every check met its threshold, else 0.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
int32_t qt_run_passed(const struct QtRun *run);

/**
 * Human-readable summary; valid until the handle is freed.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
const char *qt_run_summary(const struct QtRun *run);

/**
 * `J_nu(z; qb)` for the third Jackson q-Bessel function.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QtStatus qt_qbessel3(double nu, double z, double qb, double *out);

/**
 * Message for the last failure on this thread; empty if none.
 * Valid until the next call on the same thread.
 */
const char *qt_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTRIPLE_H */
