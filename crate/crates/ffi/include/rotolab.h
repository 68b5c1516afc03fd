/* C interface for the rotolab library. */

#ifndef ROTOLAB_H
#define ROTOLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum RlStatus {
  RlStatusOk = 0,
  RlStatusInvalidArgument = 1,
  RlStatusParseError = 2,
  RlStatusIoError = 3,
  RlStatusNumericalError = 4,
  RlStatusUnsupported = 5,
} RlStatus;

/**
 * Opaque handle to a parsed circuit/observable pair.
 */
typedef struct RlProblem RlProblem;

/**
 * Per-coordinate sinusoid fit plus first/second derivatives.
 */
typedef struct RlFit {
  double amplitude;
  double phase;
  double offset;
  double gradient;
  double second_derivative;
} RlFit;

/**
 * Noise configuration for the measurement oracle. `kind` 0 = exact
 * (sigma/shots ignored), 1 = Gaussian with standard deviation `sigma`,
 * 2 = finite shots with `shots` samples per evaluation.
 */
typedef struct RlNoise {
  uint32_t kind;
  double sigma;
  uint64_t shots;
} RlNoise;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rl_last_error_message(void);

/**
 * Parses a problem description (circuit + observable) from text.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum RlStatus rl_problem_parse(const char *text, struct RlProblem **out);

/**
 * Loads a problem description from a file path.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum RlStatus rl_problem_load(const char *path, struct RlProblem **out);

/**
 * Releases a problem handle. NULL is a no-op.
 *
 * # Safety
 * `problem` must have come from `rl_problem_parse`/`rl_problem_load` and
 * must not be used afterwards.
 */
void rl_problem_free(struct RlProblem *problem);

/**
 * Number of trainable parameters of the problem's circuit.
 *
 * # Safety
 * `problem` must be a live handle; returns 0 on NULL.
 */
size_t rl_problem_param_dim(const struct RlProblem *problem);

/**
 * Number of qubits of the problem's circuit.
 *
 * # Safety
 * `problem` must be a live handle; returns 0 on NULL.
 */
size_t rl_problem_qubit_count(const struct RlProblem *problem);

/**
 * Noise-free objective value at `theta`.
 *
 * # Safety
 * `theta` must point to `len` doubles; `out` must be a valid pointer.
 */
enum RlStatus rl_objective(const struct RlProblem *problem,
                           const double *theta,
                           size_t len,
                           double *out);

/**
 * Fits the univariate sinusoid along coordinate `j` at `theta` (noise-free)
 * and returns amplitude, phase, offset, and both derivatives.
 *
 * # Safety
 * `theta` must point to `len` doubles; `out` must be a valid pointer.
 */
enum RlStatus rl_fit_coordinate(const struct RlProblem *problem,
                                const double *theta,
                                size_t len,
                                size_t j,
                                struct RlFit *out);

/**
 * Runs an optimizer and reports the final parameters, the final noise-free
 * objective value, and (optionally) the per-iteration objective series.
 *
 * `optimizer`: 0 = coordinate minimization, 1 = RCD, 2 = SGD, 3 = SPSA,
 * 4 = RSGF. `alpha`/`c_nu` configure the baselines and are ignored by
 * coordinate minimization. `f_series`, when non-NULL, receives up to
 * `f_capacity` values (iterate 0 first); `f_written` reports the count.
 *
 * # Safety
 * All pointers must be valid for their stated lengths; `theta0` and
 * `final_theta` must both hold `len` doubles.
 */
enum RlStatus rl_optimize(const struct RlProblem *problem,
                          uint32_t optimizer,
                          double alpha,
                          double c_nu,
                          size_t iterations,
                          uint64_t seed,
                          struct RlNoise noise,
                          const double *theta0,
                          size_t len,
                          double *final_theta,
                          double *final_f,
                          double *f_series,
                          size_t f_capacity,
                          size_t *f_written);

/**
 * Shot budget to reach accuracy `eps`: iteration count, shots per
 * evaluation, and the total (three evaluations per iteration). `mu` is
 * only used when `suboptimal` is nonzero.
 *
 * # Safety
 * The three out-pointers must be valid.
 */
enum RlStatus rl_shot_budget(double eps,
                             size_t d,
                             double lambda_max,
                             double lambda_bar,
                             double delta0,
                             uint32_t suboptimal,
                             double mu,
                             uint64_t *out_iterations,
                             uint64_t *out_shots_per_iter,
                             uint64_t *out_total_shots);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROTOLAB_H */
