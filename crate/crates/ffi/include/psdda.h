#ifndef PSDDA_H
#define PSDDA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes shared by every function in the API.
 */
typedef enum PsddaStatus {
  PSDDA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PSDDA_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or a string was not valid UTF-8.
   */
  PSDDA_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The configuration or problem instance failed validation.
   */
  PSDDA_STATUS_VALIDATION = 3,
  /**
   * The iteration failed while running.
   */
  PSDDA_STATUS_RUNTIME = 4,
  /**
   * Reading or writing a file failed.
   */
  PSDDA_STATUS_IO = 5,
  /**
   * A caller-provided buffer is smaller than required.
   */
  PSDDA_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A panic was caught at the boundary.
   */
  PSDDA_STATUS_PANIC = 7,
} PsddaStatus;

/**
 * Opaque validated problem instance.
 */
typedef struct PsddaExperiment PsddaExperiment;

/**
 * Opaque delay-augmented network.
 */
typedef struct PsddaNetwork PsddaNetwork;

/**
 * Opaque result of a run.
 */
typedef struct PsddaRun PsddaRun;

/**
 * Convergence constants for a network with `nodes` nodes, window `window`
 * and maximum delay `tau_max`. Values that leave the `f64` range are `inf`
 * or `0`; the `ln_` fields stay finite.
 */
typedef struct PsddaConstants {
  uint64_t omega;
  double c;
  double ln_c;
  double lambda;
  double one_minus_lambda;
  double ln_one_minus_lambda;
  double delta_lb;
  double ln_delta_lb;
  double gamma;
  double ln_gamma;
} PsddaConstants;

/**
 * One row of the per-node metrics table. `node` is 1-based.
 */
typedef struct PsddaRecord {
  uint64_t t;
  uint64_t node;
  double f_err;
  double consensus_err;
  double alpha;
  double bound;
} PsddaRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next API call on the same thread.
 */
const char *psdda_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *psdda_version(void);

/**
 * Fills `out` with the convergence constants for `(nodes, window, tau_max)`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `PsddaConstants`.
 */
enum PsddaStatus psdda_constants(size_t nodes,
                                 size_t window,
                                 size_t tau_max,
                                 struct PsddaConstants *out);

/**
 * Euclidean projection of `v[0..len]` onto the l1 ball of `radius`, written to `out`.
 * `v` and `out` may alias.
 *
 * # Safety
 * `v` and `out` must each be valid for `len` doubles.
 */
enum PsddaStatus psdda_project_l1(const double *v, size_t len, double radius, double *out);

/**
 * Primal recovery step: the minimizer of `<z, x> + |x|^2 / (2 alpha)` over the
 * l1 ball of `radius`, written to `out`. `z` and `out` may alias.
 *
 * # Safety
 * `z` and `out` must each be valid for `len` doubles.
 */
enum PsddaStatus psdda_proximal_step(const double *z,
                                     size_t len,
                                     double alpha,
                                     double radius,
                                     double *out);

/**
 * Builds an experiment from a preset name (`example1`, `quad8`, `sensor8`).
 * `seed` and `iterations` override the preset when non-zero.
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `out` must be writable.
 */
enum PsddaStatus psdda_experiment_from_preset(const char *preset,
                                              uint64_t seed,
                                              size_t iterations,
                                              struct PsddaExperiment **out);

/**
 * Builds an experiment from a TOML run configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum PsddaStatus psdda_experiment_from_toml(const char *toml, struct PsddaExperiment **out);

/**
 * Releases an experiment. Null is ignored.
 *
 * # Safety
 * `exp` must come from this library and not be used afterwards.
 */
void psdda_experiment_free(struct PsddaExperiment *exp);

/**
 * Runs the experiment to completion.
 *
 * # Safety
 * `exp` must be a live handle; `out` must be writable.
 */
enum PsddaStatus psdda_experiment_run(const struct PsddaExperiment *exp, struct PsddaRun **out);

/**
 * Copies the experiment's delay-augmented network into a new handle.
 *
 * # Safety
 * `exp` must be a live handle; `out` must be writable.
 */
enum PsddaStatus psdda_experiment_network(const struct PsddaExperiment *exp,
                                          struct PsddaNetwork **out);

/**
 * Releases a run. Null is ignored.
 *
 * # Safety
 * `run` must come from this library and not be used afterwards.
 */
void psdda_run_free(struct PsddaRun *run);

/**
 * Number of metric rows recorded by the run.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum PsddaStatus psdda_run_record_count(const struct PsddaRun *run, size_t *out);

/**
 * Copies the metric rows into `buf`, which holds `capacity` records.
 * Fails with `BufferTooSmall` when `capacity` is below the record count.
 *
 * # Safety
 * `run` must be a live handle; `buf` must be valid for `capacity` records.
 */
enum PsddaStatus psdda_run_records(const struct PsddaRun *run,
                                   struct PsddaRecord *buf,
                                   size_t capacity);

/**
 * Largest `f(x_i) - f*` across nodes at the final iteration.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum PsddaStatus psdda_run_final_max_f_err(const struct PsddaRun *run, double *out);

/**
 * Writes the metrics table, with its summary comment block, as CSV to `path`.
 *
 * # Safety
 * `run` must be a live handle; `path` must be a NUL-terminated string.
 */
enum PsddaStatus psdda_run_write_csv(const struct PsddaRun *run, const char *path);

/**
 * Releases a network. Null is ignored.
 *
 * # Safety
 * `net` must come from this library and not be used afterwards.
 */
void psdda_network_free(struct PsddaNetwork *net);

/**
 * Node count, augmented dimension and schedule period. Any output may be null.
 *
 * # Safety
 * `net` must be a live handle; non-null outputs must be writable.
 */
enum PsddaStatus psdda_network_shape(const struct PsddaNetwork *net,
                                     size_t *nodes,
                                     size_t *dim,
                                     size_t *period);

/**
 * Writes the augmented matrix in effect at 0-based step `t`, row-major,
 * `dim * dim` doubles.
 *
 * # Safety
 * `net` must be a live handle; `buf` must be valid for `len` doubles.
 */
enum PsddaStatus psdda_network_q(const struct PsddaNetwork *net, size_t t, double *buf, size_t len);

/**
 * Writes the undelayed weight matrix at 0-based step `t`, row-major,
 * `nodes * nodes` doubles.
 *
 * # Safety
 * `net` must be a live handle; `buf` must be valid for `len` doubles.
 */
enum PsddaStatus psdda_network_p(const struct PsddaNetwork *net, size_t t, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSDDA_H */
