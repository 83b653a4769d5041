#ifndef PRODSAT_H
#define PRODSAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ProdsatStatus {
  PRODSAT_STATUS_OK = 0,
  /**
   * The core has no dimer covering, or the system has no solution.
   */
  PRODSAT_STATUS_UNSATISFIED = 1,
  PRODSAT_STATUS_NULL_POINTER = 2,
  PRODSAT_STATUS_INVALID_ARGUMENT = 3,
  PRODSAT_STATUS_RESOURCE_LIMIT = 4,
  PRODSAT_STATUS_DEGENERATE = 5,
  PRODSAT_STATUS_PATH_FAILURE = 6,
  PRODSAT_STATUS_NOT_ZERO_DIMENSIONAL = 7,
  PRODSAT_STATUS_PARSE = 8,
  PRODSAT_STATUS_IO = 9,
  PRODSAT_STATUS_INTERNAL = 10,
  PRODSAT_STATUS_PANIC = 11,
} ProdsatStatus;

/**
 * A k-QSAT instance.
 */
typedef struct ProdsatInstance ProdsatInstance;

/**
 * A satisfying product state.
 */
typedef struct ProdsatSolution ProdsatSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library and valid until the next call on the same thread.
 */
const char *prodsat_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library that was not freed.
 */
void prodsat_string_free(char *s);

/**
 * Random instance with `m` clauses on `n` variables. `denom_bound = 0` gives
 * float amplitudes, a positive value exact rational ones.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum ProdsatStatus prodsat_instance_random(size_t k,
                                           size_t n,
                                           size_t m,
                                           uint64_t seed,
                                           int64_t denom_bound,
                                           struct ProdsatInstance **out);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` valid for writes.
 */
enum ProdsatStatus prodsat_instance_from_json(const char *json, struct ProdsatInstance **out);

/**
 * Serialized instance; free the result with [`prodsat_string_free`].
 *
 * # Safety
 * `inst` must be a live handle and `out` valid for writes.
 */
enum ProdsatStatus prodsat_instance_to_json(const struct ProdsatInstance *inst, char **out);

/**
 * # Safety
 * `inst` must be null or a handle that was not freed.
 */
void prodsat_instance_free(struct ProdsatInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle; the out pointers must be valid for writes.
 */
enum ProdsatStatus prodsat_instance_size(const struct ProdsatInstance *inst,
                                         size_t *n_vars,
                                         size_t *n_clauses);

/**
 * Size of the 2-core left by leaf removal.
 *
 * # Safety
 * `inst` must be a live handle; the out pointers must be valid for writes.
 */
enum ProdsatStatus prodsat_core_size(const struct ProdsatInstance *inst,
                                     size_t *core_vars,
                                     size_t *core_clauses);

/**
 * Ground-space dimension of `H`; exact for exact instances.
 *
 * # Safety
 * `inst` must be a live handle and `out` valid for writes.
 */
enum ProdsatStatus prodsat_kernel_dimension(const struct ProdsatInstance *inst,
                                            double tol,
                                            size_t *out);

/**
 * Searches for a product state. Returns `UNSATISFIED` with `*out = NULL` when
 * the core has no dimer covering.
 *
 * # Safety
 * `inst` must be a live handle and `out` valid for writes.
 */
enum ProdsatStatus prodsat_solve(const struct ProdsatInstance *inst,
                                 uint64_t seed,
                                 double tol,
                                 struct ProdsatSolution **out);

/**
 * # Safety
 * `sol` must be null or a handle that was not freed.
 */
void prodsat_solution_free(struct ProdsatSolution *sol);

/**
 * # Safety
 * `sol` must be a live handle.
 */
size_t prodsat_solution_n_qubits(const struct ProdsatSolution *sol);

/**
 * # Safety
 * `sol` must be a live handle.
 */
double prodsat_solution_max_residual(const struct ProdsatSolution *sol);

/**
 * Qubit `i` as `a|0⟩ + b|1⟩`, written to `amps` as `[re a, im a, re b, im b]`.
 *
 * # Safety
 * `sol` must be a live handle and `amps` valid for four writes.
 */
enum ProdsatStatus prodsat_solution_qubit(const struct ProdsatSolution *sol,
                                          size_t i,
                                          double *amps);

/**
 * Re-evaluates the solution against `inst`.
 *
 * # Safety
 * Both handles must be live and `out` valid for writes.
 */
enum ProdsatStatus prodsat_solution_residual(const struct ProdsatSolution *sol,
                                             const struct ProdsatInstance *inst,
                                             double *out);

/**
 * Mixed volume of a square system given as text, one polynomial per line.
 *
 * # Safety
 * `system` must be a nul-terminated string and `out` valid for writes.
 */
enum ProdsatStatus prodsat_mixed_volume(const char *system, uint64_t *out);

/**
 * Exact test for the absence of common complex roots. Returns `UNSATISFIED`
 * when the system has none and `OK` otherwise.
 *
 * # Safety
 * `system` must be a nul-terminated string.
 */
enum ProdsatStatus prodsat_system_unsat(const char *system);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRODSAT_H */
