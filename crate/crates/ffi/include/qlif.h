#ifndef QLIF_H
#define QLIF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QlifStatus {
  QLIF_STATUS_OK = 0,
  QLIF_STATUS_NULL_POINTER = 1,
  QLIF_STATUS_INVALID_ARGUMENT = 2,
  QLIF_STATUS_CAPACITY = 3,
  QLIF_STATUS_NUMERICAL = 4,
  QLIF_STATUS_BUFFER_TOO_SMALL = 5,
  QLIF_STATUS_IO = 6,
  QLIF_STATUS_PANIC = 7,
} QlifStatus;

/**
 * Initial product or ground state for a trace.
 */
typedef enum QlifInitial {
  /**
   * Alternating up/down starting with up on site 0.
   */
  QLIF_INITIAL_NEEL = 0,
  QLIF_INITIAL_ALL_UP = 1,
  /**
   * Ground state of the same Hamiltonian the trace evolves under.
   */
  QLIF_INITIAL_GROUND_STATE = 2,
} QlifInitial;

/**
 * Exact-diagonalization engine with an eigensystem cache.
 */
typedef struct QlifEdSolver QlifEdSolver;

/**
 * Model parameters `(L, J, B, h_z)`.
 */
typedef struct QlifHamiltonian QlifHamiltonian;

/**
 * Output buffers for a trace. Each array must hold `capacity` values;
 * `t_d` is required, the others may be null.
 */
typedef struct QlifTraceBuffers {
  uintptr_t capacity;
  double *times;
  double *t_d;
  double *s_full;
  double *s_frozen;
  double *integral;
  /**
   * Number of samples written.
   */
  uintptr_t len;
} QlifTraceBuffers;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *qlif_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qlif_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QlifStatus qlif_hamiltonian_new(uintptr_t sites,
                                     double coupling,
                                     double transverse,
                                     double longitudinal,
                                     struct QlifHamiltonian **out);

/**
 * # Safety
 * `h` must come from [`qlif_hamiltonian_new`] and not be used afterwards.
 * Null is accepted.
 */
void qlif_hamiltonian_free(struct QlifHamiltonian *h);

/**
 * Lieb-Robinson bound `2eJ` and maximal group velocity of the model.
 *
 * # Safety
 * `h` must be a live handle; the output pointers must be writable.
 */
enum QlifStatus qlif_velocity_table(const struct QlifHamiltonian *h,
                                    double *lieb_robinson,
                                    double *max_group);

/**
 * Von Neumann entropy of one spin with Bloch vector `(x, y, z)`.
 */
double qlif_bloch_entropy(double x, double y, double z);

/**
 * Number of samples on the grid `0, step, 2 step, ... <= t_max`, or 0 if
 * the grid is invalid.
 */
uintptr_t qlif_time_points(double step, double t_max);

/**
 * ED solver accepting chains up to `cap` sites; 0 selects the default cap.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QlifStatus qlif_ed_solver_new(uintptr_t cap, struct QlifEdSolver **out);

/**
 * # Safety
 * `s` must come from [`qlif_ed_solver_new`] and not be used afterwards.
 * Null is accepted.
 */
void qlif_ed_solver_free(struct QlifEdSolver *s);

/**
 * Exact QLIF trace `T_d(t)` for freezing `frozen_site` and observing
 * `obs_site`. `solver` may be null, in which case a temporary one is used.
 *
 * # Safety
 * `h` must be a live handle, `solver` null or live, and `buf` must point to
 * buffers sized as documented on [`QlifTraceBuffers`].
 */
enum QlifStatus qlif_trace_ed(const struct QlifEdSolver *solver,
                              const struct QlifHamiltonian *h,
                              uintptr_t frozen_site,
                              uintptr_t obs_site,
                              enum QlifInitial initial,
                              double step,
                              double t_max,
                              struct QlifTraceBuffers *buf);

/**
 * TEBD QLIF trace with Trotter step `dt` and bond cap `chi`. The sampling
 * `step` must be a multiple of `dt`.
 *
 * # Safety
 * `h` must be a live handle and `buf` must point to buffers sized as
 * documented on [`QlifTraceBuffers`].
 */
enum QlifStatus qlif_trace_mps(const struct QlifHamiltonian *h,
                               uintptr_t frozen_site,
                               uintptr_t obs_site,
                               enum QlifInitial initial,
                               double dt,
                               uintptr_t chi,
                               double step,
                               double t_max,
                               struct QlifTraceBuffers *buf);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLIF_H */
