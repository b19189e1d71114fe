#ifndef NXFEM_H
#define NXFEM_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NxfemExample {
  /**
   * Smooth solution across a straight interface, unit coefficients.
   */
  NXFEM_EXAMPLE_ONE = 1,
  /**
   * Circular interface, `u = alpha2 (r^2 - r0^2)` inside.
   */
  NXFEM_EXAMPLE_TWO = 2,
  /**
   * Circular interface, `u = r^2 / alpha1` inside.
   */
  NXFEM_EXAMPLE_THREE = 3,
  /**
   * Parallel straight interfaces, unit coefficients.
   */
  NXFEM_EXAMPLE_MULTI = 4,
} NxfemExample;

typedef enum NxfemSolver {
  NXFEM_SOLVER_DIRECT = 0,
  NXFEM_SOLVER_CG_JACOBI = 1,
  NXFEM_SOLVER_CG_SGS = 2,
  NXFEM_SOLVER_CG_SMG = 3,
  NXFEM_SOLVER_SMG = 4,
} NxfemSolver;

typedef enum NxfemStatus {
  NXFEM_STATUS_OK = 0,
  NXFEM_STATUS_NULL_POINTER = 1,
  NXFEM_STATUS_CONFIG = 2,
  NXFEM_STATUS_DIMENSION = 3,
  NXFEM_STATUS_NOT_CONVERGED = 4,
  NXFEM_STATUS_NUMERICAL = 5,
  NXFEM_STATUS_GEOMETRY = 6,
  NXFEM_STATUS_IO = 7,
  NXFEM_STATUS_PANIC = 8,
} NxfemStatus;

typedef enum NxfemVariant {
  NXFEM_VARIANT_EIGEN = 0,
  NXFEM_VARIANT_LIFTING = 1,
  NXFEM_VARIANT_GHOST = 2,
} NxfemVariant;

/**
 * Opaque problem handle.
 */
typedef struct NxfemProblem NxfemProblem;

/**
 * Outcome of a solve. `rho_star` is NaN when fewer than two iterations ran.
 */
typedef struct NxfemReport {
  size_t iterations;
  double final_residual;
  double rho_star;
  double wall_time;
  bool converged;
} NxfemReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nxfem_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *nxfem_last_error_message(void);

/**
 * Builds and assembles a problem on an `finest_cells` x `finest_cells` mesh.
 *
 * `example` and `variant` take the values of [`NxfemExample`] and [`NxfemVariant`].
 * `alpha1` and `alpha2` are read by examples 2 and 3 only; `interfaces` by the
 * multi-interface example only. `depth` is the number of mesh levels; 0 picks
 * the default for `finest_cells`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum NxfemStatus nxfem_problem_new(int example,
                                   int variant,
                                   double alpha1,
                                   double alpha2,
                                   size_t interfaces,
                                   size_t finest_cells,
                                   size_t depth,
                                   struct NxfemProblem **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `problem` must be null or a handle from [`nxfem_problem_new`] not yet freed.
 */
void nxfem_problem_free(struct NxfemProblem *problem);

/**
 * Number of degrees of freedom of the finest-level system.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum NxfemStatus nxfem_problem_num_dofs(const struct NxfemProblem *problem, size_t *out);

/**
 * Solves the finest-level system with `solver` (an [`NxfemSolver`] value) to
 * relative energy-norm residual `tol`. The solution is written to `u_out`
 * when it is non-null; `len` must then equal the number of dofs. `report` may
 * be null. On `NOT_CONVERGED` the report is still filled in.
 *
 * # Safety
 * `problem` must be a live handle; `u_out` must be null or hold `len` doubles;
 * `report` must be null or valid.
 */
enum NxfemStatus nxfem_problem_solve(struct NxfemProblem *problem,
                                     int solver,
                                     double tol,
                                     double *u_out,
                                     size_t len,
                                     struct NxfemReport *report);

/**
 * L2 and mesh-dependent energy errors of `u` against the exact solution.
 *
 * # Safety
 * `problem` must be a live handle, `u` must hold `len` doubles and `l2` and
 * `energy` must be valid pointers.
 */
enum NxfemStatus nxfem_problem_errors(const struct NxfemProblem *problem,
                                      const double *u,
                                      size_t len,
                                      double *l2,
                                      double *energy);

/**
 * Spectral condition number of the finest-level matrix.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum NxfemStatus nxfem_problem_condition_number(struct NxfemProblem *problem, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NXFEM_H */
