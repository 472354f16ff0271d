#ifndef GEOQUANT_H
#define GEOQUANT_H

/* Generated by cbindgen from geoquant-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every C-ABI call.
typedef enum GeoquantStatus {
  GEOQUANT_STATUS_OK = 0,
  GEOQUANT_STATUS_NULL_POINTER = 1,
  GEOQUANT_STATUS_INVALID_ARGUMENT = 2,
  GEOQUANT_STATUS_DIMENSION_MISMATCH = 3,
  GEOQUANT_STATUS_NON_UNIT_DIRECTION = 4,
  GEOQUANT_STATUS_ALPHA_OUT_OF_RANGE = 5,
  GEOQUANT_STATUS_NOT_ON_LINE = 6,
  GEOQUANT_STATUS_DEGENERATE = 7,
  GEOQUANT_STATUS_NOT_AVAILABLE = 8,
  GEOQUANT_STATUS_IO_ERROR = 9,
} GeoquantStatus;

// Classification of the instance by its uniqueness-relevant geometry.
typedef enum GeoquantDiagnosis {
  GEOQUANT_DIAGNOSIS_UNIQUE_NOT_ON_LINE = 0,
  GEOQUANT_DIAGNOSIS_UNIQUE_ALPHA_POSITIVE_OFF_DIRECTION = 1,
  GEOQUANT_DIAGNOSIS_POSSIBLY_NON_UNIQUE_LINE_DIRECTION = 2,
  GEOQUANT_DIAGNOSIS_POSSIBLY_NON_UNIQUE_MEDIAN_ON_LINE = 3,
  GEOQUANT_DIAGNOSIS_SINGLE_ATOM = 4,
} GeoquantDiagnosis;

// Solver termination state.
typedef enum GeoquantSolveStatus {
  GEOQUANT_SOLVE_STATUS_CONVERGED = 0,
  GEOQUANT_SOLVE_STATUS_MAX_ITER = 1,
  GEOQUANT_SOLVE_STATUS_REDUCED_TO_UNIVARIATE = 2,
} GeoquantSolveStatus;

// Uniqueness verdict attached to a solution.
typedef enum GeoquantUniqueness {
  GEOQUANT_UNIQUENESS_UNIQUE = 0,
  GEOQUANT_UNIQUENESS_NON_UNIQUE_INTERVAL = 1,
  GEOQUANT_UNIQUENESS_UNKNOWN = 2,
} GeoquantUniqueness;

// Opaque handle to a weighted point cloud.
typedef struct GeoquantMeasure GeoquantMeasure;

// Opaque handle to a computed quantile.
typedef struct GeoquantSolution GeoquantSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a measure from `count` points of dimension `dim`, laid out
// row-major in `points`. `weights` may be null for uniform weights.
// The returned handle must be released with `geoquant_measure_free`.
//
// # Safety
// `points` must reference `count * dim` readable doubles, `weights`
// either null or `count` doubles, and `out` a writable pointer slot.
enum GeoquantStatus geoquant_measure_from_points(const double *points,
                                                 uintptr_t count,
                                                 uintptr_t dim,
                                                 const double *weights,
                                                 struct GeoquantMeasure **out);

// Builds one of the built-in example clouds (`'a'`, `'b'`, `'c'`, `'d'`).
//
// # Safety
// `out` must be a writable pointer slot.
enum GeoquantStatus geoquant_measure_builtin(char name,
                                             uint64_t seed,
                                             struct GeoquantMeasure **out);

// Releases a measure handle; null is a no-op.
//
// # Safety
// `handle` must have come from this library and not been freed before.
void geoquant_measure_free(struct GeoquantMeasure *handle);

// Ambient dimension of the measure.
//
// # Safety
// `handle` and `out` must be valid pointers.
enum GeoquantStatus geoquant_measure_dim(const struct GeoquantMeasure *handle, uintptr_t *out);

// Number of distinct support points (duplicates merge on construction).
//
// # Safety
// `handle` and `out` must be valid pointers.
enum GeoquantStatus geoquant_measure_support_size(const struct GeoquantMeasure *handle,
                                                  uintptr_t *out);

// Evaluates the quantile objective at `mu` (`alpha` in `[0, 1]`).
//
// # Safety
// `u` and `mu` must reference `dim` doubles; `out` must be writable.
enum GeoquantStatus geoquant_objective_value(const struct GeoquantMeasure *handle,
                                             double alpha,
                                             const double *u,
                                             const double *mu,
                                             double *out);

// The tail integral `E[||Z|| + u'Z]` for a unit direction `u`.
//
// # Safety
// `u` must reference `dim` doubles; `out` must be writable.
enum GeoquantStatus geoquant_tail_integral(const struct GeoquantMeasure *handle,
                                           const double *u,
                                           double *out);

// Infimum of the order-one objective in direction `u`.
//
// # Safety
// `u` must reference `dim` doubles; `out` must be writable.
enum GeoquantStatus geoquant_alpha_one_infimum(const struct GeoquantMeasure *handle,
                                               const double *u,
                                               double *out);

// The vanishing integral `t_P(r)` for `m_param` in `(0, 2)` and `r > 0`.
//
// # Safety
// `out` must be writable.
enum GeoquantStatus geoquant_t_integral(const struct GeoquantMeasure *handle,
                                        double m_param,
                                        double r,
                                        double *out);

// Spatial depth of `point`.
//
// # Safety
// `point` must reference `dim` doubles; `out` must be writable.
enum GeoquantStatus geoquant_spatial_depth(const struct GeoquantMeasure *handle,
                                           const double *point,
                                           double *out);

// Radius of the origin-centered ball guaranteed to contain every
// minimizer of order `alpha`.
//
// # Safety
// `out` must be writable.
enum GeoquantStatus geoquant_search_radius(const struct GeoquantMeasure *handle,
                                           double alpha,
                                           double *out);

// Collinearity of the support within `tol` (relative to the support
// radius). `base` and `direction` may be null; `direction` is only
// written when `*has_direction` is set (a single atom has none).
//
// # Safety
// Non-null out-pointers must be writable; `base` and `direction`, when
// given, must reference `dim` writable doubles.
enum GeoquantStatus geoquant_detect_line(const struct GeoquantMeasure *handle,
                                         double tol,
                                         bool *on_line,
                                         bool *degenerate_single_atom,
                                         bool *has_direction,
                                         double *base,
                                         double *direction);

// Classifies the instance `(measure, alpha, u)`.
//
// # Safety
// `u` must reference `dim` doubles; `out` must be writable.
enum GeoquantStatus geoquant_uniqueness_diagnosis(const struct GeoquantMeasure *handle,
                                                  double alpha,
                                                  const double *u,
                                                  enum GeoquantDiagnosis *out);

// Subdifferential optimality test at `mu`.
//
// # Safety
// `u` and `mu` must reference `dim` doubles; out-pointers writable.
enum GeoquantStatus geoquant_optimality_certificate(const struct GeoquantMeasure *handle,
                                                    double alpha,
                                                    const double *u,
                                                    const double *mu,
                                                    double tol,
                                                    bool *certified,
                                                    double *residual);

// Computes the spatial quantile of order `alpha` in direction `u`.
// `tol <= 0` and `max_iter == 0` select the documented defaults;
// `warm_start` may be null. The returned handle must be released with
// `geoquant_solution_free`.
//
// # Safety
// `u` (and `warm_start` when non-null) must reference `dim` doubles and
// `out` a writable pointer slot.
enum GeoquantStatus geoquant_solve(const struct GeoquantMeasure *handle,
                                   double alpha,
                                   const double *u,
                                   double tol,
                                   uint64_t max_iter,
                                   const double *warm_start,
                                   struct GeoquantSolution **out);

// Releases a solution handle; null is a no-op.
//
// # Safety
// `handle` must have come from `geoquant_solve` and not been freed.
void geoquant_solution_free(struct GeoquantSolution *handle);

// Copies the quantile coordinates into `buf` (`len` must equal `dim`).
//
// # Safety
// `buf` must reference `len` writable doubles.
enum GeoquantStatus geoquant_solution_mu(const struct GeoquantSolution *handle,
                                         double *buf,
                                         uintptr_t len);

// Scalar fields of a solution; any out-pointer may be null to skip it.
//
// # Safety
// Non-null out-pointers must be writable.
enum GeoquantStatus geoquant_solution_info(const struct GeoquantSolution *handle,
                                           double *objective,
                                           double *residual,
                                           uint64_t *iterations,
                                           enum GeoquantSolveStatus *status,
                                           enum GeoquantUniqueness *uniqueness,
                                           bool *atom_hit);

// Copies the endpoints of the optimal segment into `lo`/`hi` when the
// minimizer is an interval; returns `NotAvailable` otherwise.
//
// # Safety
// `lo` and `hi` must reference `len` writable doubles.
enum GeoquantStatus geoquant_solution_interval(const struct GeoquantSolution *handle,
                                               double *lo,
                                               double *hi,
                                               uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEOQUANT_H */
