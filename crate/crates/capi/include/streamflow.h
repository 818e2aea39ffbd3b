#ifndef STREAMFLOW_H
#define STREAMFLOW_H

/* Generated by cbindgen from streamflow-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SF_STATUS_NULL_POINTER = 1,
  /**
   * Arguments failed validation (domains, dimensions, parameters).
   */
  SF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation failed numerically (singularity guard, Newton, caps).
   */
  SF_STATUS_NUMERICAL = 3,
  /**
   * An internal invariant was violated.
   */
  SF_STATUS_INTERNAL = 4,
} SfStatus;

/**
 * Integration scheme selector.
 */
typedef enum SfMethod {
  SF_METHOD_RK4 = 0,
  SF_METHOD_ADAMS_MOULTON2 = 1,
  SF_METHOD_BDF2 = 2,
} SfMethod;

/**
 * Inverse-map convention selector.
 */
typedef enum SfConvention {
  SF_CONVENTION_PSEUDOINVERSE = 0,
  SF_CONVENTION_COMPONENTWISE = 1,
} SfConvention;

/**
 * Opaque parametric curve handle.
 */
typedef struct SfCurve SfCurve;

/**
 * Opaque solution trajectory handle.
 */
typedef struct SfSolution SfSolution;

/**
 * Opaque Hermite spline handle.
 */
typedef struct SfSpline SfSpline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message (UTF-8, NUL-terminated) into `buf`.
 * Returns the full message length in bytes, regardless of how much fit;
 * passing `len = 0` just queries the length.
 *
 * # Safety
 * `buf` must point to at least `len` writable bytes, or be null with
 * `len = 0`.
 */
uintptr_t sf_last_error_message(char *buf, uintptr_t len);

/**
 * Involute tooth flank on `[pi + atan(s0), 3pi/2]`.
 *
 * # Safety
 * `out` must be a valid pointer to an `SfCurve*`.
 */
enum SfStatus sf_curve_tooth(double s0, struct SfCurve **out);

/**
 * 3-D helix streamline `([a1+a2 s] sin s + a3 s, [a1+a2 s] cos s, a4 s)`.
 *
 * # Safety
 * `out` must be a valid pointer to an `SfCurve*`.
 */
enum SfStatus sf_curve_helix(double a1,
                             double a2,
                             double a3,
                             double a4,
                             double s_lo,
                             double s_hi,
                             struct SfCurve **out);

/**
 * Lobe rotor profile snapshot at time `t` (radius `r + sin(phase + omega t)`).
 *
 * # Safety
 * `out` must be a valid pointer to an `SfCurve*`.
 */
enum SfStatus sf_curve_lobe_snapshot(double r,
                                     double phase,
                                     double omega,
                                     double t,
                                     struct SfCurve **out);

/**
 * Spatial dimension of the curve (2 or 3); 0 for a null handle.
 *
 * # Safety
 * `curve` must be a live handle from an `sf_curve_*` constructor or null.
 */
uintptr_t sf_curve_dim(const struct SfCurve *curve);

/**
 * Parameter domain of the curve.
 *
 * # Safety
 * All pointers must be valid; `curve` must be a live handle.
 */
enum SfStatus sf_curve_domain(const struct SfCurve *curve, double *lo, double *hi);

/**
 * Evaluate the curve position; `out_point` receives `sf_curve_dim` values.
 *
 * # Safety
 * `curve` must be a live handle; `out_point` must have room for the
 * curve's dimension.
 */
enum SfStatus sf_curve_eval(const struct SfCurve *curve, double s, double *out_point);

/**
 * Evaluate the curve derivative; `out_point` receives `sf_curve_dim` values.
 *
 * # Safety
 * Same contract as [`sf_curve_eval`].
 */
enum SfStatus sf_curve_deriv(const struct SfCurve *curve, double s, double *out_point);

/**
 * Release a curve handle (null is a no-op).
 *
 * # Safety
 * `curve` must come from an `sf_curve_*` constructor and not be freed twice.
 */
void sf_curve_free(struct SfCurve *curve);

/**
 * Interpolate `n` points with endpoint velocities into a C1 cubic spline.
 * `points` and `velocities` are row-major `n x dim` arrays.
 *
 * # Safety
 * `points` and `velocities` must each hold `n * dim` readable doubles;
 * `out` must be a valid pointer to an `SfSpline*`.
 */
enum SfStatus sf_spline_interpolate(const double *points,
                                    const double *velocities,
                                    uintptr_t n,
                                    uintptr_t dim,
                                    struct SfSpline **out);

/**
 * Number of cubic segments; 0 for a null handle.
 *
 * # Safety
 * `spline` must be a live handle or null.
 */
uintptr_t sf_spline_segment_count(const struct SfSpline *spline);

/**
 * Spatial dimension of the spline; 0 for a null handle.
 *
 * # Safety
 * `spline` must be a live handle or null.
 */
uintptr_t sf_spline_dim(const struct SfSpline *spline);

/**
 * Coefficient quadruple `(a3, a2, a1, a0)` of one segment and component.
 *
 * # Safety
 * `spline` must be a live handle; `out_coeffs` must have room for 4 doubles.
 */
enum SfStatus sf_spline_coefficients(const struct SfSpline *spline,
                                     uintptr_t segment,
                                     uintptr_t component,
                                     double *out_coeffs);

/**
 * Evaluate the spline at global parameter `s in [0, 1]`.
 *
 * # Safety
 * `spline` must be a live handle; `out_point` must have room for
 * `sf_spline_dim` doubles.
 */
enum SfStatus sf_spline_eval(const struct SfSpline *spline, double s, double *out_point);

/**
 * Global derivative `K * df/dt` at `s in [0, 1]`.
 *
 * # Safety
 * Same contract as [`sf_spline_eval`].
 */
enum SfStatus sf_spline_derivative(const struct SfSpline *spline, double s, double *out_point);

/**
 * Release a spline handle (null is a no-op).
 *
 * # Safety
 * `spline` must come from [`sf_spline_interpolate`] and not be freed twice.
 */
void sf_spline_free(struct SfSpline *spline);

/**
 * Integrate the a-priori gear-pump equation over `[s_start, s_end]`.
 *
 * # Safety
 * `out` must be a valid pointer to an `SfSolution*`.
 */
enum SfStatus sf_gear_pump_solve(double rho,
                                 double mu,
                                 double u0,
                                 double udot0,
                                 double s_start,
                                 double s_end,
                                 enum SfMethod method,
                                 double step,
                                 struct SfSolution **out);

/**
 * Chained solve along a spline with constant fluid properties and constant
 * pressure; each segment's terminal values seed the next segment.
 *
 * # Safety
 * `spline` must be a live handle; `out` must be a valid pointer to an
 * `SfSolution*`.
 */
enum SfStatus sf_chain_solve(const struct SfSpline *spline,
                             double rho,
                             double mu,
                             double pressure,
                             enum SfConvention convention,
                             uintptr_t component,
                             double u0,
                             double udot0,
                             enum SfMethod method,
                             double step,
                             struct SfSolution **out);

/**
 * Number of samples in the solution; 0 for a null handle.
 *
 * # Safety
 * `solution` must be a live handle or null.
 */
uintptr_t sf_solution_len(const struct SfSolution *solution);

/**
 * Fetch sample `index` as `(s, u, udot, segment)`.
 *
 * # Safety
 * `solution` must be a live handle; the output pointers must be valid.
 */
enum SfStatus sf_solution_sample(const struct SfSolution *solution,
                                 uintptr_t index,
                                 double *s,
                                 double *u,
                                 double *udot,
                                 uintptr_t *segment);

/**
 * Release a solution handle (null is a no-op).
 *
 * # Safety
 * `solution` must come from a solve call and not be freed twice.
 */
void sf_solution_free(struct SfSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STREAMFLOW_H */
