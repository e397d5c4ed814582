#ifndef HARMFIELD_H
#define HARMFIELD_H

/* Generated by cbindgen from the harmfield-capi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum {
  HF_STATUS_OK = 0,
  /**
   * Null pointer, bad dimension, or an otherwise unusable argument.
   */
  HF_STATUS_INVALID_ARGUMENT = 1,
  /**
   * A JSON specification failed to parse or validate.
   */
  HF_STATUS_SCHEMA_ERROR = 2,
  /**
   * The fiber pseudo-length hit the singular set `<e,e> = -1`.
   */
  HF_STATUS_SINGULAR_FIBER = 3,
  /**
   * Parameter solving needs a preharmonic field.
   */
  HF_STATUS_NOT_PREHARMONIC = 4,
  /**
   * The zero Killing field has no classification.
   */
  HF_STATUS_ZERO_FIELD = 5,
  /**
   * The provided output buffer cannot hold the result.
   */
  HF_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * Any other numerical failure surfaced by the library.
   */
  HF_STATUS_NUMERICAL_ERROR = 7,
} HfStatus;

/**
 * Quadric kinds for handle constructors.
 */
typedef enum {
  HF_QUADRIC_KIND_SPHERE = 0,
  HF_QUADRIC_KIND_HYPERBOLIC = 1,
} HfQuadricKind;

/**
 * Fixed-point categories of Killing fields on the index-1 hyperbolic
 * surface.
 */
typedef enum {
  HF_FIXED_POINT_CATEGORY_NO_FIXED_POINTS = 0,
  HF_FIXED_POINT_CATEGORY_TWO_IDEAL = 1,
  HF_FIXED_POINT_CATEGORY_TWO_FIXED = 2,
} HfFixedPointCategory;

/**
 * Opaque handle to a vector field on a unit hyperquadric.
 */
typedef struct HfField HfField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hf_version(void);

/**
 * Creates a conformal gradient field from a pole vector of length `n + 1`.
 *
 * # Safety
 * `pole` must point to `pole_len` readable doubles and `out` to a writable
 * handle slot.
 */
HfStatus hf_field_new_cgf(HfQuadricKind kind,
                          size_t n,
                          size_t v,
                          const double *pole,
                          size_t pole_len,
                          HfField **out);

/**
 * Creates a Killing field from a row-major `(n+1) x (n+1)` matrix, which
 * must be skew-symmetric for the quadric's ambient signature.
 *
 * # Safety
 * `entries` must point to `(n+1)^2` readable doubles and `out` to a
 * writable handle slot.
 */
HfStatus hf_field_new_killing(HfQuadricKind kind,
                              size_t n,
                              size_t v,
                              const double *entries,
                              HfField **out);

/**
 * Creates a field from a JSON specification document (the same schema the
 * command-line `--spec` files use).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable handle slot.
 */
HfStatus hf_field_from_spec_json(const char *json, HfField **out);

/**
 * Releases a field handle; a null pointer is a no-op.
 *
 * # Safety
 * `field` must be a handle previously returned by a constructor of this
 * library, not yet freed.
 */
void hf_field_free(HfField *field);

/**
 * Reports the quadric a field lives on.
 *
 * # Safety
 * `field` must be a live handle; out-pointers must be writable or null.
 */
HfStatus hf_field_quadric(const HfField *field,
                          HfQuadricKind *out_kind,
                          size_t *out_n,
                          size_t *out_v);

/**
 * Largest sup-norm of the Euler-Lagrange section over seeded sample points.
 *
 * # Safety
 * `field` must be a live handle and `out_residual` writable.
 */
HfStatus hf_tau_max_residual(const HfField *field,
                             double p,
                             double q,
                             size_t samples,
                             uint64_t seed,
                             double *out_residual);

/**
 * Sampled harmonicity verdict: writes 1 when the largest residual stays
 * below `tol`, else 0.
 *
 * # Safety
 * `field` must be a live handle and `out_pass` writable.
 */
HfStatus hf_is_pq_harmonic(const HfField *field,
                           double p,
                           double q,
                           size_t samples,
                           uint64_t seed,
                           double tol,
                           int *out_pass);

/**
 * Total energy density `e_{p,q}` of the field at an ambient point of the
 * quadric; fails with `SINGULAR_FIBER` on the singular set.
 *
 * # Safety
 * `field` must be a live handle, `point` must hold `point_len` doubles,
 * and `out_energy` must be writable.
 */
HfStatus hf_energy_density(const HfField *field,
                           double p,
                           double q,
                           const double *point,
                           size_t point_len,
                           double *out_energy);

/**
 * Solves the exact metric-parameter sets of a conformal gradient or
 * preharmonic Killing field.  Pairs are written flat as
 * `[p_num, p_den, q_num, q_den]` per solution; `out_count` receives the
 * number of solutions even when the buffer is too small.
 *
 * # Safety
 * `field` must be a live handle; `out_pairs` must hold `capacity * 4`
 * writable `int64_t`; `out_count` must be writable.
 */
HfStatus hf_solve_metric_params(const HfField *field,
                                int64_t *out_pairs,
                                size_t capacity,
                                size_t *out_count);

/**
 * Classifies the fixed points of the Killing field with entries `(a, b, c)`
 * on the index-1 hyperbolic surface and writes the two representative
 * points (surface points, or ideal boundary points of the cylinder model)
 * into `out_points` when present.
 *
 * # Safety
 * `out_category` must be writable; `out_points`, when non-null, must hold
 * six writable doubles.
 */
HfStatus hf_fixed_points_h21(double a,
                             double b,
                             double c,
                             HfFixedPointCategory *out_category,
                             double *out_points);

/**
 * Congruence normal form of the Killing field `(a, b, c)` on the index-1
 * hyperbolic surface: writes the normal form and the conjugating ambient
 * isometry (both row-major 3x3) and the conjugation residual.
 *
 * # Safety
 * `out_normal` and `out_conjugator` must each hold nine writable doubles;
 * `out_residual` must be writable.
 */
HfStatus hf_normal_form_h21(double a,
                            double b,
                            double c,
                            double *out_normal,
                            double *out_conjugator,
                            double *out_residual);

/**
 * Looks up the harmonic Killing representative of a quadric surface:
 * writes its `(a, b, c)` entries and sets `out_present` to 1, or sets it
 * to 0 when none exists (the round sphere).
 *
 * # Safety
 * `out_abc` must hold three writable doubles; `out_present` must be
 * writable.
 */
HfStatus hf_harmonic_killing_catalog(HfQuadricKind kind,
                                     size_t v,
                                     double *out_abc,
                                     int *out_present);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARMFIELD_H */
