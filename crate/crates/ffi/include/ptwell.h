#ifndef PTWELL_H
#define PTWELL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtwellStatus {
  PTWELL_STATUS_OK = 0,
  PTWELL_STATUS_NULL_POINTER = 1,
  PTWELL_STATUS_INVALID_ARGUMENT = 2,
  PTWELL_STATUS_SPEC_FORMAT = 3,
  /**
   * The potential violates a standing hypothesis (parity, single well, ...).
   */
  PTWELL_STATUS_HYPOTHESIS_VIOLATION = 4,
  /**
   * A numerical routine failed; see the last error message.
   */
  PTWELL_STATUS_NUMERICAL_FAILURE = 5,
  PTWELL_STATUS_BUFFER_TOO_SMALL = 6,
  PTWELL_STATUS_PANIC = 7,
} PtwellStatus;

/**
 * Opaque potential handle.
 */
typedef struct PtwellPotential PtwellPotential;

typedef struct PtwellComplex {
  double re;
  double im;
} PtwellComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `ptwell_*` call on the same thread.
 */
const char *ptwell_last_error_message(void);

/**
 * Parses a potential from NUL-terminated JSON
 * (`{"v0":[[c,p],...],"w":[[c,p],...],"e0":x,"window":{"re":[a,b],"im":[c,d]}}`).
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a writable pointer.
 */
enum PtwellStatus ptwell_potential_from_json(const char *json, struct PtwellPotential **out);

/**
 * # Safety
 * `p` must be null or a handle from [`ptwell_potential_from_json`] that
 * has not been freed.
 */
void ptwell_potential_free(struct PtwellPotential *p);

/**
 * `V_eps(z) = V0(z) + i eps W(z)`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum PtwellStatus ptwell_potential_eval(const struct PtwellPotential *p,
                                        struct PtwellComplex z,
                                        struct PtwellComplex eps,
                                        struct PtwellComplex *out);

/**
 * Turning points `alpha`, `beta` continued from the real well.
 *
 * # Safety
 * `p` must be a live handle; `alpha` and `beta` writable.
 */
enum PtwellStatus ptwell_turning_pair(const struct PtwellPotential *p,
                                      struct PtwellComplex energy,
                                      struct PtwellComplex eps,
                                      struct PtwellComplex *alpha,
                                      struct PtwellComplex *beta);

/**
 * Action `I(E, eps)` and period `T(E, eps)`; either output may be null.
 *
 * # Safety
 * `p` must be a live handle; non-null outputs writable.
 */
enum PtwellStatus ptwell_action(const struct PtwellPotential *p,
                                struct PtwellComplex energy,
                                struct PtwellComplex eps,
                                struct PtwellComplex *action,
                                struct PtwellComplex *period);

/**
 * Bohr–Sommerfeld eigenvalues in `[lo, hi]`. Writes up to `capacity`
 * values to `out` and the total number found to `count`; returns
 * `BufferTooSmall` when `count > capacity`.
 *
 * # Safety
 * `p` must be a live handle, `out` valid for `capacity` writes (may be
 * null when `capacity` is 0) and `count` writable.
 */
enum PtwellStatus ptwell_solve_bs(const struct PtwellPotential *p,
                                  double eps,
                                  double h,
                                  double lo,
                                  double hi,
                                  struct PtwellComplex *out,
                                  size_t capacity,
                                  size_t *count);

/**
 * Relative PT-paired Wronskian at `energy`; `box_l <= 0` selects the
 * default box.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum PtwellStatus ptwell_wronskian(const struct PtwellPotential *p,
                                   struct PtwellComplex energy,
                                   double eps,
                                   double h,
                                   double box_l,
                                   struct PtwellComplex *out);

/**
 * Number of eigenvalues in the rectangle by the argument principle.
 *
 * # Safety
 * `p` must be a live handle and `count` writable.
 */
enum PtwellStatus ptwell_zero_count(const struct PtwellPotential *p,
                                    double eps,
                                    double h,
                                    double re_lo,
                                    double re_hi,
                                    double im_lo,
                                    double im_hi,
                                    size_t n_boundary,
                                    int64_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTWELL_H */
