#ifndef ELLIPTIC_NF_H
#define ELLIPTIC_NF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Closed-form families.
 */
typedef enum EnfFamily {
  ENF_FAMILY_A = 0,
  ENF_FAMILY_B = 1,
  ENF_FAMILY_C = 2,
} EnfFamily;

/**
 * Status codes; one per library module plus argument and panic failures.
 */
typedef enum EnfStatus {
  ENF_STATUS_OK = 0,
  ENF_STATUS_NULL_POINTER = 1,
  ENF_STATUS_INVALID_ARGUMENT = 2,
  ENF_STATUS_SERIES = 3,
  ENF_STATUS_MAPS = 4,
  ENF_STATUS_NORMALIZER = 5,
  ENF_STATUS_TRANSFORMS = 6,
  ENF_STATUS_DYNAMICS = 7,
  ENF_STATUS_DIAGNOSTICS = 8,
  ENF_STATUS_CONFIG = 9,
  ENF_STATUS_IO = 10,
  ENF_STATUS_PANIC = 11,
} EnfStatus;

/**
 * Foliation-preserving map.
 */
typedef struct EnfMap EnfMap;

/**
 * Special normalization of a map.
 */
typedef struct EnfNormalization EnfNormalization;

/**
 * Message of the last failure on this thread, or null. Valid until the next call.
 */
const char *enf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *enf_version(void);

/**
 * Family map with `f(u) = a u^d`; `omega` uses the command-line syntax
 * (`golden`, `quad:p,q,D,r`, `cf:a0,a1,...` or a decimal literal).
 *
 * # Safety
 * `omega` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EnfStatus enf_map_family(enum EnfFamily family,
                              const char *omega,
                              double modulus,
                              double a,
                              uint32_t d,
                              uint32_t order,
                              uint32_t bits,
                              struct EnfMap **out);

/**
 * Map from a JSON description (the `--map` file format); `order == 0` keeps its order.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EnfStatus enf_map_from_json(const char *json,
                                 uint32_t order,
                                 uint32_t bits,
                                 struct EnfMap **out);

/**
 * # Safety
 * `map` must come from an `enf_map_*` constructor and not be used afterwards.
 */
void enf_map_free(struct EnfMap *map);

/**
 * `F(z)` in double precision.
 *
 * # Safety
 * Pointers must be valid.
 */
enum EnfStatus enf_map_apply(const struct EnfMap *map,
                             double re,
                             double im,
                             double *out_re,
                             double *out_im);

/**
 * Solves the homological equation through `order`. `gauge` may be null (basic for
 * modulus 1, strong contraction otherwise) or one of the command-line gauge strings.
 *
 * # Safety
 * `map` and `out` must be valid; `gauge` null or NUL-terminated.
 */
enum EnfStatus enf_normalize(const struct EnfMap *map,
                             uint32_t order,
                             const char *gauge,
                             struct EnfNormalization **out);

/**
 * # Safety
 * `norm` must come from [`enf_normalize`] and not be used afterwards.
 */
void enf_normalization_free(struct EnfNormalization *norm);

/**
 * Conjugacy residual certified by the solver.
 *
 * # Safety
 * Pointers must be valid.
 */
enum EnfStatus enf_normalization_residual(const struct EnfNormalization *norm, double *out);

/**
 * Torsion coefficient `n_s`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum EnfStatus enf_normalization_torsion(const struct EnfNormalization *norm,
                                         uint32_t s,
                                         double *out);

/**
 * Coefficient `phi_pq` of the angular corrector.
 *
 * # Safety
 * Pointers must be valid.
 */
enum EnfStatus enf_normalization_phi(const struct EnfNormalization *norm,
                                     uint32_t p,
                                     uint32_t q,
                                     double *out_re,
                                     double *out_im);

/**
 * Re-runs the full-series conjugacy check of `norm` against `map`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum EnfStatus enf_verify(const struct EnfMap *map,
                          const struct EnfNormalization *norm,
                          double *out);

/**
 * Normalization as a JSON string; release it with [`enf_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum EnfStatus enf_normalization_json(const struct EnfNormalization *norm, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void enf_string_free(char *s);

#endif  /* ELLIPTIC_NF_H */
