/* SPDX-License-Identifier: Apache-2.0 */
/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef CHIROCOOL_H
#define CHIROCOOL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_UTF8 = 2,
  // Malformed or physically invalid configuration.
  CC_STATUS_INVALID_CONFIG = 3,
  // Argument out of range (ion index, rate, ...).
  CC_STATUS_INVALID_ARGUMENT = 4,
  // A solver failed; see the error message.
  CC_STATUS_SOLVER_ERROR = 5,
  // The requested quantity is undefined for this input.
  CC_STATUS_UNDEFINED = 6,
  CC_STATUS_PANIC = 7,
} CcStatus;

// Opaque chain configuration.
typedef struct CcConfig CcConfig;

// Opaque steady-state result.
typedef struct CcSteady CcSteady;

// Closed-form minima; unavailable values are NaN.
typedef struct CcMinima {
  double n1_min;
  double gamma_r_min_low;
  double gamma_r_min_high;
  double beta0;
  // 1 when the minimum is reachable at this β, else 0.
  int32_t feasible;
} CcMinima;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cc_version(void);

// Message of the last failed call on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *cc_last_error_message(void);

// Parses and validates a JSON configuration.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum CcStatus cc_config_from_json(const char *json, struct CcConfig **out);

// Releases a configuration; null is ignored.
//
// # Safety
// `cfg` must come from [`cc_config_from_json`] and not be freed twice.
void cc_config_free(struct CcConfig *cfg);

// Counts validation errors and warnings of a configuration.
//
// # Safety
// All pointers must be valid.
enum CcStatus cc_config_validate(const struct CcConfig *cfg, size_t *n_errors, size_t *n_warnings);

// Number of ions in a configuration, 0 for null.
//
// # Safety
// `cfg` must be null or valid.
size_t cc_config_n_ions(const struct CcConfig *cfg);

// Solves for the steady state of the full master equation.
//
// # Safety
// `cfg` must be valid and `out` a valid pointer.
enum CcStatus cc_steady_solve(const struct CcConfig *cfg, struct CcSteady **out);

// Releases a steady-state result; null is ignored.
//
// # Safety
// `s` must come from [`cc_steady_solve`] and not be freed twice.
void cc_steady_free(struct CcSteady *s);

// ⟨a†a⟩ of ion `ion` (1-based).
//
// # Safety
// `s` and `out` must be valid.
enum CcStatus cc_steady_occupation(const struct CcSteady *s, size_t ion, double *out);

// Occupation normalized by the isolated single ion; `Undefined` when Ω_ion = 0.
//
// # Safety
// `s` and `out` must be valid.
enum CcStatus cc_steady_ntilde(const struct CcSteady *s, size_t ion, double *out);

// Excited-state population of ion `ion` (1-based).
//
// # Safety
// `s` and `out` must be valid.
enum CcStatus cc_steady_excited(const struct CcSteady *s, size_t ion, double *out);

// Spin correlation C_st of ions 1 and 2; `Undefined` for a single ion.
//
// # Safety
// All pointers must be valid.
enum CcStatus cc_steady_correlation(const struct CcSteady *s, double *re, double *im);

// Frobenius norm of `L[ρ]` at the returned steady state.
//
// # Safety
// `s` and `out` must be valid.
enum CcStatus cc_steady_residual(const struct CcSteady *s, double *out);

// Single-ion sideband-cooling limit `(Γ/4)² + (ηΩ)²/8`.
//
// # Safety
// `out` must be valid.
enum CcStatus cc_analytic_single_ion(double gamma_total, double eta, double omega, double *out);

// Closed-form steady occupation of the target ion of a two-ion chain.
//
// # Safety
// `out` must be valid.
enum CcStatus cc_analytic_target(double gamma_r,
                                 double gamma_l,
                                 double gamma_ng,
                                 double eta,
                                 double omega,
                                 double *out);

// Minimum occupation, its location and the threshold β₀.
//
// # Safety
// `out` must be valid.
enum CcStatus cc_analytic_minima(double eta,
                                 double omega,
                                 double total,
                                 double beta,
                                 struct CcMinima *out);

// Reduced N-ion solve for the target ion; writes ⟨n₁⟩ and ñ₁.
//
// # Safety
// `n1` and `ntilde1` must be valid.
enum CcStatus cc_reduced_solve(size_t n_ions,
                               double gamma_r,
                               double gamma_l,
                               double gamma_ng,
                               double eta,
                               double omega,
                               double *n1,
                               double *ntilde1);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHIROCOOL_H */
