#ifndef SSRCHAIN_H
#define SSRCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Values accepted for the `mode` argument of [`ssr_chain_new`].
 */
typedef enum SsrMode {
  SSR_MODE_GENERAL = 0,
  SSR_MODE_SR_CONDITION = 1,
  SSR_MODE_MARKOVIAN = 2,
} SsrMode;

typedef enum SsrPoleClass {
  SSR_POLE_CLASS_ZERO_MODE = 0,
  SSR_POLE_CLASS_MARKOVIAN_LIKE = 1,
  SSR_POLE_CLASS_EXCLUSIVELY_NON_MARKOVIAN = 2,
} SsrPoleClass;

typedef enum SsrStatus {
  SSR_STATUS_OK = 0,
  SSR_STATUS_NULL_POINTER = 1,
  SSR_STATUS_INVALID_ARGUMENT = 2,
  SSR_STATUS_SOLVER_FAILURE = 3,
  SSR_STATUS_INDEX_OUT_OF_RANGE = 4,
  SSR_STATUS_PANIC = 5,
} SsrStatus;

/**
 * Opaque chain configuration.
 */
typedef struct SsrChain SsrChain;

/**
 * Opaque result of [`ssr_find_poles`].
 */
typedef struct SsrPoleList SsrPoleList;

typedef struct SsrComplex {
  double re;
  double im;
} SsrComplex;

typedef struct SsrWindow {
  double re_min;
  double re_max;
  double im_min;
  double im_max;
} SsrWindow;

typedef struct SsrPole {
  struct SsrComplex delta;
  struct SsrComplex gamma;
  double residual;
  size_t multiplicity;
  enum SsrPoleClass classification;
} SsrPole;

typedef struct SsrMaximum {
  size_t n_qubits;
  double l_critical;
  struct SsrComplex gamma_ssr;
  bool coalescence;
  size_t evaluations;
  double residual;
} SsrMaximum;

typedef struct SsrCriticalPair {
  double alpha_c;
  double beta_c;
  double tau_c;
  double residual;
} SsrCriticalPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a chain. `mode` is one of the [`SsrMode`] values.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum SsrStatus ssr_chain_new(size_t n_qubits,
                             double omega,
                             double separation,
                             int64_t sr_index,
                             int32_t mode,
                             struct SsrChain **out);

/**
 * Release a chain. Null is ignored.
 *
 * # Safety
 * `chain` must be null or a pointer returned by [`ssr_chain_new`] that has
 * not been freed.
 */
void ssr_chain_free(struct SsrChain *chain);

/**
 * The characteristic function `Δ^N (T^N)₁₁` at complex detuning `delta`.
 *
 * # Safety
 * `chain` must be a live chain handle and `out` valid for writing.
 */
enum SsrStatus ssr_charfn_eval(const struct SsrChain *chain,
                               struct SsrComplex delta,
                               struct SsrComplex *out);

/**
 * Transmission and reflection amplitudes at real detuning `delta`.
 *
 * # Safety
 * `chain` must be a live chain handle; `t` and `r` valid for writing.
 */
enum SsrStatus ssr_scattering(const struct SsrChain *chain,
                              double delta,
                              struct SsrComplex *t,
                              struct SsrComplex *r);

/**
 * Collective poles inside `window` (null for the default window).
 *
 * # Safety
 * `chain` must be a live chain handle, `window` null or readable, and
 * `out` valid for writing one pointer.
 */
enum SsrStatus ssr_find_poles(const struct SsrChain *chain,
                              const struct SsrWindow *window,
                              struct SsrPoleList **out);

/**
 * Number of poles in the list (0 for null).
 *
 * # Safety
 * `list` must be null or a live pole list.
 */
size_t ssr_pole_list_len(const struct SsrPoleList *list);

/**
 * Number of seeds whose refinement failed during the search.
 *
 * # Safety
 * `list` must be null or a live pole list.
 */
size_t ssr_pole_list_failures(const struct SsrPoleList *list);

/**
 * Copy pole `index` (sorted by `|Δ|`) into `out`.
 *
 * # Safety
 * `list` must be a live pole list and `out` valid for writing.
 */
enum SsrStatus ssr_pole_list_get(const struct SsrPoleList *list, size_t index, struct SsrPole *out);

/**
 * Release a pole list. Null is ignored.
 *
 * # Safety
 * `list` must be null or a pointer from [`ssr_find_poles`] not yet freed.
 */
void ssr_pole_list_free(struct SsrPoleList *list);

/**
 * Maximize the superradiant rate over the separation for `n_qubits`.
 * `bracket` is null for the default bracket, or points to `{lo, hi}`.
 *
 * # Safety
 * `bracket` must be null or readable for two doubles; `out` valid for writing.
 */
enum SsrStatus ssr_maximize(size_t n_qubits, const double *bracket, struct SsrMaximum *out);

/**
 * The asymptotic critical pair `(α_c, β_c)`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum SsrStatus ssr_critical_pair(struct SsrCriticalPair *out);

/**
 * `g(α, β)` of the large-N asymptotics.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum SsrStatus ssr_g_eval(double alpha, double beta, double *out);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *ssr_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ssr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SSRCHAIN_H */
