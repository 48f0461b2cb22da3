#ifndef CHERNOFF_DP_H
#define CHERNOFF_DP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CdpStatus {
  CDP_STATUS_OK = 0,
  // Argument outside the mathematical domain.
  CDP_STATUS_DOMAIN = 1,
  CDP_STATUS_CONFIG = 2,
  CDP_STATUS_NON_CONVERGENCE = 3,
  CDP_STATUS_IO = 4,
  // A density vanished where it must not (undefined ratio, absolute continuity).
  CDP_STATUS_UNDEFINED = 5,
  CDP_STATUS_NULL_POINTER = 6,
  CDP_STATUS_PANIC = 7,
} CdpStatus;

typedef enum CdpExpansion {
  CDP_EXPANSION_Q_BASED = 0,
  CDP_EXPANSION_P_BASED = 1,
} CdpExpansion;

// Opaque attack scenario.
typedef struct CdpScenario CdpScenario;

typedef struct CdpErrorRates {
  uint64_t m;
  uint64_t trials;
  uint64_t false_alarms;
  uint64_t misses;
  double p_fa;
  double p_miss;
  double p_e;
  double ci_radius;
} CdpErrorRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a success.
// Valid until the next call into this library on the same thread.
const char *cdp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cdp_version(void);

// Creates a scenario: null `Lap(0, s/eps)` against `Lap(delta_mu, theta s/eps)`.
// Free it with [`cdp_scenario_free`].
//
// # Safety
// `out_scenario` must be null or point to writable storage for one pointer.
enum CdpStatus cdp_scenario_new(double epsilon,
                                double sensitivity,
                                double delta_mu,
                                double theta,
                                double prior_alpha,
                                struct CdpScenario **out_scenario);

// # Safety
// `scenario` must be null or a pointer returned by [`cdp_scenario_new`]
// that has not been freed.
void cdp_scenario_free(struct CdpScenario *scenario);

// Closed-form `D(null || alternative)`.
//
// # Safety
// Pointers must be null or valid.
enum CdpStatus cdp_kl_closed_form(const struct CdpScenario *scenario_ptr, double *out_value);

// Closed-form Laplace Chernoff expression `x - log(1 + x)`, `x = |dmu|/(theta b)`.
//
// # Safety
// Pointers must be null or valid.
enum CdpStatus cdp_chernoff_closed_form(const struct CdpScenario *scenario_ptr, double *out_value);

// `D(null || alternative)` by quadrature.
//
// # Safety
// Pointers must be null or valid.
enum CdpStatus cdp_kl_numeric(const struct CdpScenario *scenario_ptr,
                              double tol,
                              double *out_value);

// Chernoff information by quadrature and golden-section search.
// `out_alpha_star` may be null.
//
// # Safety
// Pointers must be null or valid.
enum CdpStatus cdp_chernoff_numeric(const struct CdpScenario *scenario_ptr,
                                    double tol,
                                    double *out_value,
                                    double *out_alpha_star);

// Sup of the absolute log-ratio of the scenario densities; `INFINITY` when unbounded.
//
// # Safety
// Pointers must be null or valid.
enum CdpStatus cdp_epsilon_dp_level(const struct CdpScenario *scenario_ptr, double *out_value);

// Largest KL divergence between two eps-close measures.
//
// # Safety
// `out_value` must be null or valid.
enum CdpStatus cdp_kl_bound(double epsilon, double *out_value);

// Closed-form Chernoff upper bound, for `epsilon` in (0, 1).
//
// # Safety
// `out_value` must be null or valid.
enum CdpStatus cdp_chernoff_ub(double epsilon, double *out_value);

// Optimal prior of the bounded Chernoff objective, confined to (0, 1].
// `out_clamped` may be null.
//
// # Safety
// Pointers must be null or valid.
enum CdpStatus cdp_alpha_star(double epsilon,
                              enum CdpExpansion expansion,
                              double *out_value,
                              bool *out_clamped);

// Sequential composition of `n` budgets given as parallel arrays.
//
// # Safety
// `epsilons` and `deltas` must point to `n` readable values (or be null when
// `n` is 0); the out pointers must be null or valid.
enum CdpStatus cdp_compose(const double *epsilons,
                           const double *deltas,
                           size_t n,
                           double *out_epsilon,
                           double *out_delta);

// Monte Carlo error rates of the likelihood-ratio test with `m` observations.
// Fixed `seed` and `shards` reproduce the result exactly.
//
// # Safety
// Pointers must be null or valid.
enum CdpStatus cdp_error_rates(const struct CdpScenario *scenario_ptr,
                               uint64_t m,
                               uint64_t trials,
                               uint64_t seed,
                               uint64_t shards,
                               struct CdpErrorRates *out_rates);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHERNOFF_DP_H */
