#ifndef RADLEVY_H
#define RADLEVY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_PRECONDITION = 3,
  RL_STATUS_UNSUPPORTED = 4,
  RL_STATUS_NUMERIC_FAILURE = 5,
  RL_STATUS_OVERFLOW = 6,
  RL_STATUS_PARSE = 7,
  RL_STATUS_PANIC = 8,
  RL_STATUS_OTHER = 9,
} RlStatus;

typedef enum RlRoute {
  RL_ROUTE_MIXTURE = 0,
  RL_ROUTE_FOURIER = 1,
  RL_ROUTE_CLOSED_FORM = 2,
} RlRoute;

typedef enum RlConvention {
  RL_CONVENTION_DEFAULT = 0,
  RL_CONVENTION_PAPER_LITERAL = 1,
} RlConvention;

typedef enum RlHwVerdict {
  RL_HW_VERDICT_HOLDS = 0,
  RL_HW_VERDICT_FAILS = 1,
  RL_HW_VERDICT_INCONCLUSIVE = 2,
} RlHwVerdict;

/**
 * Opaque subordinator model.
 */
typedef struct RlModel RlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *rl_last_error_message(void);

/**
 * Parses a Bernstein spec from JSON, e.g.
 * `{"drift": 0, "levy_measure": {"family": "gamma_jump", "shape": 1, "rate": 1}}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RlStatus rl_model_from_json(const char *json, struct RlModel **out);

/**
 * Looks up a catalog model: `drift`, `stable12`, `gamma`, `ig` or `cp`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RlStatus rl_model_from_catalog(const char *name, struct RlModel **out);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void rl_model_free(struct RlModel *model);

/**
 * The Bernstein function `f(u)`.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum RlStatus rl_eval_f(const struct RlModel *model, double u, double *out);

/**
 * Rate `f(∞)` of the atom at 0, infinite when there is none.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum RlStatus rl_atom_rate(const struct RlModel *model, double *out);

/**
 * Radial transition density `p_t^k(r)` at `n` radii, plus the weight of the
 * atom at the origin.
 *
 * # Safety
 * `radii` and `values` must hold `n` doubles; `atom_weight` may be null.
 */
enum RlStatus rl_transition_density(const struct RlModel *model,
                                    uint32_t k,
                                    double t,
                                    enum RlRoute route_,
                                    enum RlConvention convention_,
                                    const double *radii,
                                    uintptr_t n,
                                    double *values,
                                    double *atom_weight);

/**
 * Radial density of the Lévy measure of the subordinated process at `n` radii.
 *
 * # Safety
 * `radii` and `values` must hold `n` doubles.
 */
enum RlStatus rl_levy_density(const struct RlModel *model,
                              uint32_t k,
                              enum RlConvention convention_,
                              const double *radii,
                              uintptr_t n,
                              double *values);

/**
 * `E S_t^{-κ}`, infinite when it diverges.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum RlStatus rl_neg_moment(const struct RlModel *model, double kappa, double t, double *out);

/**
 * Hartman–Wintner verdict on the default probe.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum RlStatus rl_hartman_wintner(const struct RlModel *model, enum RlHwVerdict *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADLEVY_H */
