#ifndef CHEMOTAXIS_H
#define CHEMOTAXIS_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ChemoField {
  CHEMO_FIELD_U = 0,
  CHEMO_FIELD_V = 1,
  CHEMO_FIELD_W = 2,
} ChemoField;

typedef enum ChemoRunVerdict {
  CHEMO_RUN_VERDICT_COMPLETED = 0,
  CHEMO_RUN_VERDICT_BLOWUP_SUSPECTED = 1,
} ChemoRunVerdict;

typedef enum ChemoSeriesVerdict {
  CHEMO_SERIES_VERDICT_BOUNDED = 0,
  CHEMO_SERIES_VERDICT_BLOWUP_SUSPECTED = 1,
  CHEMO_SERIES_VERDICT_INCONCLUSIVE = 2,
} ChemoSeriesVerdict;

// Outcome of a call.
typedef enum ChemoStatus {
  CHEMO_STATUS_OK = 0,
  CHEMO_STATUS_NULL_POINTER = 1,
  CHEMO_STATUS_INVALID_UTF8 = 2,
  CHEMO_STATUS_INVALID_ARGUMENT = 3,
  CHEMO_STATUS_CONFIG_ERROR = 4,
  CHEMO_STATUS_SOLVER_ERROR = 5,
  CHEMO_STATUS_THEORY_ERROR = 6,
  CHEMO_STATUS_BUFFER_TOO_SMALL = 7,
  CHEMO_STATUS_PANIC = 8,
} ChemoStatus;

typedef enum ChemoVariant {
  CHEMO_VARIANT_LOCAL = 0,
  CHEMO_VARIANT_NONLOCAL = 1,
} ChemoVariant;

// Opaque simulation handle.
typedef struct ChemoSim ChemoSim;

// Structural exponents of a model.
typedef struct ChemoExponents {
  double m1;
  double m2;
  double m3;
  double k;
  double l;
  double r;
  uint32_t n;
} ChemoExponents;

// Assumption flags and verdict.
//
// `witness_mask` has one bit per sufficient witness. For `tau = 0` bits
// 0, 1, 2 stand for A1, A2, A3; for `tau = 1` bits 0 to 3 stand for the
// pairs A2+A4, A2+A5, A3+A4, A3+A5.
typedef struct ChemoRegime {
  bool a1;
  bool a2;
  bool a3;
  bool a4;
  bool a5;
  bool bounded;
  uint32_t witness_mask;
} ChemoRegime;

// Inputs of the interpolation exponents.
typedef struct ChemoGnParams {
  // Values `<= 0` select the default `max{l, m3+l-1} + 1`.
  double q;
  uint32_t n;
  double m1;
  double m2;
  double m3;
  double k;
  double l;
} ChemoGnParams;

// Interpolation exponents at one `p`.
//
// `theta2` is NaN when `l <= 1`. Bit `i` of `defined_mask` / `holds_mask`
// refers to relation `i` in the order theta, sigma_theta, theta1,
// sigma1_theta1, theta2, sigma1_theta2, theta4, sigma2_theta4, theta3.
typedef struct ChemoExponentSet {
  double p;
  double q;
  double theta;
  double sigma;
  double theta1;
  double sigma1;
  double theta2;
  double theta3;
  double theta4;
  double sigma2;
  uint32_t defined_mask;
  uint32_t holds_mask;
} ChemoExponentSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *chemo_last_error(void);

// Classifies exponents for the given variant and `tau` (0 or 1).
//
// # Safety
// `exponents` and `out` must be valid pointers or NULL.
enum ChemoStatus chemo_classify(enum ChemoVariant variant,
                                uint8_t tau,
                                const struct ChemoExponents *exponents,
                                struct ChemoRegime *out);

// Evaluates every interpolation exponent at `p`.
//
// # Safety
// `params` and `out` must be valid pointers or NULL.
enum ChemoStatus chemo_exponents(double p,
                                 const struct ChemoGnParams *params,
                                 struct ChemoExponentSet *out);

// Smallest `p̄` on the default scan at which every applicable relation
// holds, verified over the forward window.
//
// # Safety
// `params` and `out_pbar` must be valid pointers or NULL.
enum ChemoStatus chemo_find_pbar(const struct ChemoGnParams *params, double *out_pbar);

// Uniform bound on the total mass.
//
// # Safety
// `out` must be a valid pointer or NULL.
enum ChemoStatus chemo_mass_bound(double lambda,
                                  double mu,
                                  double r,
                                  double omega_measure,
                                  double initial_mass,
                                  double *out);

// Builds a simulation from configuration text and its initial state.
//
// # Safety
// `config` must be a NUL-terminated string or NULL; `out` a valid pointer
// or NULL. On success `*out` owns a handle for [`chemo_sim_free`].
enum ChemoStatus chemo_sim_new(const char *config, struct ChemoSim **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `sim` must come from [`chemo_sim_new`] and not be used afterwards.
void chemo_sim_free(struct ChemoSim *sim);

// Takes one time step.
//
// # Safety
// `sim` must be a live handle or NULL.
enum ChemoStatus chemo_sim_step(struct ChemoSim *sim);

// Steps until time `t_end`. On a solver error the state of the last
// successful step is kept.
//
// # Safety
// `sim` must be a live handle or NULL.
enum ChemoStatus chemo_sim_advance(struct ChemoSim *sim, double t_end);

// Runs to the configured horizon with diagnostics and reports both the
// run verdict and the verdict of the recorded series.
//
// # Safety
// `sim` must be a live handle or NULL; the out pointers valid or NULL.
enum ChemoStatus chemo_sim_run(struct ChemoSim *sim,
                               enum ChemoRunVerdict *run_verdict,
                               enum ChemoSeriesVerdict *series_verdict);

// Current time.
//
// # Safety
// `sim` must be a live handle or NULL; `out` valid or NULL.
enum ChemoStatus chemo_sim_time(struct ChemoSim *sim, double *out);

// Total mass of `u`.
//
// # Safety
// `sim` must be a live handle or NULL; `out` valid or NULL.
enum ChemoStatus chemo_sim_mass(struct ChemoSim *sim, double *out);

// Cells along x and y; `ny` is 1 in one dimension.
//
// # Safety
// `sim` must be a live handle or NULL; out pointers valid or NULL.
enum ChemoStatus chemo_sim_shape(struct ChemoSim *sim, size_t *nx, size_t *ny);

// Copies a field into `buffer` in cell order (x fastest).
//
// # Safety
// `sim` must be a live handle or NULL; `buffer` must hold `len` doubles.
enum ChemoStatus chemo_sim_field(struct ChemoSim *sim,
                                 enum ChemoField field,
                                 double *buffer,
                                 size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEMOTAXIS_H */
