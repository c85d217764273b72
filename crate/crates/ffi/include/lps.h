#ifndef LPS_H
#define LPS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LPS_FORMULA_LIMITED_PS 0

#define LPS_FORMULA_EGALITARIAN_LOSS 1

#define LPS_FORMULA_FCFD_CONSTANT 2

#define LPS_FORMULA_ZERO_INFLATED_FCFD 3

#define LPS_FORMULA_ERLANG_B 4

#define LPS_FORMULA_NSERVER_TAIL 5

typedef enum LpsStatus {
  LPS_STATUS_OK = 0,
  LPS_STATUS_NULL_POINTER = 1,
  LPS_STATUS_INVALID_ARGUMENT = 2,
  LPS_STATUS_CONFIG = 3,
  LPS_STATUS_INADMISSIBLE = 4,
  LPS_STATUS_BUFFER_TOO_SMALL = 5,
  LPS_STATUS_NUMERICAL = 6,
  LPS_STATUS_SIMULATION = 7,
  LPS_STATUS_COUPLING_VIOLATION = 8,
  LPS_STATUS_PANIC = 9,
} LpsStatus;

/*
 Opaque scenario handle.
 */
typedef struct LpsScenario LpsScenario;

typedef struct LpsSimSummary {
  uint64_t arrivals;
  uint64_t served;
  uint64_t displaced;
  uint64_t blocked;
  double loss_prob;
  double loss_ci_half;
  double mean_jobs;
  double sojourn;
  double measured_time;
  uint64_t idle_periods;
} LpsSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next call into this library from the same thread.
 */
const char *lps_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *lps_version(void);

/*
 Parses a scenario document.

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LpsStatus lps_scenario_from_json(const char *json, struct LpsScenario **out);

/*
 Releases a scenario. Null is ignored.

 # Safety
 `scenario` must come from [`lps_scenario_from_json`] and not be used
 afterwards.
 */
void lps_scenario_free(struct LpsScenario *scenario);

/*
 Capacity `n`; the state distribution has `n + 1` entries.

 # Safety
 `scenario` must be a live handle or null.
 */
size_t lps_scenario_capacity(const struct LpsScenario *scenario);

/*
 Evaluates one closed form for the scenario. `probs` may be null when only
 the loss is wanted; formulas without a distribution leave it untouched.

 # Safety
 Pointers must be valid; `probs` must hold `probs_len` values.
 */
enum LpsStatus lps_scenario_evaluate(const struct LpsScenario *scenario,
                                     uint32_t formula_code,
                                     double *probs,
                                     size_t probs_len,
                                     double *loss);

/*
 Simulates the scenario. `occupancy` receives the `n + 1` time-average
 level probabilities and may be null.

 # Safety
 Pointers must be valid; `occupancy` must hold `occupancy_len` values.
 */
enum LpsStatus lps_scenario_simulate(const struct LpsScenario *scenario,
                                     uint64_t horizon,
                                     uint64_t warmup,
                                     uint64_t seed,
                                     uint64_t replications,
                                     struct LpsSimSummary *summary,
                                     double *occupancy,
                                     size_t occupancy_len);

/*
 Runs the limited system and its unlimited twin on one input path for
 `horizon` arrivals. Returns `CouplingViolation` if the sample-path
 relation breaks; the message then holds the offending event window.

 # Safety
 `scenario` must be a live handle; `checks` may be null.
 */
enum LpsStatus lps_scenario_couple(const struct LpsScenario *scenario,
                                   uint64_t horizon,
                                   uint64_t seed,
                                   uint64_t *checks);

/*
 Loss of the egalitarian SRL system with constant input.

 # Safety
 `out` must be writable.
 */
enum LpsStatus lps_egalitarian_loss(size_t n, double lambda, double b, double *out);

/*
 Erlang's loss formula for `n` servers and offered load `rho`.

 # Safety
 `out` must be writable.
 */
enum LpsStatus lps_erlang_b(size_t n, double rho, double *out);

/*
 Loss of the FCFD system with constant lengths and unit rates.

 # Safety
 `out` must be writable.
 */
enum LpsStatus lps_fcfd_constant_loss(size_t n, double lambda, double b, double *out);

/*
 State distribution of the limited SRL system. `rates` holds the `n + 1`
 arrival rates, `service` the `n` per-job rates, `out` receives `n + 1`
 probabilities.

 # Safety
 Arrays must have the stated lengths.
 */
enum LpsStatus lps_limited_ps_probs(size_t n,
                                    const double *rates,
                                    double b,
                                    const double *service,
                                    double *out,
                                    size_t out_len);

/*
 State distribution of the FCFD system with zero-inflated exponential
 lengths. Array conventions as in [`lps_limited_ps_probs`].

 # Safety
 Arrays must have the stated lengths.
 */
enum LpsStatus lps_zero_inflated_fcfd_probs(size_t n,
                                            const double *rates,
                                            double alpha,
                                            double mu,
                                            const double *service,
                                            double *out,
                                            size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPS_H */
