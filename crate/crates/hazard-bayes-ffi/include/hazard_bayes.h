/* C API for the hazard-bayes batting survival-analysis engine.
 *
 * Conventions:
 *   - Every fallible function returns an hb_status; HB_OK is 0.
 *   - On failure, hb_last_error() returns a thread-local message valid until
 *     the next failing call on the same thread.
 *   - Handles returned through `**out` parameters are owned by the caller
 *     and must be released with the matching hb_*_free (null-safe).
 */

#ifndef HAZARD_BAYES_H
#define HAZARD_BAYES_H

#include <stdint.h>
#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hb_status {
  HB_OK = 0,
  HB_ERR_NULL_ARGUMENT = 1,
  HB_ERR_INVALID_ARGUMENT = 2,
  HB_ERR_PARSE = 3,
  HB_ERR_SAMPLER = 4,
  HB_ERR_OUT_OF_RANGE = 5,
  HB_ERR_INTERNAL = 6,
} hb_status;

/* Parameter selectors for summaries and comparisons. */
enum {
  HB_PARAM_MU1 = 0,
  HB_PARAM_MU2 = 1,
  HB_PARAM_L = 2,
};

/* Natural model parameters: initial effective average mu1, equilibrium
 * effective average mu2 (mu1 <= mu2) and the transition e-folding scale
 * (0 < L <= mu2), all in runs. */
typedef struct hb_params {
  double mu1;
  double mu2;
  double transition_scale;
} hb_params;

/* Median with 16/84-percentile offsets. */
typedef struct hb_summary {
  double median;
  double plus_err;
  double minus_err;
  double lo68;
  double hi68;
} hb_summary;

/* Nested-sampling configuration; zero n_particles / mcmc_steps select the
 * defaults (1000 each). */
typedef struct hb_ns_config {
  uint64_t n_particles;
  uint64_t mcmc_steps;
  uint64_t seed;
} hb_ns_config;

/* Opaque handles. */
typedef struct HbDataset hb_dataset;
typedef struct HbPosterior hb_posterior;

/* Diagnostics. */
const char *hb_last_error(void);
const char *hb_version(void);

/* Datasets. */
hb_dataset *hb_dataset_new(void);
void hb_dataset_free(hb_dataset *dataset);
hb_status hb_dataset_push(hb_dataset *dataset, uint32_t score, int not_out);
size_t hb_dataset_len(const hb_dataset *dataset);
/* Parse an innings CSV ("player,score" rows, trailing '*' = not-out) and
 * extract one player's innings. `player` may be null when the file holds
 * exactly one player. */
hb_status hb_dataset_parse_csv(const char *text, const char *player,
                               hb_dataset **out);

/* Model evaluation. */
hb_status hb_effective_average(const hb_params *params, double score,
                               double *out);
hb_status hb_hazard(const hb_params *params, uint32_t score, double *out);
hb_status hb_survival(const hb_params *params, uint32_t score, double *out);
hb_status hb_score_pmf(const hb_params *params, uint32_t score, double *out);
hb_status hb_log_likelihood(const hb_dataset *dataset, const hb_params *params,
                            double *out);

/* Simulation. */
hb_status hb_simulate_career(const hb_params *params, uint64_t n_innings,
                             double censor_prob, uint64_t seed,
                             hb_dataset **out);

/* Inference. */
hb_status hb_analyze(const hb_dataset *dataset, const hb_ns_config *config,
                     hb_posterior **out);
void hb_posterior_free(hb_posterior *posterior);
size_t hb_posterior_len(const hb_posterior *posterior);
hb_status hb_posterior_sample(const hb_posterior *posterior, size_t index,
                              hb_params *out);
hb_status hb_posterior_log_evidence(const hb_posterior *posterior,
                                    double *log_z, double *log_z_err);
hb_status hb_posterior_summary(const hb_posterior *posterior, int param,
                               hb_summary *out);
hb_status hb_compare(const hb_posterior *a, const hb_posterior *b, int param,
                     uint64_t seed, double *out);
hb_status hb_log_bayes_factor(const hb_dataset *dataset,
                              const hb_ns_config *config, double *log_z,
                              double *log_z0, double *log_bayes_factor);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HAZARD_BAYES_H */
