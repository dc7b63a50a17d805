/* Minimal C consumer: parse innings, evaluate the model, run a small
 * inference, and read the results back. Exits nonzero on the first
 * unexpected status. */

#include <stdio.h>
#include <stdlib.h>
#include <math.h>

#include "hazard_bayes.h"

#define CHECK(expr)                                                        \
  do {                                                                     \
    hb_status status_ = (expr);                                            \
    if (status_ != HB_OK) {                                                \
      fprintf(stderr, "%s -> %d: %s\n", #expr, (int)status_,               \
              hb_last_error());                                            \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  printf("hazard-bayes %s\n", hb_version());

  hb_params params = {13.2, 58.5, 3.1};
  double value = 0.0;
  CHECK(hb_effective_average(&params, 0.0, &value));
  if (fabs(value - 13.2) > 1e-12) {
    fprintf(stderr, "mu(0) = %f, expected 13.2\n", value);
    return 1;
  }
  CHECK(hb_hazard(&params, 0, &value));
  if (fabs(value - 1.0 / 14.2) > 1e-12) {
    fprintf(stderr, "H(0) = %f\n", value);
    return 1;
  }

  hb_dataset *data = NULL;
  CHECK(hb_dataset_parse_csv("player,score\nsmoke,12\nsmoke,0\nsmoke,31*\n",
                             NULL, &data));
  if (hb_dataset_len(data) != 3) {
    fprintf(stderr, "expected 3 innings, got %zu\n", hb_dataset_len(data));
    return 1;
  }

  hb_params model = {5.0, 30.0, 3.0};
  double log_likelihood = 0.0;
  CHECK(hb_log_likelihood(data, &model, &log_likelihood));
  if (!(log_likelihood < 0.0)) {
    fprintf(stderr, "log likelihood %f\n", log_likelihood);
    return 1;
  }
  hb_dataset_free(data);

  hb_dataset *career = NULL;
  hb_params truth = {10.0, 40.0, 5.0};
  CHECK(hb_simulate_career(&truth, 120, 0.1, 7, &career));

  hb_ns_config config = {60, 30, 42};
  hb_posterior *posterior = NULL;
  CHECK(hb_analyze(career, &config, &posterior));

  hb_summary summary;
  CHECK(hb_posterior_summary(posterior, HB_PARAM_MU2, &summary));
  if (!(summary.lo68 <= summary.median && summary.median <= summary.hi68)) {
    fprintf(stderr, "summary out of order\n");
    return 1;
  }

  double log_z = 0.0, log_z_err = 0.0;
  CHECK(hb_posterior_log_evidence(posterior, &log_z, &log_z_err));

  double p_self = 0.0;
  CHECK(hb_compare(posterior, posterior, HB_PARAM_MU2, 1, &p_self));
  if (fabs(p_self - 0.5) > 1e-3) {
    fprintf(stderr, "self comparison %f\n", p_self);
    return 1;
  }

  hb_posterior_free(posterior);
  hb_dataset_free(career);

  printf("mu2 median %.2f (+%.2f/-%.2f), log Z %.2f +- %.2f\n",
         summary.median, summary.plus_err, summary.minus_err, log_z,
         log_z_err);
  return 0;
}
