/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rwot/rwot.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  rwot_generator* l2 = NULL;
  rwot_generator* ne = NULL;
  rwot_generator* maha = NULL;
  rwot_generator* bad = NULL;
  rwot_distribution* p = NULL;
  rwot_distribution* q = NULL;
  rwot_distribution* r = NULL;
  double v = 0.0, gap = -1.0, lip = 0.0;
  int n = 0, d = 0;

  EXPECT(strlen(rwot_version()) > 0);

  EXPECT(rwot_generator_create("squared-l2", 0.0, NULL, 0, &l2) == RWOT_OK);
  EXPECT(rwot_generator_create("neg-entropy", 0.01, NULL, 0, &ne) == RWOT_OK);
  EXPECT(rwot_generator_create("no-such", 0.0, NULL, 0, &bad) == RWOT_E_ARGUMENT);
  EXPECT(bad == NULL);
  EXPECT(strstr(rwot_last_error(), "no-such") != NULL);
  EXPECT(strcmp(rwot_status_name(RWOT_E_ARGUMENT), "InvalidArgument") == 0);

  {
    const double indefinite[4] = {1.0, 0.0, 0.0, -1.0};
    const double spd[4] = {2.0, 0.5, 0.5, 1.0};
    EXPECT(rwot_generator_create("mahalanobis", 0.0, indefinite, 2, &bad) == RWOT_E_ARGUMENT);
    EXPECT(rwot_generator_create("mahalanobis", 0.0, NULL, 0, &bad) == RWOT_E_ARGUMENT);
    EXPECT(rwot_generator_create("mahalanobis", 0.0, spd, 2, &maha) == RWOT_OK);
  }

  EXPECT(rwot_generator_lipschitz(l2, &lip) == RWOT_OK);
  EXPECT(lip == 2.0);

  {
    const double x[1] = {3.0}, y[1] = {1.0}, z[1] = {-1.0};
    EXPECT(rwot_bregman(l2, x, y, 1, &v) == RWOT_OK);
    EXPECT(fabs(v - 4.0) < 1e-15);
    EXPECT(rwot_bregman(ne, z, y, 1, &v) == RWOT_E_DOMAIN);
  }

  {
    const double pts_p[2] = {0.0, 1.0}, w_p[2] = {0.5, 0.5};
    const double pts_q[1] = {0.5}, w_q[1] = {1.0};
    const double w_bad[2] = {-0.5, 1.5};
    EXPECT(rwot_distribution_create(pts_p, w_p, 2, 1, &p) == RWOT_OK);
    EXPECT(rwot_distribution_create(pts_q, w_q, 1, 1, &q) == RWOT_OK);
    EXPECT(rwot_distribution_create(pts_p, w_bad, 2, 1, &r) == RWOT_E_WEIGHT);
    EXPECT(r == NULL);
  }
  EXPECT(rwot_distribution_shape(p, &n, &d) == RWOT_OK);
  EXPECT(n == 2 && d == 1);

  /* each half unit of mass moves 0.5 at squared cost 0.25 */
  EXPECT(rwot_rw_divergence(l2, p, q, NULL, &v, &gap) == RWOT_OK);
  EXPECT(fabs(v - 0.25) < 1e-12);
  EXPECT(gap >= 0.0 && gap <= 1e-9);
  EXPECT(rwot_rw_divergence(ne, p, q, NULL, &v, NULL) == RWOT_E_DOMAIN);

  EXPECT(rwot_rw_divergence(NULL, p, q, NULL, &v, NULL) == RWOT_E_ARGUMENT);
  EXPECT(rwot_distribution_load("/nonexistent/rwot.csv", &r) == RWOT_E_IO);

  {
    int passed = 0, failed = -1;
    EXPECT(rwot_verify("duality", 5, 42, 1.0, NULL, &passed, &failed) == RWOT_OK);
    EXPECT(passed == 5 && failed == 0);
    EXPECT(rwot_verify("nonsense", 5, 42, 1.0, NULL, &passed, &failed) == RWOT_E_ARGUMENT);
  }

  {
    const int grid[3] = {8, 16, 32};
    double slope = 0.0;
    EXPECT(rwot_rates(l2, NULL, 1, grid, 3, 5, 42, NULL, &slope) == RWOT_OK);
    EXPECT(isfinite(slope) && slope < 0.0);
    EXPECT(rwot_rates(l2, NULL, 1, grid, 0, 5, 42, NULL, &slope) == RWOT_E_ARGUMENT);
  }

  {
    const double eps[3] = {0.001, 0.01, 0.1};
    double probs[3] = {-1.0, -1.0, -1.0};
    EXPECT(rwot_concentration(l2, NULL, 1, 16, eps, 3, 20, 42, NULL, probs) == RWOT_OK);
    EXPECT(probs[0] >= probs[1] && probs[1] >= probs[2] && probs[2] >= 0.0);
  }

  {
    rwot_gan_config cfg;
    double cov = -1.0;
    rwot_gan_config_default(&cfg);
    EXPECT(cfg.alpha == 0.0005 && cfg.c == 0.005 && cfg.s == 0.01);
    EXPECT(cfg.m == 64 && cfg.n_critic == 5 && cfg.n_max == 10000);
    cfg.n_max = 3;
    EXPECT(rwot_gan_train(&cfg, NULL, NULL, &cov) == RWOT_OK);
    EXPECT(cov >= 0.0 && cov <= 1.0);
    cfg.generator_kind = "itakura-saito";
    EXPECT(rwot_gan_train(&cfg, NULL, NULL, &cov) == RWOT_E_RANGE);
    cfg.generator_kind = "neg-entropy";
    cfg.m = 0;
    EXPECT(rwot_gan_train(&cfg, NULL, NULL, &cov) == RWOT_E_ARGUMENT);
  }

  rwot_generator_free(l2);
  rwot_generator_free(ne);
  rwot_generator_free(maha);
  rwot_generator_free(NULL);
  rwot_distribution_free(p);
  rwot_distribution_free(q);
  rwot_distribution_free(NULL);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("all C API checks passed\n");
  return failures ? 1 : 0;
}
