#ifndef RWOT_RWOT_H
#define RWOT_RWOT_H

/* C interface to the relaxed Wasserstein toolkit. Every call returns an
 * rwot_status; on failure rwot_last_error() holds a message for the calling
 * thread until its next failing call. Objects are opaque and owned by the
 * caller, who releases them with the matching *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RWOT_API __declspec(dllexport)
#else
#define RWOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rwot_status {
  RWOT_OK = 0,
  RWOT_E_DOMAIN = 1,
  RWOT_E_RANGE = 2,
  RWOT_E_UNBALANCED = 3,
  RWOT_E_TOO_LARGE = 4,
  RWOT_E_PARSE = 5,
  RWOT_E_WEIGHT = 6,
  RWOT_E_TIE = 7,
  RWOT_E_NONFINITE = 8,
  RWOT_E_BUDGET = 9,
  RWOT_E_ARGUMENT = 10,
  RWOT_E_IO = 11,
  RWOT_E_INTERNAL = 100
} rwot_status;

typedef struct rwot_generator rwot_generator;
typedef struct rwot_distribution rwot_distribution;

RWOT_API const char* rwot_version(void);
RWOT_API const char* rwot_last_error(void);
RWOT_API const char* rwot_status_name(rwot_status status);

/* kind: "squared-l2", "neg-entropy", "itakura-saito" or "mahalanobis".
 * epsilon <= 0 selects the default floor for the entropy-type kinds.
 * matrix is dim x dim row-major and used only for "mahalanobis". */
RWOT_API rwot_status rwot_generator_create(const char* kind, double epsilon, const double* matrix,
                                           int dim, rwot_generator** out);
/* Same, reading the Mahalanobis matrix from a CSV file. */
RWOT_API rwot_status rwot_generator_create_from_file(const char* kind, double epsilon,
                                                     const char* matrix_path,
                                                     rwot_generator** out);
RWOT_API void rwot_generator_free(rwot_generator* gen);
RWOT_API rwot_status rwot_generator_lipschitz(const rwot_generator* gen, double* out);
RWOT_API rwot_status rwot_bregman(const rwot_generator* gen, const double* x, const double* y,
                                  int dim, double* out);

/* points is n x dim row-major. */
RWOT_API rwot_status rwot_distribution_create(const double* points, const double* weights, int n,
                                              int dim, rwot_distribution** out);
RWOT_API rwot_status rwot_distribution_load(const char* path, rwot_distribution** out);
RWOT_API rwot_status rwot_distribution_save(const rwot_distribution* dist, const char* path);
RWOT_API rwot_status rwot_distribution_shape(const rwot_distribution* dist, int* n, int* dim);
RWOT_API void rwot_distribution_free(rwot_distribution* dist);

/* Optimal transport with Bregman cost. plan_path may be NULL; otherwise the
 * plan is written there as i,j,mass. gap may be NULL. */
RWOT_API rwot_status rwot_rw_divergence(const rwot_generator* gen, const rwot_distribution* p,
                                        const rwot_distribution* q, const char* plan_path,
                                        double* value, double* gap);

/* Runs a verification suite and writes the report CSV. tolerance_scale
 * multiplies every pass threshold (1 is the default). */
RWOT_API rwot_status rwot_verify(const char* suite, int trials, uint64_t seed,
                                 double tolerance_scale, const char* report_path, int* passed,
                                 int* failed);

/* Convergence rate. target may be NULL: dim 1 then uses the built-in 5-atom
 * law and dim > 1 the two-sample unit-cube proxy. */
RWOT_API rwot_status rwot_rates(const rwot_generator* gen, const rwot_distribution* target,
                                int dim, const int* n_grid, int n_count, int trials,
                                uint64_t seed, const char* report_path, double* slope);

/* Tail probabilities P(W >= eps[k]) written to probs (length eps_count) and,
 * if report_path is not NULL, to CSV. */
RWOT_API rwot_status rwot_concentration(const rwot_generator* gen, const rwot_distribution* target,
                                        int dim, int n, const double* eps, int eps_count,
                                        int trials, uint64_t seed, const char* report_path,
                                        double* probs);

typedef struct rwot_gan_config {
  const char* dataset;        /* "ring8", "grid25", "single-gaussian" */
  const char* generator_kind; /* as for rwot_generator_create */
  int symmetric_clip;         /* 0: asymmetric through grad phi, 1: [-c, c] */
  double alpha;
  double c;
  double s;
  int m;
  int n_critic;
  int n_max;
  uint64_t seed;
} rwot_gan_config;

RWOT_API void rwot_gan_config_default(rwot_gan_config* cfg);

/* Trains and writes metrics (one row per generator step) and 1024 final
 * samples. On RWOT_E_NONFINITE the partial metrics are still written. */
RWOT_API rwot_status rwot_gan_train(const rwot_gan_config* cfg, const char* metrics_path,
                                    const char* samples_path, double* final_coverage);

#ifdef __cplusplus
}
#endif

#endif
