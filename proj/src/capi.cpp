#include "rwot/rwot.h"

#include <exception>
#include <new>
#include <string>

#include "rwot/io.hpp"

struct rwot_generator {
  rwot::ConvexGenerator gen;
};

struct rwot_distribution {
  rwot::DiscreteDistribution dist;
};

namespace {

thread_local std::string last_error;

rwot_status to_status(rwot::ErrorCode code) { return static_cast<rwot_status>(code); }

template <typename Fn>
rwot_status guarded(Fn fn) {
  try {
    fn();
    return RWOT_OK;
  } catch (const rwot::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return RWOT_E_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) rwot::fail(rwot::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

rwot::ConvexGenerator make_generator(const char* kind, double epsilon, const rwot::Matrix* a) {
  require(kind, "generator kind");
  const auto k = rwot::parse_generator_kind(kind);
  if (!k) rwot::fail(rwot::ErrorCode::kInvalidArgument, std::string("unknown generator '") + kind + "'");
  const double eps = epsilon > 0.0 ? epsilon : rwot::kDefaultEntropyFloor;
  switch (*k) {
    case rwot::GeneratorKind::kSquaredL2:
      return rwot::ConvexGenerator::squared_l2();
    case rwot::GeneratorKind::kNegEntropy:
      return rwot::ConvexGenerator::neg_entropy(eps);
    case rwot::GeneratorKind::kItakuraSaito:
      return rwot::ConvexGenerator::itakura_saito(eps);
    case rwot::GeneratorKind::kMahalanobis:
      if (!a) rwot::fail(rwot::ErrorCode::kInvalidArgument, "mahalanobis needs a matrix");
      return rwot::ConvexGenerator::mahalanobis(*a);
  }
  rwot::fail(rwot::ErrorCode::kInvalidArgument, "unknown generator");
}

rwot::RateTarget rate_target(const rwot_distribution* target, int dim) {
  if (target) return target->dist;
  if (dim < 1) rwot::fail(rwot::ErrorCode::kInvalidArgument, "dimension must be positive");
  if (dim == 1) return rwot::five_atom_reference();
  return rwot::UniformCube{dim};
}

}  // namespace

extern "C" {

const char* rwot_version(void) { return RWOT_VERSION; }

const char* rwot_last_error(void) { return last_error.c_str(); }

const char* rwot_status_name(rwot_status status) {
  if (status == RWOT_OK) return "Ok";
  if (status == RWOT_E_INTERNAL) return "Internal";
  if (status >= RWOT_E_DOMAIN && status <= RWOT_E_IO)
    return rwot::error_code_name(static_cast<rwot::ErrorCode>(status));
  return "Unknown";
}

rwot_status rwot_generator_create(const char* kind, double epsilon, const double* matrix, int dim,
                                  rwot_generator** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    rwot::Matrix a;
    if (matrix) {
      if (dim < 1) rwot::fail(rwot::ErrorCode::kInvalidArgument, "matrix dimension must be positive");
      a = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          matrix, dim, dim);
    }
    *out = new rwot_generator{make_generator(kind, epsilon, matrix ? &a : nullptr)};
  });
}

rwot_status rwot_generator_create_from_file(const char* kind, double epsilon,
                                            const char* matrix_path, rwot_generator** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    rwot::Matrix a;
    if (matrix_path) a = rwot::load_matrix(matrix_path);
    *out = new rwot_generator{make_generator(kind, epsilon, matrix_path ? &a : nullptr)};
  });
}

void rwot_generator_free(rwot_generator* gen) { delete gen; }

rwot_status rwot_generator_lipschitz(const rwot_generator* gen, double* out) {
  return guarded([&] {
    require(gen, "generator");
    require(out, "out");
    *out = gen->gen.lipschitz();
  });
}

rwot_status rwot_bregman(const rwot_generator* gen, const double* x, const double* y, int dim,
                         double* out) {
  return guarded([&] {
    require(gen, "generator");
    require(x, "x");
    require(y, "y");
    require(out, "out");
    if (dim < 1) rwot::fail(rwot::ErrorCode::kInvalidArgument, "dimension must be positive");
    *out = rwot::bregman_divergence(gen->gen, Eigen::Map<const rwot::Vector>(x, dim),
                                    Eigen::Map<const rwot::Vector>(y, dim));
  });
}

rwot_status rwot_distribution_create(const double* points, const double* weights, int n, int dim,
                                     rwot_distribution** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    require(points, "points");
    require(weights, "weights");
    if (n < 1 || dim < 1) rwot::fail(rwot::ErrorCode::kInvalidArgument, "empty distribution");
    rwot::PointMatrix p = Eigen::Map<const rwot::PointMatrix>(points, n, dim);
    *out = new rwot_distribution{
        rwot::DiscreteDistribution(p, Eigen::Map<const rwot::Vector>(weights, n))};
  });
}

rwot_status rwot_distribution_load(const char* path, rwot_distribution** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    require(path, "path");
    *out = new rwot_distribution{rwot::load_distribution(path)};
  });
}

rwot_status rwot_distribution_save(const rwot_distribution* dist, const char* path) {
  return guarded([&] {
    require(dist, "distribution");
    require(path, "path");
    rwot::save_distribution(path, dist->dist);
  });
}

rwot_status rwot_distribution_shape(const rwot_distribution* dist, int* n, int* dim) {
  return guarded([&] {
    require(dist, "distribution");
    if (n) *n = static_cast<int>(dist->dist.size());
    if (dim) *dim = static_cast<int>(dist->dist.dim());
  });
}

void rwot_distribution_free(rwot_distribution* dist) { delete dist; }

rwot_status rwot_rw_divergence(const rwot_generator* gen, const rwot_distribution* p,
                               const rwot_distribution* q, const char* plan_path, double* value,
                               double* gap) {
  return guarded([&] {
    require(gen, "generator");
    require(p, "p");
    require(q, "q");
    require(value, "value");
    const rwot::TransportSolution sol = rwot::solve_distributions(gen->gen, p->dist, q->dist);
    if (plan_path) rwot::save_plan(plan_path, sol.plan);
    *value = sol.objective;
    if (gap) *gap = sol.dual.gap;
  });
}

rwot_status rwot_verify(const char* suite, int trials, uint64_t seed, double tolerance_scale,
                        const char* report_path, int* passed, int* failed) {
  return guarded([&] {
    require(suite, "suite");
    const rwot::VerifyReport report = rwot::run_verify_suite(suite, trials, seed, tolerance_scale);
    if (report_path) rwot::save_verify_report(report_path, report);
    if (passed) *passed = report.passed();
    if (failed) *failed = report.failed();
  });
}

rwot_status rwot_rates(const rwot_generator* gen, const rwot_distribution* target, int dim,
                       const int* n_grid, int n_count, int trials, uint64_t seed,
                       const char* report_path, double* slope) {
  return guarded([&] {
    require(gen, "generator");
    require(n_grid, "n_grid");
    if (n_count < 1) rwot::fail(rwot::ErrorCode::kInvalidArgument, "empty sample-size grid");
    rwot::RateOptions opt;
    opt.n_grid.assign(n_grid, n_grid + n_count);
    opt.trials = trials;
    opt.seed = seed;
    const rwot::RateReport r = rwot::empirical_rate(gen->gen, rate_target(target, dim), opt);
    if (report_path) rwot::save_rate_report(report_path, r);
    if (slope) *slope = r.fitted_slope;
  });
}

rwot_status rwot_concentration(const rwot_generator* gen, const rwot_distribution* target, int dim,
                               int n, const double* eps, int eps_count, int trials, uint64_t seed,
                               const char* report_path, double* probs) {
  return guarded([&] {
    require(gen, "generator");
    require(eps, "eps");
    if (eps_count < 1) rwot::fail(rwot::ErrorCode::kInvalidArgument, "empty eps grid");
    const rwot::TailCurve c = rwot::empirical_concentration(
        gen->gen, rate_target(target, dim), n, std::vector<double>(eps, eps + eps_count), trials,
        seed);
    if (report_path) rwot::save_tail_curve(report_path, c);
    if (probs)
      for (int k = 0; k < eps_count; ++k) probs[k] = c.prob[static_cast<size_t>(k)];
  });
}

void rwot_gan_config_default(rwot_gan_config* cfg) {
  if (!cfg) return;
  const rwot::TrainConfig d;
  cfg->dataset = "ring8";
  cfg->generator_kind = "neg-entropy";
  cfg->symmetric_clip = 0;
  cfg->alpha = d.alpha;
  cfg->c = d.c;
  cfg->s = d.s;
  cfg->m = d.m;
  cfg->n_critic = d.n_critic;
  cfg->n_max = d.n_max;
  cfg->seed = 42;
}

rwot_status rwot_gan_train(const rwot_gan_config* cfg, const char* metrics_path,
                           const char* samples_path, double* final_coverage) {
  rwot::MetricsTimeline timeline;
  bool started = false;
  const rwot_status st = guarded([&] {
    require(cfg, "config");
    require(cfg->dataset, "dataset");
    rwot::TrainConfig tc;
    tc.alpha = cfg->alpha;
    tc.c = cfg->c;
    tc.s = cfg->s;
    tc.m = cfg->m;
    tc.n_critic = cfg->n_critic;
    tc.n_max = cfg->n_max;
    tc.seed = cfg->seed;
    tc.clip = cfg->symmetric_clip ? rwot::ClipPolicy::kSymmetric : rwot::ClipPolicy::kAsymmetric;
    rwot::ConvexGenerator gen = make_generator(cfg->generator_kind, 0.0, nullptr);
    if (gen.kind() == rwot::GeneratorKind::kMahalanobis)
      rwot::fail(rwot::ErrorCode::kInvalidArgument, "gan-train supports separable generators only");
    const bool unit_box = gen.kind() == rwot::GeneratorKind::kNegEntropy ||
                          gen.kind() == rwot::GeneratorKind::kItakuraSaito;
    rwot::Trainer trainer(tc, rwot::Dataset::make(cfg->dataset, unit_box), gen);
    started = true;
    trainer.run(timeline);
    if (metrics_path) rwot::save_metrics(metrics_path, timeline);
    const rwot::PointMatrix samples = trainer.sample(1024, rwot::derive_seed(tc.seed, 200));
    if (samples_path) rwot::save_samples(samples_path, samples);
    if (final_coverage)
      *final_coverage = rwot::mode_coverage(samples, trainer.dataset().modes(),
                                            trainer.dataset().coverage_radius());
  });
  if (st == RWOT_E_NONFINITE && started && metrics_path) {
    const std::string keep = last_error;
    guarded([&] { rwot::save_metrics(metrics_path, timeline); });
    last_error = keep;
  }
  return st;
}

}  // extern "C"
