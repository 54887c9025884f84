#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rwot/bregman.hpp"
#include "rwot/distribution.hpp"
#include "rwot/random.hpp"

namespace rwot {

// Columns are samples throughout: a batch of m points in R^d is d x m.
using Batch = Eigen::MatrixXd;

// Output layer: linear, or a logistic scaled into [lo, hi].
struct OutputMap {
  bool logistic = false;
  double lo = 0.0;
  double hi = 1.0;
};

// Fully connected ReLU network. The output layer is linear, or squashed
// into [lo, hi] by a scaled logistic.
class MlpNetwork {
 public:
  // Activations kept by forward() for backward().
  struct Tape {
    std::vector<Batch> act;  // act[0] = input, act[k] = output of layer k
    std::vector<Batch> pre;  // pre-activations per layer
  };

  MlpNetwork() = default;
  MlpNetwork(std::vector<int> dims, OutputMap out = OutputMap());

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  const OutputMap& output_map() const { return out_; }

  // sum_k (d_k + 1) d_{k+1}; layer k stores W_k (column-major) then b_k.
  Eigen::Index parameter_count() const { return params_.size(); }
  const Vector& parameters() const { return params_; }
  Vector& parameters() { return params_; }

  Batch forward(const Batch& x, Tape* tape = nullptr) const;
  // Vector-Jacobian product: gradient of sum_ij grad_out_ij * y_ij with
  // respect to the parameters and, if requested, the input.
  Vector backward(const Tape& tape, const Batch& grad_out, Batch* grad_in = nullptr) const;

  void init_uniform(double bound, Rng& rng);
  // N(0, 2 / fan_in) weights, zero biases.
  void init_he(Rng& rng);

 private:
  Eigen::Map<const Matrix> weight(size_t k) const;
  Eigen::Map<const Vector> bias(size_t k) const;

  std::vector<int> dims_;
  std::vector<Eigen::Index> offsets_;
  OutputMap out_;
  Vector params_;
};

// Mean-square scaled gradient: ms <- rho ms + (1 - rho) g^2, step g / sqrt(ms + delta).
struct RmsPropState {
  Vector mean_square;
  double rho = 0.9;
  double delta = 1e-8;

  Vector direction(const Vector& grad);
};

enum class ClipPolicy { kAsymmetric, kSymmetric };

// Asymmetric: [-S |(grad phi)^-1(-c)|, S (grad phi)^-1(c)], componentwise
// scalar inverse. Symmetric: [-c, c]. Throws kRangeViolation when +-c is
// outside the scalar image of grad phi and kInvalidArgument for a generator
// that is not separable.
std::pair<double, double> clip_bounds(ClipPolicy policy, const ConvexGenerator& gen, double c,
                                      double s);

Vector asymmetric_clip(const Vector& w, const ConvexGenerator& gen, double c, double s);

struct TrainConfig {
  double alpha = 0.0005;
  double c = 0.005;
  double s = 0.01;
  int m = 64;
  int n_critic = 5;
  int n_max = 10000;
  std::uint64_t seed = 42;
  ClipPolicy clip = ClipPolicy::kAsymmetric;
  std::vector<int> critic_hidden = {64, 64};
  std::vector<int> generator_hidden = {64, 64};
  int latent_dim = 2;
  // Mode coverage is evaluated every `coverage_every` generator steps and
  // at the last one, on `coverage_samples` fresh samples.
  int coverage_every = 500;
  int coverage_samples = 1024;

  // Throws kInvalidArgument for non-positive parameters.
  void validate() const;
};

// Gaussian mixture in the plane, optionally mapped affinely into the unit
// box so that entropy-type generators see positive data.
class Dataset {
 public:
  // "ring8": 8 modes on a circle of radius 2; "grid25": 5 x 5 grid with
  // spacing 2; "single-gaussian": one mode at the origin. sigma = 0.02.
  static Dataset make(const std::string& name, bool unit_box);

  const std::string& name() const { return name_; }
  const PointMatrix& modes() const { return modes_; }
  double sigma() const { return sigma_; }
  // Three standard deviations.
  double coverage_radius() const { return 3.0 * sigma_; }

  Batch sample(int m, Rng& rng) const;

 private:
  std::string name_;
  PointMatrix modes_;
  double sigma_ = 0.02;
};

// Fraction of modes with at least one sample within `radius`.
double mode_coverage(const PointMatrix& samples, const PointMatrix& modes, double radius);

struct StepStats {
  double loss = 0.0;
  double grad_norm = 0.0;
};

// g_w = mean grad f_w(x_i) - mean grad f_w(g_theta(z_i)); returns the gradient
// and reports d_loss = mean f(fake) - mean f(real).
Vector critic_gradient(const MlpNetwork& critic, const Batch& real, const Batch& fake,
                       double* d_loss = nullptr);

// g_theta = -mean grad_theta f_w(grad phi(g_theta(z_i))), backpropagated
// through the Hessian of phi; reports g_loss = -mean f(grad phi(g)).
Vector generator_gradient(const MlpNetwork& critic, const MlpNetwork& generator,
                          const Batch& noise, const ConvexGenerator& gen,
                          double* g_loss = nullptr);

// Ascent step w <- w + alpha RMSProp(g_w), then the clip. Throws kNonFinite.
StepStats critic_step(MlpNetwork& critic, const MlpNetwork& generator, const Batch& real,
                      const Batch& noise, RmsPropState& opt, const TrainConfig& cfg,
                      const ConvexGenerator& gen);

// theta <- theta - alpha RMSProp(g_theta). Throws kNonFinite, and
// kDomainViolation if a generated point leaves the generator's domain.
StepStats generator_step(const MlpNetwork& critic, MlpNetwork& generator, const Batch& noise,
                         RmsPropState& opt, const TrainConfig& cfg, const ConvexGenerator& gen);

struct MetricsRecord {
  int iter = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double w_min = 0.0;
  double w_max = 0.0;
  double grad_norm_w = 0.0;
  double grad_norm_theta = 0.0;
  double mode_coverage = 0.0;
};

struct MetricsTimeline {
  std::vector<MetricsRecord> records;
};

class Trainer {
 public:
  Trainer(TrainConfig cfg, Dataset data, ConvexGenerator gen);

  // Runs cfg.n_max outer iterations, appending one record per generator
  // step. On kNonFinite the records so far stay in `timeline`.
  void run(MetricsTimeline& timeline);
  // One outer iteration: n_critic critic steps, one generator step.
  MetricsRecord iterate();

  PointMatrix sample(int n, std::uint64_t seed) const;
  double coverage(int n, std::uint64_t seed) const;

  const MlpNetwork& critic() const { return critic_; }
  const MlpNetwork& generator() const { return generator_; }
  const TrainConfig& config() const { return cfg_; }
  const Dataset& dataset() const { return data_; }
  std::pair<double, double> bounds() const { return bounds_; }

 private:
  Batch noise(int m, Rng& rng) const;

  TrainConfig cfg_;
  Dataset data_;
  ConvexGenerator gen_;
  std::pair<double, double> bounds_;
  MlpNetwork critic_;
  MlpNetwork generator_;
  RmsPropState critic_opt_;
  RmsPropState generator_opt_;
  Rng data_rng_;
  Rng noise_rng_;
  int iter_ = 0;
  double last_coverage_ = 0.0;
};

// Output map placing generator samples in the generator's domain: [eps, 1]
// for the entropy-type generators, linear otherwise.
OutputMap output_map_for(const ConvexGenerator& gen);

}  // namespace rwot
