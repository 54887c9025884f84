#include "rwot/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rwot {

MlpNetwork::MlpNetwork(std::vector<int> dims, OutputMap out) : dims_(std::move(dims)), out_(out) {
  if (dims_.size() < 2) fail(ErrorCode::kInvalidArgument, "network needs at least two layers");
  for (int d : dims_)
    if (d < 1) fail(ErrorCode::kInvalidArgument, "layer widths must be positive");
  Eigen::Index total = 0;
  for (size_t k = 0; k + 1 < dims_.size(); ++k) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(dims_[k] + 1) * dims_[k + 1];
  }
  params_ = Vector::Zero(total);
}

Eigen::Map<const Matrix> MlpNetwork::weight(size_t k) const {
  return {params_.data() + offsets_[k], dims_[k + 1], dims_[k]};
}

Eigen::Map<const Vector> MlpNetwork::bias(size_t k) const {
  return {params_.data() + offsets_[k] + dims_[k + 1] * dims_[k], dims_[k + 1]};
}

Batch MlpNetwork::forward(const Batch& x, Tape* tape) const {
  if (x.rows() != input_dim()) fail(ErrorCode::kInvalidArgument, "input has the wrong dimension");
  const size_t layers = dims_.size() - 1;
  Batch a = x;
  if (tape) {
    tape->act.assign(1, x);
    tape->pre.clear();
  }
  for (size_t k = 0; k < layers; ++k) {
    Batch z = weight(k) * a;
    z.colwise() += bias(k);
    if (tape) tape->pre.push_back(z);
    if (k + 1 < layers) {
      a = z.cwiseMax(0.0);
    } else if (out_.logistic) {
      a = (out_.lo + (out_.hi - out_.lo) / (1.0 + (-z.array()).exp())).matrix();
    } else {
      a = std::move(z);
    }
    if (tape) tape->act.push_back(a);
  }
  return a;
}

Vector MlpNetwork::backward(const Tape& tape, const Batch& grad_out, Batch* grad_in) const {
  const size_t layers = dims_.size() - 1;
  Vector grad = Vector::Zero(params_.size());
  Batch delta = grad_out;
  for (size_t k = layers; k-- > 0;) {
    const Batch& z = tape.pre[k];
    if (k + 1 == layers) {
      if (out_.logistic) {
        const Eigen::ArrayXXd s = (tape.act[k + 1].array() - out_.lo) / (out_.hi - out_.lo);
        delta = (delta.array() * (out_.hi - out_.lo) * s * (1.0 - s)).matrix();
      }
    } else {
      delta = (delta.array() * (z.array() > 0.0).cast<double>()).matrix();
    }
    const Eigen::Index wsize = static_cast<Eigen::Index>(dims_[k + 1]) * dims_[k];
    Eigen::Map<Matrix>(grad.data() + offsets_[k], dims_[k + 1], dims_[k]) =
        delta * tape.act[k].transpose();
    grad.segment(offsets_[k] + wsize, dims_[k + 1]) = delta.rowwise().sum();
    if (k > 0 || grad_in) delta = weight(k).transpose() * delta;
  }
  if (grad_in) *grad_in = delta;
  return grad;
}

void MlpNetwork::init_uniform(double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < params_.size(); ++i) params_[i] = u(rng);
}

void MlpNetwork::init_he(Rng& rng) {
  params_.setZero();
  for (size_t k = 0; k + 1 < dims_.size(); ++k) {
    std::normal_distribution<double> n(0.0, std::sqrt(2.0 / dims_[k]));
    const Eigen::Index wsize = static_cast<Eigen::Index>(dims_[k + 1]) * dims_[k];
    for (Eigen::Index i = 0; i < wsize; ++i) params_[offsets_[k] + i] = n(rng);
  }
}

Vector RmsPropState::direction(const Vector& grad) {
  if (mean_square.size() != grad.size()) mean_square = Vector::Zero(grad.size());
  mean_square = rho * mean_square + (1.0 - rho) * grad.cwiseAbs2();
  return (grad.array() / (mean_square.array() + delta).sqrt()).matrix();
}

std::pair<double, double> clip_bounds(ClipPolicy policy, const ConvexGenerator& gen, double c,
                                      double s) {
  if (!(c > 0.0) || !(s > 0.0)) fail(ErrorCode::kInvalidArgument, "c and S must be positive");
  if (policy == ClipPolicy::kSymmetric) return {-c, c};
  const double upper = s * gen.scalar_grad_inverse(c);
  const double lower = -s * std::abs(gen.scalar_grad_inverse(-c));
  if (!(upper > 0.0))
    fail(ErrorCode::kRangeViolation, "clip interval is empty for this generator");
  return {lower, upper};
}

Vector asymmetric_clip(const Vector& w, const ConvexGenerator& gen, double c, double s) {
  const auto [lo, hi] = clip_bounds(ClipPolicy::kAsymmetric, gen, c, s);
  return w.cwiseMax(lo).cwiseMin(hi);
}

void TrainConfig::validate() const {
  if (!(alpha > 0.0) || !(c > 0.0) || !(s > 0.0) || m < 1 || n_critic < 1 || n_max < 0 ||
      latent_dim < 1 || coverage_every < 1 || coverage_samples < 1)
    fail(ErrorCode::kInvalidArgument, "training parameters must be positive");
  for (int h : critic_hidden)
    if (h < 1) fail(ErrorCode::kInvalidArgument, "hidden widths must be positive");
  for (int h : generator_hidden)
    if (h < 1) fail(ErrorCode::kInvalidArgument, "hidden widths must be positive");
}

Dataset Dataset::make(const std::string& name, bool unit_box) {
  Dataset d;
  d.name_ = name;
  if (name == "ring8") {
    d.modes_.resize(8, 2);
    for (int k = 0; k < 8; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 8.0;
      d.modes_(k, 0) = 2.0 * std::cos(a);
      d.modes_(k, 1) = 2.0 * std::sin(a);
    }
  } else if (name == "grid25") {
    d.modes_.resize(25, 2);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        d.modes_(i * 5 + j, 0) = 2.0 * (i - 2);
        d.modes_(i * 5 + j, 1) = 2.0 * (j - 2);
      }
  } else if (name == "single-gaussian") {
    d.modes_ = PointMatrix::Zero(1, 2);
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown dataset '" + name + "'");
  }
  if (unit_box) {
    // Modes into [0.1, 0.9]^2.
    const double extent = std::max(1.0, d.modes_.cwiseAbs().maxCoeff());
    const double scale = 0.4 / extent;
    d.modes_ = (d.modes_.array() * scale + 0.5).matrix();
    d.sigma_ *= scale;
  }
  return d;
}

Batch Dataset::sample(int m, Rng& rng) const {
  std::uniform_int_distribution<Eigen::Index> pick(0, modes_.rows() - 1);
  std::normal_distribution<double> noise(0.0, sigma_);
  Batch x(2, m);
  for (int s = 0; s < m; ++s) {
    const Eigen::Index k = pick(rng);
    x(0, s) = modes_(k, 0) + noise(rng);
    x(1, s) = modes_(k, 1) + noise(rng);
  }
  return x;
}

double mode_coverage(const PointMatrix& samples, const PointMatrix& modes, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::kInvalidArgument, "coverage radius must be positive");
  if (modes.rows() == 0) return 0.0;
  int hit = 0;
  for (Eigen::Index k = 0; k < modes.rows(); ++k) {
    for (Eigen::Index s = 0; s < samples.rows(); ++s) {
      if ((samples.row(s) - modes.row(k)).norm() <= radius) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(modes.rows());
}

Vector critic_gradient(const MlpNetwork& critic, const Batch& real, const Batch& fake,
                       double* d_loss) {
  const Eigen::Index m = real.cols(), k = fake.cols();
  Batch both(real.rows(), m + k);
  both << real, fake;
  MlpNetwork::Tape tape;
  const Batch f = critic.forward(both, &tape);
  Batch weights(1, m + k);
  weights.leftCols(m).setConstant(1.0 / m);
  weights.rightCols(k).setConstant(-1.0 / k);
  if (d_loss) *d_loss = f.rightCols(k).mean() - f.leftCols(m).mean();
  return critic.backward(tape, weights);
}

namespace {

// grad phi applied to each column, and H(y) v per column.
Batch grad_columns(const ConvexGenerator& gen, const Batch& y) {
  Batch out(y.rows(), y.cols());
  for (Eigen::Index s = 0; s < y.cols(); ++s) out.col(s) = gen.grad(y.col(s));
  return out;
}

void require_finite(const Vector& g, const char* what) {
  if (!g.allFinite()) fail(ErrorCode::kNonFinite, std::string("non-finite ") + what + " gradient");
}

}  // namespace

Vector generator_gradient(const MlpNetwork& critic, const MlpNetwork& generator,
                          const Batch& noise, const ConvexGenerator& gen, double* g_loss) {
  MlpNetwork::Tape gtape, ftape;
  const Batch y = generator.forward(noise, &gtape);
  for (Eigen::Index s = 0; s < y.cols(); ++s) gen.require_in_domain(y.col(s));
  const Batch u = grad_columns(gen, y);
  const Batch f = critic.forward(u, &ftape);
  const double m = static_cast<double>(noise.cols());
  if (g_loss) *g_loss = -f.mean();
  Batch du;
  critic.backward(ftape, Batch::Constant(1, noise.cols(), -1.0 / m), &du);
  Batch dy(y.rows(), y.cols());
  for (Eigen::Index s = 0; s < y.cols(); ++s) dy.col(s) = gen.hessian_apply(y.col(s), du.col(s));
  return generator.backward(gtape, dy);
}

StepStats critic_step(MlpNetwork& critic, const MlpNetwork& generator, const Batch& real,
                      const Batch& noise, RmsPropState& opt, const TrainConfig& cfg,
                      const ConvexGenerator& gen) {
  StepStats st;
  const Batch fake = generator.forward(noise);
  const Vector g = critic_gradient(critic, real, fake, &st.loss);
  require_finite(g, "critic");
  st.grad_norm = g.norm();
  const auto [lo, hi] = clip_bounds(cfg.clip, gen, cfg.c, cfg.s);
  Vector& w = critic.parameters();
  w += cfg.alpha * opt.direction(g);
  w = w.cwiseMax(lo).cwiseMin(hi);
  return st;
}

StepStats generator_step(const MlpNetwork& critic, MlpNetwork& generator, const Batch& noise,
                         RmsPropState& opt, const TrainConfig& cfg, const ConvexGenerator& gen) {
  StepStats st;
  const Vector g = generator_gradient(critic, generator, noise, gen, &st.loss);
  require_finite(g, "generator");
  st.grad_norm = g.norm();
  generator.parameters() -= cfg.alpha * opt.direction(g);
  return st;
}

OutputMap output_map_for(const ConvexGenerator& gen) {
  if (gen.kind() == GeneratorKind::kNegEntropy || gen.kind() == GeneratorKind::kItakuraSaito)
    return {true, gen.epsilon(), 1.0};
  return {};
}

namespace {

enum Stream : std::uint64_t { kCriticInit = 1, kGeneratorInit, kData, kNoise };

std::vector<int> layer_dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims = {in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

bool needs_unit_box(const ConvexGenerator& gen) {
  return gen.kind() == GeneratorKind::kNegEntropy || gen.kind() == GeneratorKind::kItakuraSaito;
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, Dataset data, ConvexGenerator gen)
    : cfg_(std::move(cfg)), data_(std::move(data)), gen_(std::move(gen)) {
  cfg_.validate();
  if (gen_.fixed_dim() > 0 && gen_.fixed_dim() != 2)
    fail(ErrorCode::kInvalidArgument, "generator must act on R^2");
  bounds_ = clip_bounds(cfg_.clip, gen_, cfg_.c, cfg_.s);
  critic_ = MlpNetwork(layer_dims(2, cfg_.critic_hidden, 1));
  generator_ = MlpNetwork(layer_dims(cfg_.latent_dim, cfg_.generator_hidden, 2), output_map_for(gen_));
  Rng ci = make_rng(cfg_.seed, kCriticInit);
  critic_.init_uniform(0.9 * std::min(-bounds_.first, bounds_.second), ci);
  Rng gi = make_rng(cfg_.seed, kGeneratorInit);
  generator_.init_he(gi);
  data_rng_ = make_rng(cfg_.seed, kData);
  noise_rng_ = make_rng(cfg_.seed, kNoise);
  if (needs_unit_box(gen_) && data_.modes().minCoeff() <= gen_.epsilon())
    fail(ErrorCode::kDomainViolation, "dataset is not inside the generator's domain");
}

Batch Trainer::noise(int m, Rng& rng) const {
  std::normal_distribution<double> n(0.0, 1.0);
  Batch z(cfg_.latent_dim, m);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n(rng);
  return z;
}

MetricsRecord Trainer::iterate() {
  MetricsRecord r;
  StepStats cs;
  for (int t = 0; t < cfg_.n_critic; ++t) {
    const Batch real = data_.sample(cfg_.m, data_rng_);
    const Batch z = noise(cfg_.m, noise_rng_);
    cs = critic_step(critic_, generator_, real, z, critic_opt_, cfg_, gen_);
  }
  const Batch z = noise(cfg_.m, noise_rng_);
  const StepStats gs = generator_step(critic_, generator_, z, generator_opt_, cfg_, gen_);
  ++iter_;
  r.iter = iter_;
  r.d_loss = cs.loss;
  r.g_loss = gs.loss;
  r.w_min = critic_.parameters().minCoeff();
  r.w_max = critic_.parameters().maxCoeff();
  r.grad_norm_w = cs.grad_norm;
  r.grad_norm_theta = gs.grad_norm;
  if (iter_ % cfg_.coverage_every == 0 || iter_ == cfg_.n_max || iter_ == 1)
    last_coverage_ = coverage(cfg_.coverage_samples, derive_seed(cfg_.seed, 100, iter_));
  r.mode_coverage = last_coverage_;
  return r;
}

void Trainer::run(MetricsTimeline& timeline) {
  while (iter_ < cfg_.n_max) timeline.records.push_back(iterate());
}

PointMatrix Trainer::sample(int n, std::uint64_t seed) const {
  Rng rng(seed);
  const Batch y = generator_.forward(noise(n, rng));
  return y.transpose();
}

double Trainer::coverage(int n, std::uint64_t seed) const {
  return mode_coverage(sample(n, seed), data_.modes(), data_.coverage_radius());
}

}  // namespace rwot
