#include "rwot/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rwot {

MomentStats moment_stats(const DiscreteDistribution& p, double q, double alpha, double gamma) {
  MomentStats s;
  s.q = q;
  s.alpha = alpha;
  s.gamma = gamma;
  s.m_q = 0.0;
  s.e_ag = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double r = p.points().row(i).norm();
    s.m_q += p.weight(i) * std::pow(r, q);
    s.e_ag += p.weight(i) * std::exp(gamma * std::pow(r, alpha));
  }
  return s;
}

namespace {

// C_ij = |x_i - z_j|^2 / 2.
Matrix half_squared_cost(const PointMatrix& x, const PointMatrix& z) {
  Matrix c(x.rows(), z.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < z.rows(); ++j) c(i, j) = 0.5 * (x.row(i) - z.row(j)).squaredNorm();
  return c;
}

PointMatrix grad_images(const ConvexGenerator& gen, const DiscreteDistribution& q) {
  PointMatrix z(q.size(), q.dim());
  for (Eigen::Index j = 0; j < q.size(); ++j) z.row(j) = gen.grad(q.point(j)).transpose();
  return z;
}

IdentityCheck make_check(double lhs, double rhs) { return {lhs, rhs, std::abs(lhs - rhs)}; }

}  // namespace

IdentityCheck verify_decomposition(const ConvexGenerator& gen, const DiscreteDistribution& p,
                                   const DiscreteDistribution& q) {
  const double w = rw_divergence(gen, p, q);
  const PointMatrix z = grad_images(gen, q);
  const double half_w2 =
      solve_transport(half_squared_cost(p.points(), z), p.weights(), q.weights()).objective;
  double ep = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Vector x = p.point(i);
    ep += p.weight(i) * (gen.phi(x) - 0.5 * x.squaredNorm());
  }
  double eq = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const Vector y = q.point(j);
    const Vector g = z.row(j).transpose();
    eq += q.weight(j) * (g.dot(y) - gen.phi(y) - 0.5 * g.squaredNorm());
  }
  return make_check(w, half_w2 + ep + eq);
}

DominationCheck verify_domination(const ConvexGenerator& gen, const DiscreteDistribution& p,
                                  const DiscreteDistribution& q) {
  DominationCheck d;
  d.w = rw_divergence(gen, p, q);
  const Vector lo = p.lower_corner().cwiseMin(q.lower_corner());
  const Vector hi = p.upper_corner().cwiseMax(q.upper_corner());
  d.lipschitz = gen.lipschitz_over_box(lo, hi);
  PointMatrix all(p.size() + q.size(), p.dim());
  all << p.points(), q.points();
  for (Eigen::Index i = 0; i < all.rows(); ++i)
    for (Eigen::Index j = i + 1; j < all.rows(); ++j)
      d.diameter = std::max(d.diameter, (all.row(i) - all.row(j)).norm());
  d.tv = tv_distance(p, q);
  d.w2_squared = solve_distributions(LqCost{2.0, 2.0}, p, q).objective;
  d.tv_bound = d.lipschitz * d.diameter * d.diameter * d.tv;
  d.w2_bound = 0.5 * d.lipschitz * d.w2_squared;
  d.bound_tv_ok = d.w <= d.tv_bound + 1e-9;
  d.bound_w2_ok = d.w <= d.w2_bound + 1e-9;
  return d;
}

IdentityCheck verify_duality(const ConvexGenerator& gen, const DiscreteDistribution& p,
                             const DiscreteDistribution& q) {
  const double w = rw_divergence(gen, p, q);
  const PointMatrix z = grad_images(gen, q);
  const TransportSolution sol =
      solve_transport(half_squared_cost(p.points(), z), p.weights(), q.weights());
  Vector f(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    f[i] = 0.5 * p.points().row(i).squaredNorm() - sol.dual.u[i];

  double rhs = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) rhs += p.weight(i) * (gen.phi(p.point(i)) - f[i]);
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const Vector y = q.point(j);
    const Vector g = z.row(j).transpose();
    double conj = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < p.size(); ++i)
      conj = std::max(conj, p.points().row(i).dot(g) - f[i]);
    rhs += q.weight(j) * (g.dot(y) - gen.phi(y) - conj);
  }
  return make_check(w, rhs);
}

// ---------------------------------------------------------------------------
// Parametric families

ThetaFamily::ThetaFamily(Kind kind, DiscreteDistribution latent, int out_dim)
    : kind_(kind), latent_(std::move(latent)), out_dim_(out_dim) {}

ThetaFamily ThetaFamily::location(DiscreteDistribution latent) {
  const int d = static_cast<int>(latent.dim());
  return ThetaFamily(Kind::kLocation, std::move(latent), d);
}

ThetaFamily ThetaFamily::affine(DiscreteDistribution latent, int out_dim) {
  if (out_dim < 1) fail(ErrorCode::kInvalidArgument, "affine family needs out_dim >= 1");
  return ThetaFamily(Kind::kAffine, std::move(latent), out_dim);
}

int ThetaFamily::parameter_count() const {
  if (kind_ == Kind::kLocation) return out_dim_;
  return out_dim_ * static_cast<int>(latent_.dim()) + out_dim_;
}

Vector ThetaFamily::apply(const Vector& theta, const VectorRef& z) const {
  if (theta.size() != parameter_count())
    fail(ErrorCode::kInvalidArgument, "theta has the wrong length");
  if (kind_ == Kind::kLocation) return z + theta;
  const Eigen::Index k = latent_.dim();
  const Eigen::Map<const Matrix> a(theta.data(), out_dim_, k);
  return a * z + theta.tail(out_dim_);
}

Matrix ThetaFamily::jacobian(const Vector& theta, const VectorRef& z) const {
  if (theta.size() != parameter_count())
    fail(ErrorCode::kInvalidArgument, "theta has the wrong length");
  if (kind_ == Kind::kLocation) return Matrix::Identity(out_dim_, out_dim_);
  const Eigen::Index k = latent_.dim();
  Matrix j = Matrix::Zero(out_dim_, parameter_count());
  // d(A z)_r / dA_rc = z_c; column-major index of A_rc is c * out_dim + r.
  for (Eigen::Index c = 0; c < k; ++c)
    for (int r = 0; r < out_dim_; ++r) j(r, c * out_dim_ + r) = z[c];
  j.rightCols(out_dim_) = Matrix::Identity(out_dim_, out_dim_);
  return j;
}

double ThetaFamily::lipschitz_in_theta(const VectorRef& z) const {
  return kind_ == Kind::kLocation ? 1.0 : z.norm() + 1.0;
}

PointMatrix ThetaFamily::images(const Vector& theta) const {
  PointMatrix out(latent_.size(), out_dim_);
  for (Eigen::Index k = 0; k < latent_.size(); ++k)
    out.row(k) = apply(theta, latent_.point(k)).transpose();
  return out;
}

namespace {

// Bregman cost between target atoms and the unmerged latent images.
Matrix theta_cost(const ConvexGenerator& gen, const DiscreteDistribution& p_r,
                  const PointMatrix& y) {
  if (y.cols() != p_r.dim()) fail(ErrorCode::kInvalidArgument, "family output dimension mismatch");
  p_r.require_in_domain(gen);
  for (Eigen::Index k = 0; k < y.rows(); ++k) gen.require_in_domain(y.row(k).transpose());
  Matrix c(p_r.size(), y.rows());
  for (Eigen::Index i = 0; i < p_r.size(); ++i) {
    const Vector x = p_r.point(i);
    for (Eigen::Index k = 0; k < y.rows(); ++k)
      c(i, k) = bregman_divergence(gen, x, y.row(k).transpose());
  }
  return c;
}

}  // namespace

double rw_of_theta(const ConvexGenerator& gen, const DiscreteDistribution& p_r,
                   const ThetaFamily& fam, const Vector& theta) {
  const PointMatrix y = fam.images(theta);
  return solve_transport(theta_cost(gen, p_r, y), p_r.weights(), fam.latent().weights()).objective;
}

Vector perturb_theta(const Vector& theta, std::uint64_t seed, double scale) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector out = theta;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += u(rng);
  return out;
}

Vector grad_theta_fd(const ConvexGenerator& gen, const DiscreteDistribution& p_r,
                     const ThetaFamily& fam, const Vector& theta, double h) {
  Vector g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Vector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    g[i] = (rw_of_theta(gen, p_r, fam, tp) - rw_of_theta(gen, p_r, fam, tm)) / (2.0 * h);
  }
  return g;
}

Vector grad_theta_formula(const ConvexGenerator& gen, const DiscreteDistribution& p_r,
                          const ThetaFamily& fam, const Vector& theta) {
  constexpr double kTie = 1e-9;
  const DiscreteDistribution& latent = fam.latent();
  const PointMatrix y = fam.images(theta);
  theta_cost(gen, p_r, y);  // domain checks
  PointMatrix z(y.rows(), y.cols());
  for (Eigen::Index k = 0; k < y.rows(); ++k) z.row(k) = gen.grad(y.row(k).transpose()).transpose();

  const TransportSolution sol =
      solve_transport(half_squared_cost(p_r.points(), z), p_r.weights(), latent.weights());
  Vector f(p_r.size());
  for (Eigen::Index i = 0; i < p_r.size(); ++i)
    f[i] = 0.5 * p_r.points().row(i).squaredNorm() - sol.dual.u[i];

  Vector grad = Vector::Zero(fam.parameter_count());
  for (Eigen::Index k = 0; k < y.rows(); ++k) {
    const Vector zk = z.row(k).transpose();
    Vector score(p_r.size());
    for (Eigen::Index i = 0; i < p_r.size(); ++i) score[i] = p_r.points().row(i).dot(zk) - f[i];
    Eigen::Index best = 0;
    const double top = score.maxCoeff(&best);
    const auto tied = (score.array() >= top - kTie).count();
    if (tied > 1) {
      Eigen::Index carrier = 0;
      const double mass = sol.plan.mass.col(k).maxCoeff(&carrier);
      if (mass < latent.weight(k) * (1.0 - 1e-9) || score[carrier] < top - kTie)
        fail(ErrorCode::kTieDetected, "conjugate argmax is not unique; perturb theta");
      best = carrier;
    }
    const Vector yk = y.row(k).transpose();
    const Vector dir = gen.hessian_apply(yk, yk - p_r.point(best));
    grad += latent.weight(k) * fam.jacobian(theta, latent.point(k)).transpose() * dir;
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Sampling experiments

DiscreteDistribution empirical_sample(const DiscreteDistribution& dist, int n, Rng& rng) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "sample size must be positive");
  std::discrete_distribution<Eigen::Index> pick(dist.weights().data(),
                                                dist.weights().data() + dist.size());
  std::vector<int> counts(static_cast<size_t>(dist.size()), 0);
  for (int s = 0; s < n; ++s) ++counts[static_cast<size_t>(pick(rng))];
  const auto support = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
  PointMatrix pts(support, dist.dim());
  Vector w(support);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    if (counts[i] == 0) continue;
    pts.row(r) = dist.points().row(i);
    w[r++] = static_cast<double>(counts[i]) / n;
  }
  return DiscreteDistribution(pts, w);
}

namespace {

DiscreteDistribution cube_sample(const ConvexGenerator& gen, int dim, int n, Rng& rng) {
  const double lo = gen.epsilon();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointMatrix pts(n, dim);
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < dim; ++k) pts(s, k) = lo + (1.0 - lo) * u(rng);
  return DiscreteDistribution::uniform(pts);
}

double one_trial(const ConvexGenerator& gen, const RateTarget& target, int n, Rng& rng) {
  if (const auto* dist = std::get_if<DiscreteDistribution>(&target))
    return rw_divergence(gen, empirical_sample(*dist, n, rng), *dist);
  const int dim = std::get<UniformCube>(target).dim;
  const DiscreteDistribution a = cube_sample(gen, dim, n, rng);
  const DiscreteDistribution b = cube_sample(gen, dim, n, rng);
  return rw_divergence(gen, a, b);
}

double lp_cells(const RateTarget& target, int n) {
  if (const auto* dist = std::get_if<DiscreteDistribution>(&target))
    return static_cast<double>(n) * static_cast<double>(dist->size());
  return static_cast<double>(n) * n;
}

std::vector<double> run_trials(const ConvexGenerator& gen, const RateTarget& target, int n,
                               int trials, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> out(static_cast<size_t>(trials));
  parallel_for(trials, [&](int t) {
    Rng rng = make_rng(seed, stream, static_cast<std::uint64_t>(t));
    out[static_cast<size_t>(t)] = one_trial(gen, target, n, rng);
  });
  return out;
}

}  // namespace

double fit_loglog_slope(const std::vector<int>& n, const std::vector<double>& mean) {
  if (n.size() != mean.size() || n.size() < 2)
    fail(ErrorCode::kInvalidArgument, "slope fit needs at least two points");
  const size_t first = n.size() >= 3 ? 1 : 0;
  const size_t count = n.size() - first;
  double sx = 0.0, sy = 0.0;
  for (size_t i = first; i < n.size(); ++i) {
    sx += std::log(static_cast<double>(n[i]));
    sy += std::log(mean[i]);
  }
  const double mx = sx / count, my = sy / count;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = first; i < n.size(); ++i) {
    const double dx = std::log(static_cast<double>(n[i])) - mx;
    sxy += dx * (std::log(mean[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RateReport empirical_rate(const ConvexGenerator& gen, const RateTarget& target,
                          const RateOptions& options) {
  if (options.trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be positive");
  if (options.n_grid.empty()) fail(ErrorCode::kInvalidArgument, "empty sample-size grid");
  double cells = 0.0;
  for (size_t i = 0; i < options.n_grid.size(); ++i) {
    if (options.n_grid[i] < 1 || (i > 0 && options.n_grid[i] <= options.n_grid[i - 1]))
      fail(ErrorCode::kInvalidArgument, "sample sizes must be positive and ascending");
    cells += lp_cells(target, options.n_grid[i]) * options.trials;
  }
  if (cells > options.max_lp_cells)
    fail(ErrorCode::kBudgetExceeded, "rate experiment exceeds the LP size budget");

  RateReport r;
  r.n_grid = options.n_grid;
  r.trials = options.trials;
  r.seed = options.seed;
  for (size_t i = 0; i < options.n_grid.size(); ++i) {
    const std::vector<double> w =
        run_trials(gen, target, options.n_grid[i], options.trials, options.seed, i);
    double sum = 0.0;
    for (double x : w) sum += x;
    const double mean = sum / options.trials;
    double ss = 0.0;
    for (double x : w) ss += (x - mean) * (x - mean);
    const double sd = options.trials > 1 ? std::sqrt(ss / (options.trials - 1)) : 0.0;
    r.mean_divergence.push_back(mean);
    r.stderr_divergence.push_back(sd / std::sqrt(static_cast<double>(options.trials)));
  }
  r.fitted_slope = r.n_grid.size() >= 2 ? fit_loglog_slope(r.n_grid, r.mean_divergence) : 0.0;
  return r;
}

TailCurve empirical_concentration(const ConvexGenerator& gen, const RateTarget& target, int n,
                                  const std::vector<double>& eps_grid, int trials,
                                  std::uint64_t seed) {
  if (trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be positive");
  TailCurve curve;
  curve.n = n;
  curve.trials = trials;
  curve.eps = eps_grid;
  const std::vector<double> w =
      run_trials(gen, target, n, trials, seed, static_cast<std::uint64_t>(n));
  for (double e : eps_grid) {
    const auto hits = std::count_if(w.begin(), w.end(), [e](double x) { return x >= e; });
    curve.prob.push_back(static_cast<double>(hits) / trials);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Random instances and the verification suite

namespace {

Vector random_weights(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = u(rng);
  return w / w.sum();
}

Matrix random_spd(Rng& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = u(rng);
  Matrix a = b * b.transpose() + 0.1 * Matrix::Identity(d, d);
  return 0.5 * (a + a.transpose());
}

ConvexGenerator generator_for(int which, Rng& rng, int d) {
  switch (which) {
    case 0:
      return ConvexGenerator::squared_l2();
    case 1:
      return ConvexGenerator::neg_entropy(0.05, 3.0);
    case 2:
      return ConvexGenerator::itakura_saito(0.05, 3.0);
    default:
      return ConvexGenerator::mahalanobis(random_spd(rng, d));
  }
}

PointMatrix random_points(Rng& rng, const ConvexGenerator& gen, Eigen::Index n, int d) {
  const bool positive = gen.epsilon() > 0.0;
  std::uniform_real_distribution<double> u(positive ? gen.lo() : -2.0, positive ? gen.hi() : 2.0);
  PointMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) x(i, k) = u(rng);
  return x;
}

}  // namespace

DiscreteDistribution five_atom_reference() {
  PointMatrix x(5, 1);
  x << 0.1, 0.4, 0.5, 0.8, 1.0;
  Vector w(5);
  w << 0.1, 0.3, 0.2, 0.25, 0.15;
  return DiscreteDistribution(x, w);
}

RandomTriple random_triple(Rng& rng, int max_atoms) {
  std::uniform_int_distribution<int> kind(0, 3), dim(1, 3), atoms(1, max_atoms), coin(0, 1);
  const int which = kind(rng);
  const int d = dim(rng);
  ConvexGenerator gen = generator_for(which, rng, d);
  const int n = atoms(rng);
  const PointMatrix xp = random_points(rng, gen, n, d);
  DiscreteDistribution p(xp, random_weights(rng, n));
  if (coin(rng) == 1) {
    DiscreteDistribution q(p.points(), random_weights(rng, p.size()));
    return {gen, p, q};
  }
  const int m = atoms(rng);
  DiscreteDistribution q(random_points(rng, gen, m, d), random_weights(rng, m));
  return {gen, p, q};
}

AffineInstance random_affine_instance(Rng& rng, int index) {
  constexpr int d = 2;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ConvexGenerator gen = ConvexGenerator::squared_l2();
  switch (index % 4) {
    case 1:
      gen = ConvexGenerator::neg_entropy(0.01, 5.0);
      break;
    case 2:
      gen = ConvexGenerator::itakura_saito(0.01, 5.0);
      break;
    case 3: {
      Matrix a(d, d);
      a << 1.5 + u(rng), 0.3 * (u(rng) - 0.5), 0.0, 1.0 + u(rng);
      a(1, 0) = a(0, 1);
      gen = ConvexGenerator::mahalanobis(a);
      break;
    }
    default:
      break;
  }
  PointMatrix z(8, d);
  for (int k = 0; k < 8; ++k)
    for (int c = 0; c < d; ++c) z(k, c) = 0.2 + 0.6 * u(rng);
  PointMatrix x(6, d);
  for (int i = 0; i < 6; ++i)
    for (int c = 0; c < d; ++c) x(i, c) = 0.1 + 1.9 * u(rng);
  std::vector<double> counts = {2, 2, 1, 1, 1, 1};
  std::shuffle(counts.begin(), counts.end(), rng);
  Vector w(6);
  for (int i = 0; i < 6; ++i) w[i] = counts[static_cast<size_t>(i)] / 8.0;

  // A within 0.3 of the identity, b in [0.3, 0.5]: images stay above 0.2 - 0.24 + 0.3.
  Vector theta(d * d + d);
  Eigen::Map<Matrix> a(theta.data(), d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = (r == c ? 1.0 : 0.0) + 0.3 * (2.0 * u(rng) - 1.0);
  for (int r = 0; r < d; ++r) theta[d * d + r] = 0.3 + 0.2 * u(rng);
  return {gen, DiscreteDistribution(x, w), ThetaFamily::affine(DiscreteDistribution::uniform(z), d),
          theta};
}

int VerifyReport::passed() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.pass; }));
}

int VerifyReport::failed() const { return static_cast<int>(rows.size()) - passed(); }

namespace {

constexpr int kMaxAtoms = 64;

enum Stream : std::uint64_t {
  kDecompositionStream = 1,
  kDominationStream,
  kDualityStream,
  kGradientStream,
  kPerturbStream,
};

VerifyRow identity_row(const char* name, int id, const IdentityCheck& c, double tol) {
  return {name, id, c.lhs, c.rhs, c.residual, c.residual <= tol * 1e-8 * (1.0 + std::abs(c.lhs))};
}

VerifyRow gradient_row(const char* name, int id, const Vector& formula, const Vector& fd,
                       double tol) {
  const double diff = (formula - fd).norm();
  const double scale = std::max(formula.norm(), fd.norm());
  return {name, id, formula.norm(), fd.norm(), diff, diff <= tol * (1e-4 * scale + 1e-10)};
}

template <typename Fn>
std::vector<VerifyRow> per_instance(int trials, Fn fn) {
  std::vector<std::vector<VerifyRow>> slots(static_cast<size_t>(trials));
  parallel_for(trials, [&](int t) { slots[static_cast<size_t>(t)] = fn(t); });
  std::vector<VerifyRow> rows;
  for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
  return rows;
}

std::vector<VerifyRow> closed_form_gradients(double tol) {
  std::vector<VerifyRow> rows;
  PointMatrix origin1 = PointMatrix::Zero(1, 1);
  const ThetaFamily constant1 = ThetaFamily::location(DiscreteDistribution::uniform(origin1));
  const DiscreteDistribution one = DiscreteDistribution::dirac(Vector::Ones(1));
  const Vector half = Vector::Constant(1, 0.5);
  const ConvexGenerator gens[] = {ConvexGenerator::squared_l2(), ConvexGenerator::neg_entropy(),
                                  ConvexGenerator::itakura_saito()};
  // d/dtheta D(1, theta) at theta = 1/2: -2(1 - theta), (theta - 1)/theta, (theta - 1)/theta^2.
  const double exact[] = {-1.0, -1.0, -2.0};
  int id = 0;
  for (int g = 0; g < 3; ++g) {
    const Vector formula = grad_theta_formula(gens[g], one, constant1, half);
    rows.push_back(gradient_row("gradient_closed_form", id++, formula, Vector::Constant(1, exact[g]), tol));
    rows.push_back(gradient_row("gradient_closed_form_fd", id++, formula,
                                grad_theta_fd(gens[g], one, constant1, half), tol));
  }
  Matrix a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  const ConvexGenerator mh = ConvexGenerator::mahalanobis(a);
  const ThetaFamily constant2 =
      ThetaFamily::location(DiscreteDistribution::uniform(PointMatrix::Zero(1, 2)));
  Vector target(2), theta(2);
  target << 1.0, -0.5;
  theta << 0.25, 0.75;
  const Vector formula =
      grad_theta_formula(mh, DiscreteDistribution::dirac(target), constant2, theta);
  rows.push_back(gradient_row("gradient_closed_form", id++, formula, 2.0 * a * (theta - target), tol));
  const Vector at_optimum =
      grad_theta_formula(mh, DiscreteDistribution::dirac(target), constant2, target);
  rows.push_back({"gradient_at_optimum", id++, at_optimum.norm(), 0.0, at_optimum.norm(),
                  at_optimum.norm() <= tol * 1e-6});
  return rows;
}

std::vector<VerifyRow> affine_gradient(int t, std::uint64_t seed, double tol) {
  Rng rng = make_rng(seed, kGradientStream, static_cast<std::uint64_t>(t));
  const AffineInstance inst = random_affine_instance(rng, t);
  for (std::uint64_t attempt = 0;; ++attempt) {
    const Vector theta =
        perturb_theta(inst.theta, derive_seed(seed, kPerturbStream, t * 16 + attempt));
    try {
      const Vector formula = grad_theta_formula(inst.gen, inst.p_r, inst.family, theta);
      const Vector fd = grad_theta_fd(inst.gen, inst.p_r, inst.family, theta);
      return {gradient_row("gradient_affine", t, formula, fd, tol)};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTieDetected || attempt >= 8) throw;
    }
  }
}

}  // namespace

VerifyReport run_verify_suite(const std::string& suite, int trials, std::uint64_t seed,
                              double tolerance_scale) {
  const bool all = suite == "all";
  if (!all && suite != "decomposition" && suite != "domination" && suite != "duality" &&
      suite != "gradient")
    fail(ErrorCode::kInvalidArgument, "unknown verification suite '" + suite + "'");
  if (trials < 0) fail(ErrorCode::kInvalidArgument, "trials must be nonnegative");
  if (!(tolerance_scale >= 0.0) || !std::isfinite(tolerance_scale))
    fail(ErrorCode::kInvalidArgument, "tolerance scale must be finite and nonnegative");
  const double tol = tolerance_scale;
  VerifyReport report;
  auto append = [&](std::vector<VerifyRow> rows) {
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  };
  if (all || suite == "decomposition") {
    append(per_instance(trials, [&](int t) {
      Rng rng = make_rng(seed, kDecompositionStream, static_cast<std::uint64_t>(t));
      const RandomTriple tr = random_triple(rng, kMaxAtoms);
      return std::vector<VerifyRow>{
          identity_row("decomposition", t, verify_decomposition(tr.gen, tr.p, tr.q), tol)};
    }));
  }
  if (all || suite == "domination") {
    append(per_instance(trials, [&](int t) {
      Rng rng = make_rng(seed, kDominationStream, static_cast<std::uint64_t>(t));
      const RandomTriple tr = random_triple(rng, kMaxAtoms);
      const DominationCheck d = verify_domination(tr.gen, tr.p, tr.q);
      return std::vector<VerifyRow>{
          {"domination_tv", t, d.w, d.tv_bound, d.w - d.tv_bound,
           d.w - d.tv_bound <= tol * 1e-9},
          {"domination_w2", t, d.w, d.w2_bound, d.w - d.w2_bound,
           d.w - d.w2_bound <= tol * 1e-9}};
    }));
  }
  if (all || suite == "duality") {
    append(per_instance(trials, [&](int t) {
      Rng rng = make_rng(seed, kDualityStream, static_cast<std::uint64_t>(t));
      const RandomTriple tr = random_triple(rng, kMaxAtoms);
      return std::vector<VerifyRow>{identity_row("duality", t, verify_duality(tr.gen, tr.p, tr.q), tol)};
    }));
  }
  if (all || suite == "gradient") {
    append(closed_form_gradients(tol));
    append(per_instance(trials, [&](int t) { return affine_gradient(t, seed, tol); }));
  }
  return report;
}

}  // namespace rwot
