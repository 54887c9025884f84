#include <bit>
#include <limits>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rwot/transport.hpp"

using namespace rwot;

namespace {

DiscreteDistribution dist1d(std::initializer_list<double> xs, std::initializer_list<double> ws) {
  PointMatrix p(static_cast<Eigen::Index>(xs.size()), 1);
  Vector w(static_cast<Eigen::Index>(ws.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  i = 0;
  for (double x : ws) w[i++] = x;
  return DiscreteDistribution(p, w);
}

Vector random_simplex(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = u(rng);
  return w / w.sum();
}

void check_solution(const Matrix& c, const Vector& a, const Vector& b, const TransportSolution& s) {
  CHECK((s.plan.mass.array() >= 0.0).all());
  CHECK((s.plan.mass.rowwise().sum() - a).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((s.plan.mass.colwise().sum().transpose() - b).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(s.plan.support_size() <= a.size() + b.size() - 1);
  const auto check = check_certificate(c, a, b, s);
  CHECK(check.max_violation <= 1e-9);
  CHECK(check.gap <= 1e-9 * (1.0 + std::abs(s.objective)));
}

}  // namespace

TEST_CASE("cost_matrix examples") {
  const auto l2 = ConvexGenerator::squared_l2();
  Matrix c = cost_matrix(l2, dist1d({0}, {1}), dist1d({1}, {1}));
  CHECK(c.rows() == 1);
  CHECK(c(0, 0) == 1.0);

  c = cost_matrix(ConvexGenerator::neg_entropy(), dist1d({2}, {1}), dist1d({1}, {1}));
  CHECK(c(0, 0) == doctest::Approx(2.0 * std::log(2.0) - 1.0));

  c = cost_matrix(LqCost{1.0, 2.0}, dist1d({0, 1}, {0.5, 0.5}), dist1d({0}, {1}));
  CHECK(c.rows() == 2);
  CHECK(c(0, 0) == 0.0);
  CHECK(c(1, 0) == 1.0);

  CHECK_THROWS_AS(cost_matrix(ConvexGenerator::neg_entropy(), dist1d({-1}, {1}), dist1d({1}, {1})),
                  Error);
}

TEST_CASE("solve_transport small examples") {
  Matrix c(1, 1);
  c << 0.0;
  auto s = solve_transport(c, Vector::Ones(1), Vector::Ones(1));
  CHECK(s.plan.mass(0, 0) == 1.0);
  CHECK(s.objective == 0.0);

  Matrix c2(2, 1);
  c2 << 0.0, 1.0;
  Vector a(2);
  a << 0.5, 0.5;
  s = solve_transport(c2, a, Vector::Ones(1));
  CHECK(s.objective == doctest::Approx(0.5));
  CHECK(s.plan.mass(0, 0) == doctest::Approx(0.5));
  CHECK(s.plan.mass(1, 0) == doctest::Approx(0.5));
  CHECK(brute_force_transport(c2, a, Vector::Ones(1)) == doctest::Approx(0.5));
  check_solution(c2, a, Vector::Ones(1), s);

  Matrix c3(2, 2);
  c3 << 0.0, 1.0, 1.0, 0.0;
  s = solve_transport(c3, a, a);
  CHECK(s.objective == 0.0);
  CHECK(brute_force_transport(c3, a, a) == 0.0);
}

TEST_CASE("solve_transport errors") {
  Matrix c = Matrix::Zero(2, 2);
  Vector a(2), b(2);
  a << 0.5, 0.5;
  b << 0.5, 0.6;
  try {
    solve_transport(c, a, b);
    FAIL("expected Unbalanced");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnbalanced);
  }
  try {
    brute_force_transport(Matrix::Zero(7, 2), Vector::Constant(7, 1.0 / 7), a);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooLarge);
  }
}

TEST_CASE("4x4 uniform instance matches the best of the 24 permutations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    Matrix c(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) c(i, j) = u(rng);
    const Vector w = Vector::Constant(4, 0.25);
    const auto s = solve_transport(c, w, w);
    std::vector<int> perm = {0, 1, 2, 3};
    double best = 1e300;
    do {
      double v = 0.0;
      for (int i = 0; i < 4; ++i) v += c(i, perm[i]) / 4.0;
      best = std::min(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(s.objective == doctest::Approx(best).epsilon(1e-12));
    check_solution(c, w, w, s);
  }
}

TEST_CASE("degenerate instances with zero and tied weights") {
  Matrix c(3, 3);
  c << 1, 2, 3, 2, 4, 6, 3, 6, 9;
  Vector a(3), b(3);
  a << 0.5, 0.0, 0.5;
  b << 0.25, 0.25, 0.5;
  const auto s = solve_transport(c, a, b);
  check_solution(c, a, b, s);
  CHECK(s.objective == doctest::Approx(brute_force_transport(c, a, b)).epsilon(1e-12));
}

TEST_CASE("property: network simplex agrees with enumeration on random instances") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 120; ++t) {
    const int n = size(rng), m = size(rng);
    Matrix c(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = u(rng);
    const Vector a = random_simplex(rng, n);
    Vector b = random_simplex(rng, m);
    b *= a.sum() / b.sum();
    const auto s = solve_transport(c, a, b);
    CHECK(s.objective == doctest::Approx(brute_force_transport(c, a, b)).epsilon(1e-9));
    check_solution(c, a, b, s);
  }
}

namespace {

// Vertex enumeration by subsets: every (n+m-1)-subset of cells is tried as a
// basis, its flows solved by least squares and kept if exact and nonnegative.
double best_vertex_by_subsets(const Matrix& c, const Vector& a, const Vector& b) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  const int cells = n * m, k = n + m - 1;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1U << cells); ++mask) {
    if (std::popcount(mask) != k) continue;
    Matrix sys = Matrix::Zero(n + m, k);
    Vector rhs(n + m);
    rhs << a, b;
    std::vector<int> idx;
    for (int e = 0; e < cells; ++e)
      if (mask >> e & 1U) {
        const int col = static_cast<int>(idx.size());
        sys(e / m, col) = 1.0;
        sys(n + e % m, col) = 1.0;
        idx.push_back(e);
      }
    Eigen::ColPivHouseholderQR<Matrix> qr(sys);
    if (qr.rank() < k) continue;
    const Vector x = qr.solve(rhs);
    if ((sys * x - rhs).norm() > 1e-10 || x.minCoeff() < -1e-12) continue;
    double value = 0.0;
    for (int t = 0; t < k; ++t) value += c(idx[t] / m, idx[t] % m) * x[t];
    best = std::min(best, value);
  }
  return best;
}

}  // namespace

TEST_CASE("basis traversal agrees with subset enumeration on small instances") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    const int n = size(rng), m = size(rng);
    Matrix c(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = u(rng);
    Vector a = random_simplex(rng, n);
    Vector b = random_simplex(rng, m);
    // Every fourth instance has tied marginals and degenerate vertices.
    if (t % 4 == 0) {
      a = Vector::Constant(n, 1.0 / n);
      b = Vector::Constant(m, 1.0 / m);
    }
    b *= a.sum() / b.sum();
    CHECK(brute_force_transport(c, a, b) ==
          doctest::Approx(best_vertex_by_subsets(c, a, b)).epsilon(1e-12));
  }
}

TEST_CASE("larger instances certify and stay basic") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int n : {50, 200}) {
    PointMatrix px(n, 3), py(n + 7, 3);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k) px(i, k) = g(rng);
    for (int i = 0; i < n + 7; ++i)
      for (int k = 0; k < 3; ++k) py(i, k) = g(rng);
    const auto p = DiscreteDistribution::uniform(px);
    const auto q = DiscreteDistribution::uniform(py);
    const Matrix c = cost_matrix(LqCost{2.0, 2.0}, p, q);
    const auto s = solve_transport(c, p.weights(), q.weights());
    check_solution(c, p.weights(), q.weights(), s);
  }
}

TEST_CASE("rw, Wasserstein and TV examples") {
  const auto ne = ConvexGenerator::neg_entropy();
  const auto d2 = dist1d({2}, {1}), d1 = dist1d({1}, {1});
  CHECK(rw_divergence(ne, d2, d1) == doctest::Approx(2.0 * std::log(2.0) - 1.0));
  CHECK(rw_divergence(ne, d1, d2) == doctest::Approx(1.0 - std::log(2.0)));
  CHECK(rw_divergence(ne, d2, d2) == 0.0);

  const auto l2 = ConvexGenerator::squared_l2();
  const auto half = dist1d({0, 1}, {0.5, 0.5}), zero = dist1d({0}, {1}), one = dist1d({1}, {1});
  CHECK(rw_divergence(l2, half, zero) == doctest::Approx(0.5));
  CHECK(wasserstein_p_lq(zero, one, 2, 2) == doctest::Approx(1.0));
  CHECK(wasserstein_p_lq(half, zero, 2, 2) == doctest::Approx(std::sqrt(0.5)));

  CHECK(tv_distance(zero, one) == 1.0);
  CHECK(tv_distance(half, half) == 0.0);
  CHECK(tv_distance(half, zero) == doctest::Approx(0.5));
}

TEST_CASE("pushforward_grad examples") {
  const auto l2 = ConvexGenerator::squared_l2();
  const auto q = dist1d({0.5, -1.0}, {0.25, 0.75});
  const auto pq = pushforward_grad(l2, q);
  CHECK(pq.point(0)[0] == 1.0);
  CHECK(pq.point(1)[0] == -2.0);
  CHECK(pq.weights().isApprox(q.weights()));
  CHECK(pushforward_grad(ConvexGenerator::neg_entropy(), dist1d({1}, {1})).point(0)[0] ==
        doctest::Approx(1.0));
  CHECK(pushforward_grad(ConvexGenerator::itakura_saito(), dist1d({2}, {1})).point(0)[0] ==
        doctest::Approx(-0.5));
}

TEST_CASE("distribution construction normalizes and merges") {
  PointMatrix p(3, 1);
  p << 0.0, 1.0, 0.0;
  Vector w(3);
  w << 0.25, 0.5, 0.25;
  DiscreteDistribution d(p, w);
  CHECK(d.size() == 2);
  CHECK(d.weight(0) == doctest::Approx(0.5));
  CHECK(d.point(0)[0] == 0.0);

  Vector w2(3);
  w2 << 0.25, 0.5, 0.25 + 5e-9;
  CHECK(DiscreteDistribution(p, w2).weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
  Vector w3(3);
  w3 << 0.25, 0.5, 0.3;
  CHECK_THROWS_AS(DiscreteDistribution(p, w3), Error);
  Vector w4(3);
  w4 << -0.25, 1.0, 0.25;
  CHECK_THROWS_AS(DiscreteDistribution(p, w4), Error);
}

TEST_CASE("property: permutation invariance and metric axioms") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  auto random_dist = [&](int n, int d) {
    PointMatrix pts(n, d);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) pts(i, k) = g(rng);
    return DiscreteDistribution(pts, random_simplex(rng, n));
  };
  const auto l2 = ConvexGenerator::squared_l2();
  for (int t = 0; t < 200; ++t) {
    const auto p = random_dist(5, 2), q = random_dist(6, 2), r = random_dist(4, 2);
    const double pq = wasserstein_p_lq(p, q, 2, 2), qp = wasserstein_p_lq(q, p, 2, 2);
    CHECK(std::abs(pq - qp) <= 1e-10);
    CHECK(pq <= wasserstein_p_lq(p, r, 2, 2) + wasserstein_p_lq(r, q, 2, 2) + 1e-9);
    CHECK(rw_divergence(l2, p, q) == doctest::Approx(pq * pq).epsilon(1e-10));
    CHECK(rw_divergence(l2, p, p) <= 1e-10);
    CHECK(rw_divergence(l2, p, q) > 0.0);

    PointMatrix perm_pts(p.size(), p.dim());
    Vector perm_w(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      perm_pts.row(i) = p.points().row(p.size() - 1 - i);
      perm_w[i] = p.weight(p.size() - 1 - i);
    }
    const DiscreteDistribution pp(perm_pts, perm_w);
    CHECK(std::abs(rw_divergence(l2, pp, q) - rw_divergence(l2, p, q)) <= 1e-12);
  }
}
