#include <cmath>
#include <vector>

#include "doctest.h"
#include "rwot/theory.hpp"

using namespace rwot;

namespace {

DiscreteDistribution dirac1(double x) { return DiscreteDistribution::dirac(Vector::Constant(1, x)); }

ThetaFamily constant_family() {
  return ThetaFamily::location(DiscreteDistribution::uniform(PointMatrix::Zero(1, 1)));
}

DiscreteDistribution five_atoms() { return five_atom_reference(); }

}  // namespace

TEST_CASE("moment statistics") {
  PointMatrix x(2, 2);
  x << 3.0, 4.0, 0.0, 0.0;
  const DiscreteDistribution p(x, Vector::Constant(2, 0.5));
  const MomentStats s = moment_stats(p, 2.0, 1.0, 0.1);
  CHECK(s.m_q == doctest::Approx(12.5));
  CHECK(s.e_ag == doctest::Approx(0.5 * std::exp(0.5) + 0.5));
  CHECK(s.e_ag >= 1.0);
}

TEST_CASE("decomposition examples") {
  const auto ne = ConvexGenerator::neg_entropy();
  const IdentityCheck c = verify_decomposition(ne, dirac1(2.0), dirac1(1.0));
  CHECK(c.lhs == doctest::Approx(2.0 * std::log(2.0) - 1.0));
  CHECK(c.residual <= 1e-10);

  const DiscreteDistribution p = five_atoms();
  for (const auto& g : {ConvexGenerator::squared_l2(), ne, ConvexGenerator::itakura_saito()}) {
    const IdentityCheck self = verify_decomposition(g, p, p);
    CHECK(self.lhs == doctest::Approx(0.0).scale(1.0));
    CHECK(self.residual <= 1e-10);
  }
}

TEST_CASE("domination examples") {
  const auto l2 = ConvexGenerator::squared_l2();
  const DominationCheck d = verify_domination(l2, dirac1(0.0), dirac1(1.0));
  CHECK(d.w == doctest::Approx(1.0));
  CHECK(d.w2_squared == doctest::Approx(1.0));
  CHECK(d.lipschitz == 2.0);
  CHECK(d.w2_bound == doctest::Approx(1.0));
  CHECK(d.bound_w2_ok);
  CHECK(d.bound_tv_ok);

  const DiscreteDistribution p = five_atoms();
  const DominationCheck self = verify_domination(ConvexGenerator::neg_entropy(), p, p);
  CHECK(self.w == 0.0);
  CHECK(self.tv == 0.0);
  CHECK(self.bound_tv_ok);
  CHECK(self.bound_w2_ok);
}

TEST_CASE("duality examples") {
  const IdentityCheck c = verify_duality(ConvexGenerator::squared_l2(), dirac1(0.0), dirac1(1.0));
  CHECK(c.lhs == doctest::Approx(1.0));
  CHECK(c.residual <= 1e-10);
  const DiscreteDistribution p = five_atoms();
  CHECK(verify_duality(ConvexGenerator::itakura_saito(), p, p).residual <= 1e-10);
}

TEST_CASE("property: random triples satisfy the identities and bounds") {
  Rng rng(5);
  for (int t = 0; t < 60; ++t) {
    const RandomTriple tr = random_triple(rng, 24);
    CAPTURE(t);
    const IdentityCheck dec = verify_decomposition(tr.gen, tr.p, tr.q);
    CHECK(dec.residual <= 1e-8 * (1.0 + dec.lhs));
    const IdentityCheck dual = verify_duality(tr.gen, tr.p, tr.q);
    CHECK(dual.residual <= 1e-8 * (1.0 + dual.lhs));
    CHECK(dual.lhs == doctest::Approx(dec.lhs).epsilon(1e-12));
    const DominationCheck dom = verify_domination(tr.gen, tr.p, tr.q);
    CHECK(dom.bound_tv_ok);
    CHECK(dom.bound_w2_ok);
  }
}

TEST_CASE("families and rw_of_theta") {
  const ThetaFamily fam = constant_family();
  const auto l2 = ConvexGenerator::squared_l2();
  CHECK(rw_of_theta(l2, dirac1(1.0), fam, Vector::Constant(1, 1.0)) == 0.0);
  CHECK(rw_of_theta(l2, dirac1(1.0), fam, Vector::Constant(1, 0.5)) == doctest::Approx(0.25));
  CHECK_THROWS_AS(rw_of_theta(ConvexGenerator::neg_entropy(), dirac1(1.0), fam,
                              Vector::Constant(1, -0.5)),
                  Error);

  PointMatrix z(3, 2);
  z << 0.0, 1.0, 2.0, -1.0, 0.5, 0.5;
  const ThetaFamily aff = ThetaFamily::affine(DiscreteDistribution::uniform(z), 2);
  CHECK(aff.parameter_count() == 6);
  Vector theta(6);
  theta << 1.0, 2.0, 3.0, 4.0, 0.5, -0.5;  // A = [1 3; 2 4]
  const Vector g = aff.apply(theta, z.row(0).transpose());
  CHECK(g[0] == doctest::Approx(3.5));
  CHECK(g[1] == doctest::Approx(3.5));
  CHECK(aff.lipschitz_in_theta(z.row(1).transpose()) == doctest::Approx(std::sqrt(5.0) + 1.0));
  // Jacobian against finite differences of apply.
  const Matrix j = aff.jacobian(theta, z.row(1).transpose());
  for (int p = 0; p < 6; ++p) {
    Vector tp = theta;
    tp[p] += 1.0;
    const Vector diff = aff.apply(tp, z.row(1).transpose()) - aff.apply(theta, z.row(1).transpose());
    CHECK((diff - j.col(p)).norm() <= 1e-12);
  }
}

TEST_CASE("rw_of_theta is locally Lipschitz along random directions") {
  Rng rng(9);
  for (int t = 0; t < 8; ++t) {
    const AffineInstance inst = random_affine_instance(rng, t);
    Vector dir = Vector::Random(inst.theta.size()).normalized();
    const double base = rw_of_theta(inst.gen, inst.p_r, inst.family, inst.theta);
    double ratio = 0.0;
    for (double h : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const double moved = rw_of_theta(inst.gen, inst.p_r, inst.family, inst.theta + h * dir);
      ratio = std::max(ratio, std::abs(moved - base) / h);
    }
    CHECK(ratio < 100.0);
  }
}

TEST_CASE("gradient closed forms") {
  const ThetaFamily fam = constant_family();
  const Vector half = Vector::Constant(1, 0.5);
  const auto l2 = ConvexGenerator::squared_l2();
  CHECK(grad_theta_fd(l2, dirac1(1.0), fam, half)[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(grad_theta_formula(l2, dirac1(1.0), fam, half)[0] == doctest::Approx(-1.0).epsilon(1e-12));
  const auto ne = ConvexGenerator::neg_entropy();
  CHECK(grad_theta_fd(ne, dirac1(1.0), fam, half)[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(grad_theta_formula(ne, dirac1(1.0), fam, half)[0] == doctest::Approx(-1.0).epsilon(1e-12));
  // General a and theta: (theta - a) / theta.
  const Vector th = Vector::Constant(1, 1.7);
  CHECK(grad_theta_formula(ne, dirac1(0.6), fam, th)[0] ==
        doctest::Approx((1.7 - 0.6) / 1.7).epsilon(1e-12));
  CHECK(std::abs(grad_theta_fd(l2, dirac1(1.0), fam, Vector::Constant(1, 1.0))[0]) <= 1e-8);
  CHECK(std::abs(grad_theta_formula(ne, dirac1(1.0), fam, Vector::Constant(1, 1.0))[0]) <= 1e-12);
}

TEST_CASE("gradient formula matches finite differences on affine families") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const AffineInstance inst = random_affine_instance(rng, t);
    const Vector theta = perturb_theta(inst.theta, 1000 + t);
    const Vector formula = grad_theta_formula(inst.gen, inst.p_r, inst.family, theta);
    const Vector fd = grad_theta_fd(inst.gen, inst.p_r, inst.family, theta);
    CAPTURE(t);
    CHECK((formula - fd).norm() <= 1e-4 * fd.norm());
  }
}

TEST_CASE("tie detection when the plan splits a latent atom") {
  // Two equidistant targets and one latent atom: the plan splits the mass.
  PointMatrix x(2, 1);
  x << 0.0, 2.0;
  const DiscreteDistribution p_r = DiscreteDistribution::uniform(x);
  const ThetaFamily fam = constant_family();
  CHECK_THROWS_AS(
      grad_theta_formula(ConvexGenerator::squared_l2(), p_r, fam, Vector::Constant(1, 1.0)), Error);
  try {
    grad_theta_formula(ConvexGenerator::squared_l2(), p_r, fam, Vector::Constant(1, 1.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTieDetected);
  }
}

TEST_CASE("empirical rate is deterministic and validates input") {
  const auto l2 = ConvexGenerator::squared_l2();
  RateOptions opt;
  opt.n_grid = {16, 32};
  opt.trials = 1;
  opt.seed = 3;
  const RateReport a = empirical_rate(l2, five_atoms(), opt);
  const RateReport b = empirical_rate(l2, five_atoms(), opt);
  CHECK(a.mean_divergence == b.mean_divergence);
  CHECK(a.fitted_slope == b.fitted_slope);
  opt.trials = 5;
  const RateReport c = empirical_rate(l2, UniformCube{2}, opt);
  for (double m : c.mean_divergence) CHECK(m >= 0.0);
  CHECK(std::isfinite(c.fitted_slope));

  opt.max_lp_cells = 100;
  try {
    empirical_rate(l2, UniformCube{2}, opt);
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBudgetExceeded);
  }
  opt.max_lp_cells = 1e9;
  opt.n_grid = {32, 16};
  CHECK_THROWS_AS(empirical_rate(l2, five_atoms(), opt), Error);
}

TEST_CASE("log-log slope fit") {
  const std::vector<int> n = {10, 100, 1000, 10000};
  std::vector<double> m;
  for (int k : n) m.push_back(3.0 * std::pow(k, -0.5));
  m[0] = 100.0;  // the smallest n is ignored
  CHECK(fit_loglog_slope(n, m) == doctest::Approx(-0.5));
}

TEST_CASE("concentration tails") {
  const auto l2 = ConvexGenerator::squared_l2();
  const DiscreteDistribution p = five_atoms();
  const double diam = 0.9;
  const TailCurve c = empirical_concentration(l2, p, 64, {0.0, 1e-3, 1e-2, 2.0 * diam * diam + 1.0}, 50, 4);
  CHECK(c.prob.front() == 1.0);
  CHECK(c.prob.back() == 0.0);
  for (size_t i = 1; i < c.prob.size(); ++i) CHECK(c.prob[i] <= c.prob[i - 1]);
}

TEST_CASE("verify suite rows and unknown suite") {
  const VerifyReport r = run_verify_suite("gradient", 4, 42);
  CHECK(r.failed() == 0);
  CHECK(r.passed() == static_cast<int>(r.rows.size()));
  CHECK_THROWS_AS(run_verify_suite("nope", 1, 42), Error);
  const VerifyReport d1 = run_verify_suite("duality", 5, 42);
  const VerifyReport d2 = run_verify_suite("duality", 5, 42);
  REQUIRE(d1.rows.size() == 5);
  for (size_t i = 0; i < d1.rows.size(); ++i) CHECK(d1.rows[i].lhs == d2.rows[i].lhs);
}
