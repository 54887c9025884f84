#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rwot/random.hpp"
#include "rwot/transport.hpp"

namespace rwot {

struct MomentStats {
  double q = 2.0;
  double m_q = 0.0;  // sum_i w_i |x_i|^q
  double alpha = 1.0;
  double gamma = 0.0;
  double e_ag = 1.0;  // sum_i w_i exp(gamma |x_i|^alpha)
};

MomentStats moment_stats(const DiscreteDistribution& p, double q, double alpha, double gamma);

// Both sides of an identity and |lhs - rhs|.
struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

// lhs = W_D(P, Q);
// rhs = W2^2(P, grad phi # Q) / 2 + E_P[phi - |x|^2/2]
//       + E_Q[<grad phi(y), y> - phi(y) - |grad phi(y)|^2/2].
IdentityCheck verify_decomposition(const ConvexGenerator& gen, const DiscreteDistribution& p,
                                   const DiscreteDistribution& q);

struct DominationCheck {
  double w = 0.0;
  double lipschitz = 0.0;  // Hessian bound over the joint bounding box
  double diameter = 0.0;
  double tv = 0.0;
  double w2_squared = 0.0;
  double tv_bound = 0.0;  // L diam^2 TV
  double w2_bound = 0.0;  // (L/2) W2^2
  bool bound_tv_ok = false;
  bool bound_w2_ok = false;
};

DominationCheck verify_domination(const ConvexGenerator& gen, const DiscreteDistribution& p,
                                  const DiscreteDistribution& q);

// lhs = W_D(P, Q); rhs is the conjugate representation
//   E_P[phi] - E_Q[phi] + E_Q[<grad phi(y), y>] - E_P[f] - E_Q[f*(grad phi(y))]
// with f(x_i) = |x_i|^2/2 - u_i from the potentials of the quadratic problem
// between P and grad phi # Q, and f* maximized explicitly over supp P.
IdentityCheck verify_duality(const ConvexGenerator& gen, const DiscreteDistribution& p,
                             const DiscreteDistribution& q);

// g_theta(z) = z + theta (Location) or A z + b with theta = (vec A, b),
// A stored column-major and out_dim x latent dim (Affine).
class ThetaFamily {
 public:
  enum class Kind { kLocation, kAffine };

  static ThetaFamily location(DiscreteDistribution latent);
  static ThetaFamily affine(DiscreteDistribution latent, int out_dim);

  Kind kind() const { return kind_; }
  const DiscreteDistribution& latent() const { return latent_; }
  int out_dim() const { return out_dim_; }
  int parameter_count() const;

  Vector apply(const Vector& theta, const VectorRef& z) const;
  // d g_theta(z) / d theta, out_dim x parameter_count.
  Matrix jacobian(const Vector& theta, const VectorRef& z) const;
  // Local Lipschitz constant of theta -> g_theta(z).
  double lipschitz_in_theta(const VectorRef& z) const;
  // Images of the latent atoms, one row per atom, unmerged.
  PointMatrix images(const Vector& theta) const;

 private:
  ThetaFamily(Kind kind, DiscreteDistribution latent, int out_dim);

  Kind kind_;
  DiscreteDistribution latent_;
  int out_dim_;
};

// W_D(P_r, law of g_theta(Z)). Throws kDomainViolation if an image leaves
// the generator's domain.
double rw_of_theta(const ConvexGenerator& gen, const DiscreteDistribution& p_r,
                   const ThetaFamily& fam, const Vector& theta);

// theta plus independent uniform(+-scale) noise drawn from `seed`.
Vector perturb_theta(const Vector& theta, std::uint64_t seed, double scale = 1e-7);

// Central differences of rw_of_theta with step h.
Vector grad_theta_fd(const ConvexGenerator& gen, const DiscreteDistribution& p_r,
                     const ThetaFamily& fam, const Vector& theta, double h = 1e-5);

// E_Z[J^T H(g) (g - x_{i*})] where x_{i*} maximizes <x_i, grad phi(g)> - f(x_i)
// over supp P_r. Near-ties (1e-9) are settled by the optimal plan when it
// sends the whole latent atom to one of the tied points; otherwise throws
// kTieDetected.
Vector grad_theta_formula(const ConvexGenerator& gen, const DiscreteDistribution& p_r,
                          const ThetaFamily& fam, const Vector& theta);

// Cube [0,1]^d, mapped affinely onto [eps,1]^d for generators with a floor.
// The rate is measured between two independent samples.
struct UniformCube {
  int dim = 1;
};
using RateTarget = std::variant<DiscreteDistribution, UniformCube>;

struct RateOptions {
  std::vector<int> n_grid;
  int trials = 50;
  std::uint64_t seed = 42;
  // Upper bound on the summed cost-matrix sizes of all solves.
  double max_lp_cells = 2e9;
};

struct RateReport {
  std::vector<int> n_grid;
  std::vector<double> mean_divergence;
  std::vector<double> stderr_divergence;
  double fitted_slope = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

// Empirical W_D(P_n, P_r) (or W_D(P_n, P'_n) for a cube) averaged over trials.
// Throws kBudgetExceeded before solving if the LP budget would be exceeded.
RateReport empirical_rate(const ConvexGenerator& gen, const RateTarget& target,
                          const RateOptions& options);

// Least-squares slope of ln(mean) against ln(n), smallest n dropped when
// three or more points are available.
double fit_loglog_slope(const std::vector<int>& n, const std::vector<double>& mean);

struct TailCurve {
  int n = 0;
  int trials = 0;
  std::vector<double> eps;
  std::vector<double> prob;  // fraction of trials with W >= eps
};

TailCurve empirical_concentration(const ConvexGenerator& gen, const RateTarget& target, int n,
                                  const std::vector<double>& eps_grid, int trials,
                                  std::uint64_t seed);

// n iid draws from `dist`, merged into an empirical distribution.
DiscreteDistribution empirical_sample(const DiscreteDistribution& dist, int n, Rng& rng);

// Fixed 5-atom law on [0.1, 1] used as the one-dimensional rate target.
DiscreteDistribution five_atom_reference();

// Random (generator, P, Q) with 1..max_atoms atoms per side in dimension
// 1..3. Half the draws let Q reuse P's atoms so that TV is nontrivial.
struct RandomTriple {
  ConvexGenerator gen;
  DiscreteDistribution p;
  DiscreteDistribution q;
};
RandomTriple random_triple(Rng& rng, int max_atoms);

// Affine family in d = 2 with an 8-atom uniform latent, a 6-atom target
// with weights in multiples of 1/8, and theta keeping every image inside
// the generator's domain. Generators cycle with `index`.
struct AffineInstance {
  ConvexGenerator gen;
  DiscreteDistribution p_r;
  ThetaFamily family;
  Vector theta;
};
AffineInstance random_affine_instance(Rng& rng, int index);

struct VerifyRow {
  std::string check;
  int instance_id = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyRow> rows;
  int passed() const;
  int failed() const;
};

// Suites: "decomposition", "domination", "duality", "gradient", "all".
// Every pass threshold is multiplied by `tolerance_scale`. Throws
// kInvalidArgument for an unknown suite name.
VerifyReport run_verify_suite(const std::string& suite, int trials, std::uint64_t seed,
                              double tolerance_scale = 1.0);

}  // namespace rwot
