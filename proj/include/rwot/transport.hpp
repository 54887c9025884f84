#pragma once

#include <variant>

#include "rwot/bregman.hpp"
#include "rwot/distribution.hpp"

namespace rwot {

// Ground cost |x - y|_q^p.
struct LqCost {
  double p = 2.0;
  double q = 2.0;
};

using CostSpec = std::variant<ConvexGenerator, LqCost>;

// C_ij = D_phi(x_i, y_j) for a generator, |x_i - y_j|_q^p for an LqCost.
Matrix cost_matrix(const CostSpec& spec, const DiscreteDistribution& p,
                   const DiscreteDistribution& q);

struct TransportPlan {
  Matrix mass;  // n x m, rows follow the source atoms

  // Number of entries strictly greater than zero.
  Eigen::Index support_size() const;
};

// Kantorovich potentials: u_i + v_j <= C_ij, sum a_i u_i + sum b_j v_j equal
// to the primal objective up to `gap`.
struct DualCertificate {
  Vector u;
  Vector v;
  double gap = 0.0;
  // max_ij (u_i + v_j - C_ij), clamped below at zero.
  double max_violation = 0.0;
};

struct TransportSolution {
  TransportPlan plan;
  DualCertificate dual;
  double objective = 0.0;
  long pivots = 0;
};

// Exact solution of min <C, pi> over couplings of (a, b) by the network
// simplex method on the bipartite transportation graph. Throws kUnbalanced if
// |sum a - sum b| > 1e-10 and kInvalidArgument for negative or non-finite
// input. Degenerate bases are handled internally.
TransportSolution solve_transport(const Matrix& cost, const Vector& a, const Vector& b);

// Test oracle: exact optimum by exhaustive enumeration. Uniform marginals of
// equal size enumerate permutations; everything else enumerates the basic
// feasible solutions (spanning trees of K_{n,m}). Throws kTooLarge if n or m
// exceeds 6.
double brute_force_transport(const Matrix& cost, const Vector& a, const Vector& b);

// Checks a certificate against the instance; returns the larger of the
// feasibility violation and the relative duality gap.
struct CertificateCheck {
  double max_violation = 0.0;
  double gap = 0.0;
  bool ok(double primal) const;
};
CertificateCheck check_certificate(const Matrix& cost, const Vector& a, const Vector& b,
                                   const TransportSolution& sol);

TransportSolution solve_distributions(const CostSpec& spec, const DiscreteDistribution& p,
                                      const DiscreteDistribution& q);

// Relaxed Wasserstein divergence: optimal transport with Bregman ground cost.
double rw_divergence(const ConvexGenerator& gen, const DiscreteDistribution& p,
                     const DiscreteDistribution& q);

// (inf E|X - Y|_q^p)^(1/p).
double wasserstein_p_lq(const DiscreteDistribution& p, const DiscreteDistribution& q,
                        double order_p, double norm_q);

// Half the L1 distance between atom weights, atoms matched within 1e-12.
double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);

// Law of grad phi(Y) for Y ~ q.
DiscreteDistribution pushforward_grad(const ConvexGenerator& gen, const DiscreteDistribution& q);

}  // namespace rwot
