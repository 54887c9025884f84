#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>

#include "rwot/error.hpp"

namespace rwot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

enum class GeneratorKind { kSquaredL2, kNegEntropy, kItakuraSaito, kMahalanobis };

const char* generator_kind_name(GeneratorKind kind);
// Accepts "squared-l2", "neg-entropy", "itakura-saito", "mahalanobis".
std::optional<GeneratorKind> parse_generator_kind(const std::string& name);

constexpr double kDefaultEntropyFloor = 1e-3;

// A strictly convex, twice-differentiable phi on an axis-aligned box
// [lo, hi]^d, together with a valid bound `lipschitz` on the spectral norm
// of its Hessian over that box. Immutable after construction.
//
//   SquaredL2     phi(x) = |x|^2              Hessian 2I
//   NegEntropy    phi(x) = sum x_i ln x_i     Hessian diag(1/x)
//   ItakuraSaito  phi(x) = -sum ln x_i        Hessian diag(1/x^2)
//   Mahalanobis   phi(x) = x^T A x, A > 0     Hessian 2A
class ConvexGenerator {
 public:
  static ConvexGenerator squared_l2(
      double lo = -std::numeric_limits<double>::infinity(),
      double hi = std::numeric_limits<double>::infinity());
  static ConvexGenerator neg_entropy(
      double epsilon = kDefaultEntropyFloor,
      double hi = std::numeric_limits<double>::infinity());
  static ConvexGenerator itakura_saito(
      double epsilon = kDefaultEntropyFloor,
      double hi = std::numeric_limits<double>::infinity());
  // Throws kInvalidArgument unless `a` is symmetric positive definite.
  static ConvexGenerator mahalanobis(
      const Matrix& a, double lo = -std::numeric_limits<double>::infinity(),
      double hi = std::numeric_limits<double>::infinity());

  GeneratorKind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  // Floor for the entropy-type generators; 0 for the others.
  double epsilon() const { return epsilon_; }
  double lipschitz() const { return lipschitz_; }
  const Matrix& matrix() const { return a_; }
  // Required dimension, or 0 when any dimension is accepted.
  int fixed_dim() const { return static_cast<int>(a_.rows()); }

  // Same generator with a caller-supplied (possibly invalid) bound. Used to
  // demonstrate that the smoothness inequality depends on L being valid.
  ConvexGenerator with_lipschitz(double lipschitz) const;

  // Closed-form Hessian bound over the sub-box [lo, hi] (componentwise),
  // which must lie inside the domain.
  double lipschitz_over_box(const VectorRef& lo, const VectorRef& hi) const;

  bool contains(const VectorRef& x) const;
  // Throws kDomainViolation naming the offending coordinate.
  void require_in_domain(const VectorRef& x) const;

  double phi(const VectorRef& x) const;
  Vector grad(const VectorRef& x) const;
  // H(x) v without materializing H.
  Vector hessian_apply(const VectorRef& x, const VectorRef& v) const;
  Matrix hessian(const VectorRef& x) const;
  // Inverse of grad; throws kRangeViolation if t is not in grad(domain).
  Vector grad_inverse(const VectorRef& t) const;
  // Componentwise scalar inverse used by the clipping rule, valid for the
  // separable generators only.
  double scalar_grad_inverse(double t) const;

 private:
  ConvexGenerator(GeneratorKind kind, double lo, double hi, double epsilon,
                  Matrix a, double lipschitz);

  void check_dim(const VectorRef& x) const;

  GeneratorKind kind_;
  double lo_;
  double hi_;
  double epsilon_;
  Matrix a_;
  Eigen::LLT<Matrix> a_llt_;
  double lipschitz_;
};

double bregman_divergence(const ConvexGenerator& gen, const VectorRef& x,
                          const VectorRef& y);

inline Vector grad_phi(const ConvexGenerator& gen, const VectorRef& x) {
  gen.require_in_domain(x);
  return gen.grad(x);
}

inline Vector grad_phi_inverse(const ConvexGenerator& gen, const VectorRef& t) {
  return gen.grad_inverse(t);
}

// True iff D(x, y) <= (L/2)|x - y|^2 + 1e-12 with L = gen.lipschitz().
bool check_smoothness_bound(const ConvexGenerator& gen, const VectorRef& x,
                            const VectorRef& y);

}  // namespace rwot
