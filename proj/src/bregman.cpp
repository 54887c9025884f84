#include "rwot/bregman.hpp"

#include <cmath>
#include <sstream>

namespace rwot {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomainViolation: return "DomainViolation";
    case ErrorCode::kRangeViolation: return "RangeViolation";
    case ErrorCode::kUnbalanced: return "Unbalanced";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kWeightError: return "WeightError";
    case ErrorCode::kTieDetected: return "TieDetected";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

const char* generator_kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kSquaredL2: return "squared-l2";
    case GeneratorKind::kNegEntropy: return "neg-entropy";
    case GeneratorKind::kItakuraSaito: return "itakura-saito";
    case GeneratorKind::kMahalanobis: return "mahalanobis";
  }
  return "unknown";
}

std::optional<GeneratorKind> parse_generator_kind(const std::string& name) {
  if (name == "squared-l2" || name == "l2") return GeneratorKind::kSquaredL2;
  if (name == "neg-entropy" || name == "kl") return GeneratorKind::kNegEntropy;
  if (name == "itakura-saito" || name == "is") return GeneratorKind::kItakuraSaito;
  if (name == "mahalanobis") return GeneratorKind::kMahalanobis;
  return std::nullopt;
}

ConvexGenerator::ConvexGenerator(GeneratorKind kind, double lo, double hi,
                                 double epsilon, Matrix a, double lipschitz)
    : kind_(kind),
      lo_(lo),
      hi_(hi),
      epsilon_(epsilon),
      a_(std::move(a)),
      lipschitz_(lipschitz) {
  if (!(lo_ < hi_)) fail(ErrorCode::kInvalidArgument, "empty generator domain");
  if (a_.size() > 0) a_llt_.compute(a_);
}

ConvexGenerator ConvexGenerator::squared_l2(double lo, double hi) {
  return ConvexGenerator(GeneratorKind::kSquaredL2, lo, hi, 0.0, Matrix(), 2.0);
}

ConvexGenerator ConvexGenerator::neg_entropy(double epsilon, double hi) {
  if (!(epsilon > 0.0)) fail(ErrorCode::kInvalidArgument, "neg-entropy floor must be > 0");
  return ConvexGenerator(GeneratorKind::kNegEntropy, epsilon, hi, epsilon, Matrix(),
                         1.0 / epsilon);
}

ConvexGenerator ConvexGenerator::itakura_saito(double epsilon, double hi) {
  if (!(epsilon > 0.0)) fail(ErrorCode::kInvalidArgument, "itakura-saito floor must be > 0");
  return ConvexGenerator(GeneratorKind::kItakuraSaito, epsilon, hi, epsilon, Matrix(),
                         1.0 / (epsilon * epsilon));
}

ConvexGenerator ConvexGenerator::mahalanobis(const Matrix& a, double lo, double hi) {
  if (a.rows() == 0 || a.rows() != a.cols())
    fail(ErrorCode::kInvalidArgument, "Mahalanobis matrix must be square and non-empty");
  if (!a.allFinite()) fail(ErrorCode::kInvalidArgument, "Mahalanobis matrix has non-finite entries");
  const double scale = a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale))
    fail(ErrorCode::kInvalidArgument, "Mahalanobis matrix must be symmetric");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::kInvalidArgument, "Mahalanobis matrix must be positive definite");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    fail(ErrorCode::kInvalidArgument, "Mahalanobis matrix must be positive definite");
  return ConvexGenerator(GeneratorKind::kMahalanobis, lo, hi, 0.0, a,
                         2.0 * eig.eigenvalues().maxCoeff());
}

ConvexGenerator ConvexGenerator::with_lipschitz(double lipschitz) const {
  ConvexGenerator copy = *this;
  copy.lipschitz_ = lipschitz;
  return copy;
}

double ConvexGenerator::lipschitz_over_box(const VectorRef& lo, const VectorRef& hi) const {
  check_dim(lo);
  check_dim(hi);
  require_in_domain(lo);
  require_in_domain(hi);
  switch (kind_) {
    case GeneratorKind::kSquaredL2:
    case GeneratorKind::kMahalanobis:
      return lipschitz_;
    case GeneratorKind::kNegEntropy:
      return 1.0 / lo.minCoeff();
    case GeneratorKind::kItakuraSaito: {
      const double m = lo.minCoeff();
      return 1.0 / (m * m);
    }
  }
  return lipschitz_;
}

void ConvexGenerator::check_dim(const VectorRef& x) const {
  if (x.size() == 0) fail(ErrorCode::kInvalidArgument, "zero-dimensional point");
  if (fixed_dim() > 0 && x.size() != fixed_dim()) {
    std::ostringstream os;
    os << "point has dimension " << x.size() << ", generator expects " << fixed_dim();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
}

bool ConvexGenerator::contains(const VectorRef& x) const {
  if (fixed_dim() > 0 && x.size() != fixed_dim()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < lo_ || x[i] > hi_) return false;
  }
  return x.size() > 0;
}

void ConvexGenerator::require_in_domain(const VectorRef& x) const {
  check_dim(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < lo_ || x[i] > hi_) {
      std::ostringstream os;
      os.precision(17);
      os << "coordinate " << i << " = " << x[i] << " outside " << generator_kind_name(kind_)
         << " domain [" << lo_ << ", " << hi_ << "]";
      fail(ErrorCode::kDomainViolation, os.str());
    }
  }
}

double ConvexGenerator::phi(const VectorRef& x) const {
  switch (kind_) {
    case GeneratorKind::kSquaredL2:
      return x.squaredNorm();
    case GeneratorKind::kNegEntropy:
      return (x.array() * x.array().log()).sum();
    case GeneratorKind::kItakuraSaito:
      return -x.array().log().sum();
    case GeneratorKind::kMahalanobis:
      return x.dot(a_ * x);
  }
  return 0.0;
}

Vector ConvexGenerator::grad(const VectorRef& x) const {
  switch (kind_) {
    case GeneratorKind::kSquaredL2:
      return 2.0 * x;
    case GeneratorKind::kNegEntropy:
      return (x.array().log() + 1.0).matrix();
    case GeneratorKind::kItakuraSaito:
      return (-x.array().inverse()).matrix();
    case GeneratorKind::kMahalanobis:
      return 2.0 * (a_ * x);
  }
  return x;
}

Vector ConvexGenerator::hessian_apply(const VectorRef& x, const VectorRef& v) const {
  switch (kind_) {
    case GeneratorKind::kSquaredL2:
      return 2.0 * v;
    case GeneratorKind::kNegEntropy:
      return (v.array() / x.array()).matrix();
    case GeneratorKind::kItakuraSaito:
      return (v.array() / x.array().square()).matrix();
    case GeneratorKind::kMahalanobis:
      return 2.0 * (a_ * v);
  }
  return v;
}

Matrix ConvexGenerator::hessian(const VectorRef& x) const {
  const Eigen::Index d = x.size();
  switch (kind_) {
    case GeneratorKind::kSquaredL2:
      return 2.0 * Matrix::Identity(d, d);
    case GeneratorKind::kNegEntropy:
      return x.array().inverse().matrix().asDiagonal();
    case GeneratorKind::kItakuraSaito:
      return x.array().square().inverse().matrix().asDiagonal();
    case GeneratorKind::kMahalanobis:
      return 2.0 * a_;
  }
  return Matrix::Identity(d, d);
}

double ConvexGenerator::scalar_grad_inverse(double t) const {
  if (kind_ == GeneratorKind::kMahalanobis)
    fail(ErrorCode::kInvalidArgument, "Mahalanobis generator is not separable");
  Vector tv = Vector::Constant(1, t);
  return grad_inverse(tv)[0];
}

Vector ConvexGenerator::grad_inverse(const VectorRef& t) const {
  check_dim(t);
  if (!t.allFinite()) fail(ErrorCode::kRangeViolation, "non-finite gradient value");
  Vector x;
  switch (kind_) {
    case GeneratorKind::kSquaredL2:
      x = 0.5 * t;
      break;
    case GeneratorKind::kNegEntropy:
      x = (t.array() - 1.0).exp().matrix();
      break;
    case GeneratorKind::kItakuraSaito:
      if ((t.array() >= 0.0).any())
        fail(ErrorCode::kRangeViolation,
             "itakura-saito gradient image is (-inf, 0); got a nonnegative value");
      x = (-t.array().inverse()).matrix();
      break;
    case GeneratorKind::kMahalanobis:
      x = a_llt_.solve(0.5 * t);
      break;
  }
  // Preimages that fall outside the box lie outside the image of grad.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double slack = 1e-12 * (1.0 + std::abs(x[i]));
    if (!std::isfinite(x[i]) || x[i] < lo_ - slack || x[i] > hi_ + slack) {
      std::ostringstream os;
      os.precision(17);
      os << "value " << t[i] << " is outside the gradient image of the "
         << generator_kind_name(kind_) << " domain";
      fail(ErrorCode::kRangeViolation, os.str());
    }
    x[i] = std::min(std::max(x[i], lo_), hi_);
  }
  return x;
}

double bregman_divergence(const ConvexGenerator& gen, const VectorRef& x, const VectorRef& y) {
  gen.require_in_domain(x);
  gen.require_in_domain(y);
  if (x.size() != y.size()) fail(ErrorCode::kInvalidArgument, "dimension mismatch");
  switch (gen.kind()) {
    case GeneratorKind::kSquaredL2:
      return (x - y).squaredNorm();
    case GeneratorKind::kNegEntropy: {
      // Generalized KL; equals x^T log(x/y) only on the simplex.
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        s += x[i] * std::log(x[i] / y[i]) - x[i] + y[i];
      return s;
    }
    case GeneratorKind::kItakuraSaito: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = x[i] / y[i];
        s += r - std::log(r) - 1.0;
      }
      return s;
    }
    case GeneratorKind::kMahalanobis: {
      const Vector diff = x - y;
      return diff.dot(gen.matrix() * diff);
    }
  }
  return 0.0;
}

bool check_smoothness_bound(const ConvexGenerator& gen, const VectorRef& x, const VectorRef& y) {
  const double d = bregman_divergence(gen, x, y);
  return d <= 0.5 * gen.lipschitz() * (x - y).squaredNorm() + 1e-12;
}

}  // namespace rwot
