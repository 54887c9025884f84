#include "rwot/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace rwot {

namespace {

bool same_atom(const PointMatrix& p, Eigen::Index i, Eigen::Index j) {
  for (Eigen::Index k = 0; k < p.cols(); ++k) {
    if (std::abs(p(i, k) - p(j, k)) > DiscreteDistribution::kAtomTolerance) return false;
  }
  return true;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(const PointMatrix& points, const Vector& weights) {
  const Eigen::Index n = points.rows();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "distribution has no atoms");
  if (points.cols() == 0) fail(ErrorCode::kInvalidArgument, "distribution has dimension 0");
  if (weights.size() != n) fail(ErrorCode::kInvalidArgument, "weights/points size mismatch");
  if (!points.allFinite()) fail(ErrorCode::kInvalidArgument, "non-finite atom coordinate");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(weights[i]) || weights[i] <= 0.0) {
      std::ostringstream os;
      os << "weight " << i << " = " << weights[i] << " is not strictly positive";
      fail(ErrorCode::kWeightError, os.str());
    }
  }
  const double total = weights.sum();
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", expected 1";
    fail(ErrorCode::kWeightError, os.str());
  }

  // Sorting by the first coordinate makes every near-duplicate of an atom
  // sit in a window of width kAtomTolerance after it.
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return points(a, 0) < points(b, 0); });
  std::vector<Eigen::Index> owner(static_cast<size_t>(n), -1);
  for (size_t s = 0; s < order.size(); ++s) {
    const Eigen::Index i = order[s];
    if (owner[i] >= 0) continue;
    owner[i] = i;
    for (size_t t = s + 1; t < order.size(); ++t) {
      const Eigen::Index j = order[t];
      if (points(j, 0) - points(i, 0) > kAtomTolerance) break;
      if (owner[j] < 0 && same_atom(points, i, j)) owner[j] = i;
    }
  }
  // Groups are emitted in order of their first original occurrence.
  std::vector<Eigen::Index> slot(static_cast<size_t>(n), -1);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = owner[i];
    if (slot[r] < 0) {
      slot[r] = static_cast<Eigen::Index>(kept.size());
      kept.push_back(i);
    }
  }
  points_.resize(static_cast<Eigen::Index>(kept.size()), points.cols());
  weights_ = Vector::Zero(static_cast<Eigen::Index>(kept.size()));
  for (size_t k = 0; k < kept.size(); ++k) points_.row(static_cast<Eigen::Index>(k)) = points.row(kept[k]);
  for (Eigen::Index i = 0; i < n; ++i) weights_[slot[owner[i]]] += weights[i];
  weights_ /= weights_.sum();
}

DiscreteDistribution DiscreteDistribution::uniform(const PointMatrix& points) {
  const Eigen::Index n = points.rows();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "distribution has no atoms");
  return DiscreteDistribution(points, Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

DiscreteDistribution DiscreteDistribution::dirac(const Vector& point) {
  PointMatrix p(1, point.size());
  p.row(0) = point.transpose();
  return DiscreteDistribution(p, Vector::Ones(1));
}

void DiscreteDistribution::require_in_domain(const ConvexGenerator& gen) const {
  for (Eigen::Index i = 0; i < size(); ++i) gen.require_in_domain(point(i));
}

Eigen::Index find_atom(const DiscreteDistribution& dist, const VectorRef& x) {
  if (x.size() != dist.dim()) return -1;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    bool same = true;
    for (Eigen::Index k = 0; k < x.size() && same; ++k)
      same = std::abs(dist.points()(i, k) - x[k]) <= DiscreteDistribution::kAtomTolerance;
    if (same) return i;
  }
  return -1;
}

}  // namespace rwot
