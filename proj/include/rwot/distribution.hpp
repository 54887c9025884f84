#pragma once

#include <Eigen/Dense>

#include "rwot/bregman.hpp"

namespace rwot {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Weighted point cloud in R^d. Construction validates and normalizes:
//  - every weight must be finite and > 0 (kWeightError otherwise);
//  - weights summing to within 1e-8 of one are renormalized, anything
//    further off is rejected;
//  - atoms closer than 1e-12 in every coordinate are merged, keeping the
//    first occurrence's position and order.
class DiscreteDistribution {
 public:
  static constexpr double kWeightTolerance = 1e-8;
  static constexpr double kAtomTolerance = 1e-12;

  DiscreteDistribution(const PointMatrix& points, const Vector& weights);

  static DiscreteDistribution uniform(const PointMatrix& points);
  static DiscreteDistribution dirac(const Vector& point);

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  const PointMatrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  Vector point(Eigen::Index i) const { return points_.row(i).transpose(); }
  double weight(Eigen::Index i) const { return weights_[i]; }

  // Componentwise bounding box of the support.
  Vector lower_corner() const { return points_.colwise().minCoeff().transpose(); }
  Vector upper_corner() const { return points_.colwise().maxCoeff().transpose(); }

  // Throws kDomainViolation if any atom is outside the generator's domain.
  void require_in_domain(const ConvexGenerator& gen) const;

 private:
  PointMatrix points_;
  Vector weights_;
};

// Returns -1 when no atom of `dist` is within kAtomTolerance of `x`.
Eigen::Index find_atom(const DiscreteDistribution& dist, const VectorRef& x);

}  // namespace rwot
