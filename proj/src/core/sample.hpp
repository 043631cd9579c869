#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "divergence.hpp"

namespace drdoo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using Index = Eigen::Index;

/// Weighted discrete sample standing in for the empirical distribution P_n.
/// Outcomes are stored column-wise (outcome_dim x size) so each point is a
/// contiguous column. Weights are strictly positive and sum to one.
class EmpiricalSample {
 public:
  EmpiricalSample() = default;
  /// Weights summing to one within 1e-9 are accepted and renormalised.
  EmpiricalSample(Matrix points, Vector weights);

  static EmpiricalSample uniform(Matrix points);
  static EmpiricalSample scalar(std::span<const double> values);

  Index size() const noexcept { return points_.cols(); }
  Index outcome_dim() const noexcept { return points_.rows(); }
  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  auto point(Index i) const { return points_.col(i); }
  double weight(Index i) const { return weights_[i]; }

  DiscreteDistribution distribution() const { return DiscreteDistribution(weights_); }

  /// Uniformly weighted sample made of the points at `indices` (with repeats).
  EmpiricalSample resample(std::span<const Index> indices) const;

  /// Weighted mean of the outcomes.
  Vector mean() const { return points_ * weights_; }

 private:
  Matrix points_;
  Vector weights_;
};

}  // namespace drdoo
