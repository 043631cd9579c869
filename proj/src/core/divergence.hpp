#pragma once

#include <functional>
#include <limits>
#include <string>

#include <Eigen/Core>

namespace drdoo {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Closed interval of conjugate arguments on which phi* is finite and
/// differentiable. Either end may be infinite.
struct Interval {
  double lower = -kInfinity;
  double upper = kInfinity;

  bool contains(double z) const noexcept { return z >= lower && z <= upper; }
};

enum class DivergenceKind { modified_chi2, custom };

/// A smooth phi-divergence together with its convex conjugate
/// phi*(zeta) = sup_{z >= 0} { zeta z - phi(z) }.
///
/// phi must satisfy phi(1) = 0, phi >= 0 on [0, inf), phi = +inf on z < 0 and
/// be twice differentiable at 1 with phi''(1) > 0. The record is open: any
/// divergence meeting these conditions can be plugged into the solvers.
struct PhiDivergence {
  std::string name;
  DivergenceKind kind = DivergenceKind::custom;
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  double phi_double_prime_at_1 = 1.0;
  std::function<double(double)> conjugate;
  std::function<double(double)> conjugate_prime;
  /// Second derivative of phi*. Needed for Jacobians of the first-order system.
  std::function<double(double)> conjugate_second;
  /// [phi*]'(zeta) - 1 without cancellation near zeta = 0. Optional; when
  /// empty the difference is formed from conjugate_prime.
  std::function<double(double)> conjugate_prime_excess;
  Interval conjugate_domain;
};

/// phi(z) = (z - 1)^2 / 2 on z >= 0.
PhiDivergence modified_chi2();

/// Probability vector on n atoms. Construction validates q_i >= 0 and
/// sum q_i = 1 within 1e-12.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  explicit DiscreteDistribution(Eigen::VectorXd weights);

  static DiscreteDistribution uniform(Eigen::Index n);

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }

 private:
  Eigen::VectorXd weights_;
};

inline constexpr double kSimplexTolerance = 1e-12;

/// H_phi(Q | P) = sum_i p_i phi(q_i / p_i). Throws InvalidArgument on length
/// mismatch or a non-positive reference weight.
double divergence_value(const DiscreteDistribution& q, const DiscreteDistribution& p,
                        const PhiDivergence& d);

}  // namespace drdoo
