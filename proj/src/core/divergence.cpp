#include "divergence.hpp"

#include <cmath>
#include <utility>

#include "errors.hpp"

namespace drdoo {

PhiDivergence modified_chi2() {
  PhiDivergence d;
  d.name = "modified_chi2";
  d.kind = DivergenceKind::modified_chi2;
  d.phi = [](double z) { return z < 0.0 ? kInfinity : 0.5 * (z - 1.0) * (z - 1.0); };
  d.phi_prime = [](double z) { return z < 0.0 ? kInfinity : z - 1.0; };
  d.phi_double_prime_at_1 = 1.0;
  // The maximiser of zeta z - phi(z) over z >= 0 is z = max(1 + zeta, 0).
  d.conjugate = [](double s) { return s < -1.0 ? -0.5 : s + 0.5 * s * s; };
  d.conjugate_prime = [](double s) { return s < -1.0 ? 0.0 : 1.0 + s; };
  d.conjugate_second = [](double s) { return s < -1.0 ? 0.0 : 1.0; };
  d.conjugate_prime_excess = [](double s) { return s < -1.0 ? -1.0 : s; };
  return d;
}

DiscreteDistribution::DiscreteDistribution(Eigen::VectorXd weights)
    : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw InvalidArgument("distribution has no atoms");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw InvalidArgument("distribution weight " + std::to_string(i) + " is negative or not finite");
  }
  if (std::abs(weights_.sum() - 1.0) > kSimplexTolerance)
    throw InvalidArgument("distribution weights do not sum to one");
}

DiscreteDistribution DiscreteDistribution::uniform(Eigen::Index n) {
  if (n <= 0) throw InvalidArgument("uniform distribution needs at least one atom");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  // Push the rounding residue onto the last atom so the sum is exact enough.
  w[n - 1] += 1.0 - w.sum();
  return DiscreteDistribution(std::move(w));
}

double divergence_value(const DiscreteDistribution& q, const DiscreteDistribution& p,
                        const PhiDivergence& d) {
  if (q.size() != p.size()) throw InvalidArgument("divergence_value: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) throw InvalidArgument("divergence_value: reference weight must be positive");
    total += p[i] * d.phi(q[i] / p[i]);
  }
  return total;
}

}  // namespace drdoo
