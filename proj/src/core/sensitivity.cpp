#include "sensitivity.hpp"

#include <algorithm>

#include <Eigen/LU>

#include "errors.hpp"

namespace drdoo {

SensitivityReport worst_case_sensitivity(const RewardModel& model, const EmpiricalSample& sample, VectorRef x,
                                         const PhiDivergence& d, double delta) {
  const Vector f = reward_values(model, sample, x);
  const Vector& p = sample.weights();
  const double mean = p.dot(f);
  const double var = p.dot((f.array() - mean).square().matrix());
  return {var / d.phi_double_prime_at_1, mean, delta};
}

double sensitivity_slope(const ExpansionSummary& s) {
  Eigen::FullPivLU<Matrix> lu(s.hessian_mean);
  if (!lu.isInvertible()) throw SolverError("sensitivity_slope: mean Hessian is singular");
  return 2.0 * s.beta.dot(lu.solve(s.beta)) / (s.phi_dd * s.phi_dd);
}

std::vector<FrontierPoint> frontier(const RewardModel& model, const EmpiricalSample& sample,
                                    const std::vector<FamilyEntry>& family, const PhiDivergence& d) {
  std::vector<FrontierPoint> out;
  for (const FamilyEntry& e : family) {
    if (!e.result) continue;
    const SensitivityReport r = worst_case_sensitivity(model, sample, e.result->x, d, e.delta);
    out.push_back({e.delta, r.mean_reward, r.sensitivity});
  }
  std::stable_sort(out.begin(), out.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    return a.delta < b.delta;
  });
  return out;
}

}  // namespace drdoo
