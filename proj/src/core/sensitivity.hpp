#pragma once

#include <vector>

#include "asymptotics.hpp"

namespace drdoo {

struct SensitivityReport {
  /// Var_Pn[f] / phi''(1).
  double sensitivity = 0.0;
  double mean_reward = 0.0;
  double delta = 0.0;
};

/// Worst-case sensitivity of the reward at x; `delta` only tags the report.
SensitivityReport worst_case_sensitivity(const RewardModel& model, const EmpiricalSample& sample, VectorRef x,
                                         const PhiDivergence& d, double delta = 0.0);

/// d/ddelta of the sensitivity along x_n(delta) at 0:
/// 2 beta' H^{-1} beta / phi''(1)^2, negative whenever beta != 0.
double sensitivity_slope(const ExpansionSummary& summary);

struct FrontierPoint {
  double delta = 0.0;
  double mean_reward = 0.0;
  double sensitivity = 0.0;
};

/// (in-sample mean, sensitivity) for every solved family entry, sorted by delta.
std::vector<FrontierPoint> frontier(const RewardModel& model, const EmpiricalSample& sample,
                                    const std::vector<FamilyEntry>& family, const PhiDivergence& d);

}  // namespace drdoo
