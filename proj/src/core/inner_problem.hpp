#pragma once

#include <span>

#include "divergence.hpp"
#include "reward_model.hpp"

namespace drdoo {

/// Result of the inner problem over distributions at a fixed decision.
///
/// For delta > 0 the inner problem is min_Q E_Q[f] + H(Q|P)/delta (nature is
/// adversarial); for delta < 0 it is the corresponding max (nature
/// cooperates). `c` is the scalar dual variable attached to sum_i q_i = 1.
struct InnerSolution {
  double c = 0.0;
  double value = 0.0;
  DiscreteDistribution q;
  bool active_clip = false;
  int iterations = 0;
  /// |sum_i q_i - 1| before the final renormalisation.
  double residual = 0.0;
};

/// Solves the one-dimensional dual over c by Newton's method safeguarded with
/// bisection on a bracket grown by doubling from c0 = -E_P[f]. The attaining
/// distribution is recovered as q_i = p_i [phi*]'(-delta (f_i + c)).
///
/// Throws InvalidArgument for delta == 0 or mismatched lengths and
/// DomainError if c cannot be bracketed inside the conjugate domain.
InnerSolution dual_inner_value(const Vector& rewards, const Vector& weights, double delta, const PhiDivergence& d);

InnerSolution dual_inner_value(const RewardModel& model, const EmpiricalSample& sample, VectorRef x, double delta,
                               const PhiDivergence& d);

/// Direct optimisation over the simplex by projected gradient with
/// backtracking, restarted from the reference weights, every vertex, a simplex
/// grid (n <= 4) and a fixed set of pseudo-random interior points. Test-scale
/// oracle for n <= 12; `c` is left as NaN.
InnerSolution primal_inner_brute_force(const Vector& rewards, const Vector& weights, double delta,
                                       const PhiDivergence& d);

InnerSolution primal_inner_brute_force(const RewardModel& model, const EmpiricalSample& sample, VectorRef x,
                                       double delta, const PhiDivergence& d);

inline constexpr Index kBruteForceMaxAtoms = 12;

/// Closed-form inner solution for the modified chi-square divergence.
///
/// Without clipping q_i = p_i (1 - delta (f_i - E_P f)). When some weight would
/// turn negative the most extreme rewards (largest for delta > 0, smallest for
/// delta < 0) are zeroed and the rest renormalised; ties are broken by index.
/// delta == 0 returns P itself.
InnerSolution tilted_distribution_chi2(const Vector& weights, const Vector& rewards, double delta);

/// Value-only chi-square inner solve for rewards already sorted ascending.
/// Allocation free; used by the scalar outer solvers in tight loops.
struct Chi2Value {
  double value;
  double c;
  Index active_begin;  // active atoms are [active_begin, active_end)
  Index active_end;
};
Chi2Value chi2_inner_sorted(std::span<const double> rewards_sorted, std::span<const double> weights, double delta);

/// Worst-case reweighting Q(eps) used to define worst-case sensitivity:
/// P itself at eps == 0, otherwise the minimiser of the inner problem with
/// penalty 1/eps. Throws InvalidArgument for eps < 0.
DiscreteDistribution sensitivity_distribution(const Vector& weights, const Vector& rewards, double epsilon,
                                              const PhiDivergence& d);

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Vector& v);

}  // namespace drdoo
