#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inner_problem.hpp"

namespace drdoo {

struct SolverOptions {
  /// Required infinity norm of the averaged first-order system on success.
  double residual_tolerance = 1e-9;
  int max_newton_iterations = 100;
  /// Maximum number of times a continuation step in delta may be halved.
  int max_homotopy_halvings = 40;
  /// Relative width at which golden-section search stops.
  double golden_tolerance = 1e-12;
};

/// Solution of SAA (delta == 0), DRO (delta > 0) or DOO (delta < 0).
struct SolveResult {
  double delta = 0.0;
  Vector x;
  double c = 0.0;
  /// Outer objective: the inner value at x (the empirical mean for SAA).
  double objective = 0.0;
  DiscreteDistribution q;
  int iterations = 0;
  /// Smooth path: infinity norm of E_Pn[psi]. Scalar path: final bracket width.
  double residual_norm = 0.0;
  std::string method;
};

/// Stacked first-order map psi(x, c, y) for one outcome. At delta == 0 the
/// second block takes its continuous extension f + c. Requires a smooth model;
/// throws DomainError if -delta (f + c) leaves the conjugate domain.
Vector psi(const RewardModel& model, VectorRef x, double c, VectorRef y, double delta, const PhiDivergence& d);

/// Jacobian of psi with respect to (x, c).
Matrix psi_jacobian(const RewardModel& model, VectorRef x, double c, VectorRef y, double delta,
                    const PhiDivergence& d);

/// E_P[psi] and E_P[J_psi] under the weighted sample.
Vector mean_psi(const RewardModel& model, const EmpiricalSample& sample, VectorRef x, double c, double delta,
                const PhiDivergence& d);
Matrix mean_psi_jacobian(const RewardModel& model, const EmpiricalSample& sample, VectorRef x, double c,
                         double delta, const PhiDivergence& d);

/// max_x E_Pn[f(x, Y)].
///
/// Smooth models: damped Newton on E_Pn[grad f] = 0; throws SolverError if the
/// mean Hessian is not negative definite. Inventory: the smallest order
/// statistic whose cumulative weight reaches the critical ratio. Other
/// piecewise-linear models: best kink, ties to the smallest decision.
SolveResult solve_saa(const RewardModel& model, const EmpiricalSample& sample, const SolverOptions& opts = {});

/// DRO/DOO solve at one delta (delta == 0 defers to solve_saa).
///
/// Smooth models: Newton on E_Pn[psi] = 0 continued in delta from the SAA
/// solution (or from `warm_start`), halving the continuation step on
/// failure. A root is accepted only if the outer objective is locally concave
/// there; otherwise the delta is outside the regular range and SolverError is
/// thrown. Piecewise-linear scalar models go through ScalarPiecewiseSolver.
SolveResult solve_dro_doo(const RewardModel& model, const EmpiricalSample& sample, double delta,
                          const PhiDivergence& d, const SolverOptions& opts = {},
                          const SolveResult* warm_start = nullptr);

struct FamilyEntry {
  double delta = 0.0;
  std::optional<SolveResult> result;
  std::string error;
};

/// Solves on a sorted grid containing zero, continuing outward from delta = 0
/// in both directions. Per-delta failures are recorded in the entry.
std::vector<FamilyEntry> solve_family(const RewardModel& model, const EmpiricalSample& sample,
                                      std::span<const double> delta_grid, const PhiDivergence& d,
                                      const SolverOptions& opts = {});

/// Outer problem for a piecewise-linear concave scalar model.
///
/// The outer objective V(x) = inner value at x is concave for delta > 0 (a
/// minimum of concave functions) and, between consecutive kinks, convex for
/// delta < 0 (a maximum of functions linear on that segment). DOO is therefore
/// solved exactly by scanning the kinks; DRO scans the kinks to bracket the
/// maximiser and refines by golden-section search.
///
/// An instance keeps scratch buffers: use one instance per thread.
class ScalarPiecewiseSolver {
 public:
  ScalarPiecewiseSolver(const RewardModel& model, const EmpiricalSample& sample, const PhiDivergence& d,
                        SolverOptions opts = {});

  /// V(x) at this delta; the empirical mean at delta == 0.
  double outer_value(double x, double delta) const;
  /// Decision only; the cheap path used by experiment loops.
  double solve_decision(double delta) const;
  SolveResult solve(double delta) const;
  double saa_decision() const;

  std::span<const double> kinks() const noexcept { return kinks_; }

 private:
  void fill_rewards(double x) const;
  double golden_section(double lo, double hi, double delta, int& iterations, double& width) const;

  const RewardModel& model_;
  const EmpiricalSample& sample_;
  const PhiDivergence& div_;
  SolverOptions opts_;
  const InventoryReward* inventory_ = nullptr;
  std::vector<Index> order_;     // sample indices sorted by outcome
  std::vector<double> outcomes_;  // outcomes in that order
  std::vector<double> weights_;  // weights in that order
  std::vector<double> kinks_;    // sorted distinct kink locations
  mutable std::vector<double> f_;
  mutable std::vector<double> fs_;
  mutable std::vector<double> ps_;
  mutable std::vector<Index> perm_;
};

}  // namespace drdoo
