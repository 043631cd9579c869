#pragma once

#include <cstdint>
#include <optional>

#include "population.hpp"
#include "solver.hpp"

namespace drdoo {

/// First-order bias of the DRO/DOO optimiser at delta = 0.
struct ExpansionSummary {
  /// pi = H^{-1} Cov[grad f, f] / phi''(1).
  Vector pi;
  /// beta = Cov[grad f, f].
  Vector beta;
  Matrix hessian_mean;
  Vector cov_grad_reward;
  double phi_dd = 1.0;
};

/// A = E[J_psi], B = E[psi psi'], V = A^{-1} B A^{-T} = [[xi, kappa], [kappa', eta]].
struct SandwichCovariance {
  Matrix A;
  Matrix B;
  Matrix V;
  Matrix xi;
  Vector kappa;
  double eta = 0.0;
};

/// Measure standing in for P: the quadrature rule when the population has
/// one, otherwise `mc_draws` Monte-Carlo draws under `seed`.
EmpiricalSample population_measure(const Population& population, Index mc_draws = 200000,
                                   std::uint64_t seed = 0x5eed);

/// pi and beta at x0 (normally the SAA optimiser of `sample`). Pass a
/// population measure to obtain the population direction. Throws Unavailable
/// for nonsmooth models and SolverError if the mean Hessian is singular.
ExpansionSummary bias_direction(const RewardModel& model, const EmpiricalSample& sample, VectorRef x0,
                                const PhiDivergence& d);

/// Sandwich covariance at a root (x, c) of the delta first-order system.
/// Throws SolverError when A is singular.
SandwichCovariance sandwich_covariance(const RewardModel& model, const EmpiricalSample& sample, VectorRef x,
                                       double c, double delta, const PhiDivergence& d);

struct RhoOptions {
  double step = 1e-3;
  Index mc_draws = 200000;
  std::uint64_t seed = 0x5eed;
  SolverOptions solver;
};

/// rho = d/ddelta tr{xi(delta) E[hess f(x*(delta), Y)]} at 0 under P.
struct RhoEstimate {
  /// Central difference at +-h and +-h/2 combined by Richardson extrapolation.
  double rho = 0.0;
  /// Central difference at +-h alone; |rho - rho_coarse| indicates the error.
  double rho_coarse = 0.0;
  /// Second derivative of the same trace at 0, for diagnostics.
  double theta = 0.0;
  /// tr(xi'(0) H) + pi' grad_x tr(xi(0) H(x)) with both derivatives by
  /// finite differences; informational.
  double rho_decomposition = 0.0;
  /// tr{xi(0) E[hess f(x*(0), Y)]}, the Jensen term of the SAA reward.
  double jensen_trace = 0.0;
  Vector x_star;
  double c_star = 0.0;
  ExpansionSummary summary;
};

RhoEstimate rho_estimate(const RewardModel& model, const Population& population, const PhiDivergence& d,
                         const RhoOptions& opts = {});

struct OptimalDelta {
  double delta = 0.0;
  /// Gain of mu_n(delta_n) over mu_n(0) to order 1/n^2 from the quadratic
  /// expansion delta rho / 2n + delta^2 pi' H pi / (2 phi''^2):
  /// -phi''^2 rho^2 / (8 n^2 pi' H pi), positive.
  double improvement = 0.0;
};

/// delta_n = -(1/2n) phi''^2 rho / (pi' H pi). Throws Unavailable when
/// |pi| <= 1e-12 (no first-order bias, formula inapplicable).
OptimalDelta optimal_delta(double rho, const ExpansionSummary& population_summary, Index n);

}  // namespace drdoo
