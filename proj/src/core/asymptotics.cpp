#include "asymptotics.hpp"

#include <cmath>

#include <Eigen/LU>

#include "errors.hpp"

namespace drdoo {

EmpiricalSample population_measure(const Population& population, Index mc_draws, std::uint64_t seed) {
  if (auto q = population.quadrature()) return *std::move(q);
  return population.draw(mc_draws, seed);
}

ExpansionSummary bias_direction(const RewardModel& model, const EmpiricalSample& sample, VectorRef x0,
                                const PhiDivergence& d) {
  if (!model.is_smooth()) throw Unavailable("bias_direction: requires a smooth reward model");
  const RewardStatistics st = reward_statistics(model, sample, x0);
  Eigen::FullPivLU<Matrix> lu(*st.hessian_mean);
  if (!lu.isInvertible()) throw SolverError("bias_direction: mean Hessian is singular");
  ExpansionSummary s;
  s.hessian_mean = *st.hessian_mean;
  s.cov_grad_reward = *st.cov_grad_reward;
  s.beta = s.cov_grad_reward;
  s.phi_dd = d.phi_double_prime_at_1;
  s.pi = lu.solve(s.cov_grad_reward) / s.phi_dd;
  return s;
}

SandwichCovariance sandwich_covariance(const RewardModel& model, const EmpiricalSample& sample, VectorRef x,
                                       double c, double delta, const PhiDivergence& d) {
  if (!model.is_smooth()) throw Unavailable("sandwich_covariance: requires a smooth reward model");
  const Index k = x.size() + 1;
  SandwichCovariance s;
  s.A = mean_psi_jacobian(model, sample, x, c, delta, d);
  s.B = Matrix::Zero(k, k);
  for (Index i = 0; i < sample.size(); ++i) {
    const Vector v = psi(model, x, c, sample.point(i), delta, d);
    s.B.noalias() += sample.weight(i) * v * v.transpose();
  }
  Eigen::FullPivLU<Matrix> lu(s.A);
  if (!lu.isInvertible()) throw SolverError("sandwich_covariance: mean Jacobian is singular");
  const Matrix ainv = lu.inverse();
  s.V = ainv * s.B * ainv.transpose();
  s.V = 0.5 * (s.V + s.V.transpose());
  const Index n = x.size();
  s.xi = s.V.topLeftCorner(n, n);
  s.kappa = s.V.topRightCorner(n, 1);
  s.eta = s.V(n, n);
  return s;
}

namespace {

struct TracePoint {
  double trace;
  Matrix xi;
  Vector x;
};

TracePoint jensen_point(const RewardModel& model, const EmpiricalSample& measure, double delta,
                        const PhiDivergence& d, const SolverOptions& opts, const SolveResult* warm) {
  const SolveResult sol = solve_dro_doo(model, measure, delta, d, opts, warm);
  const SandwichCovariance cov = sandwich_covariance(model, measure, sol.x, sol.c, delta, d);
  const Matrix h = *reward_statistics(model, measure, sol.x).hessian_mean;
  return {(cov.xi * h).trace(), cov.xi, sol.x};
}

}  // namespace

RhoEstimate rho_estimate(const RewardModel& model, const Population& population, const PhiDivergence& d,
                         const RhoOptions& opts) {
  if (!model.is_smooth()) throw Unavailable("rho_estimate: requires a smooth reward model");
  const EmpiricalSample measure = population_measure(population, opts.mc_draws, opts.seed);
  const SolveResult base = solve_saa(model, measure, opts.solver);
  const double h = opts.step;

  const TracePoint t0 = jensen_point(model, measure, 0.0, d, opts.solver, nullptr);
  const TracePoint tp = jensen_point(model, measure, h, d, opts.solver, &base);
  const TracePoint tm = jensen_point(model, measure, -h, d, opts.solver, &base);
  const TracePoint tp2 = jensen_point(model, measure, 0.5 * h, d, opts.solver, &base);
  const TracePoint tm2 = jensen_point(model, measure, -0.5 * h, d, opts.solver, &base);

  RhoEstimate r;
  r.x_star = base.x;
  r.c_star = base.c;
  r.jensen_trace = t0.trace;
  r.summary = bias_direction(model, measure, base.x, d);
  const double d1 = (tp.trace - tm.trace) / (2.0 * h);
  const double d2 = (tp2.trace - tm2.trace) / h;
  r.rho_coarse = d1;
  r.rho = (4.0 * d2 - d1) / 3.0;
  const double s1 = (tp.trace - 2.0 * t0.trace + tm.trace) / (h * h);
  const double s2 = (tp2.trace - 2.0 * t0.trace + tm2.trace) / (0.25 * h * h);
  r.theta = (4.0 * s2 - s1) / 3.0;

  // Decomposition: the xi path at the fixed Hessian plus the Hessian moving
  // with the optimiser along pi.
  const Matrix h0 = *reward_statistics(model, measure, base.x).hessian_mean;
  const Matrix dxi = (4.0 * (tp2.xi - tm2.xi) / h - (tp.xi - tm.xi) / (2.0 * h)) / 3.0;
  double directional = 0.0;
  const Index n = base.x.size();
  for (Index j = 0; j < n; ++j) {
    const double step = h * std::max(1.0, std::abs(base.x[j]));
    Vector xp = base.x, xm = base.x;
    xp[j] += step;
    xm[j] -= step;
    const Matrix hp = *reward_statistics(model, measure, xp).hessian_mean;
    const Matrix hm = *reward_statistics(model, measure, xm).hessian_mean;
    directional += r.summary.pi[j] * (t0.xi * (hp - hm)).trace() / (2.0 * step);
  }
  r.rho_decomposition = (dxi * h0).trace() + directional;
  return r;
}

namespace {
constexpr double kZeroBias = 1e-12;
}  // namespace

OptimalDelta optimal_delta(double rho, const ExpansionSummary& s, Index n) {
  if (n < 1) throw InvalidArgument("optimal_delta: n must be positive");
  const double quad = s.pi.dot(s.hessian_mean * s.pi);
  if (s.pi.lpNorm<Eigen::Infinity>() <= kZeroBias || !(quad < 0.0))
    throw Unavailable("optimal_delta: no first-order bias; formula inapplicable");
  const double k2 = s.phi_dd * s.phi_dd;
  const double nn = static_cast<double>(n);
  OptimalDelta o;
  o.delta = -(1.0 / (2.0 * nn)) * (k2 * rho / quad);
  o.improvement = -(1.0 / (8.0 * nn * nn)) * (k2 * rho * rho / quad);
  return o;
}

}  // namespace drdoo
