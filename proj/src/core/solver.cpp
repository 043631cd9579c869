#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "errors.hpp"

namespace drdoo {

namespace {

void require_smooth(const RewardModel& model, const char* what) {
  if (!model.is_smooth()) throw Unavailable(std::string(what) + " requires a smooth reward model");
}

double psi2_scalar(double f_plus_c, double delta, const PhiDivergence& d) {
  if (delta == 0.0) return f_plus_c;
  const double z = -delta * f_plus_c;
  const double excess = d.conjugate_prime_excess ? d.conjugate_prime_excess(z) : d.conjugate_prime(z) - 1.0;
  return -(d.phi_double_prime_at_1 / delta) * excess;
}

void check_domain(double z, const PhiDivergence& d) {
  if (!d.conjugate_domain.contains(z))
    throw DomainError("psi: conjugate argument outside the domain", z < d.conjugate_domain.lower
                                                                        ? d.conjugate_domain.lower
                                                                        : d.conjugate_domain.upper);
}

// Strict improvement beyond round-off, so ties keep the earlier candidate.
bool improves(double v, double best) {
  return std::isinf(best) ? v > best : v > best + 1e-12 * (1.0 + std::abs(best));
}

bool negative_definite(const Matrix& m) {
  Eigen::LLT<Matrix> llt(-m);
  return llt.info() == Eigen::Success;
}

}  // namespace

Vector psi(const RewardModel& model, VectorRef x, double c, VectorRef y, double delta, const PhiDivergence& d) {
  require_smooth(model, "psi");
  const double f = model.evaluate(x, y);
  const Vector g = *model.gradient(x, y);
  const double z = -delta * (f + c);
  check_domain(z, d);
  Vector out(g.size() + 1);
  out.head(g.size()) = d.conjugate_prime(z) * g;
  out[g.size()] = psi2_scalar(f + c, delta, d);
  return out;
}

Matrix psi_jacobian(const RewardModel& model, VectorRef x, double c, VectorRef y, double delta,
                    const PhiDivergence& d) {
  require_smooth(model, "psi_jacobian");
  const Index n = x.size();
  const double f = model.evaluate(x, y);
  const Vector g = *model.gradient(x, y);
  const Matrix h = *model.hessian(x, y);
  const double z = -delta * (f + c);
  check_domain(z, d);
  const double s1 = d.conjugate_prime(z);
  const double s2 = d.conjugate_second(z);
  const double k = d.phi_double_prime_at_1;
  Matrix j(n + 1, n + 1);
  j.topLeftCorner(n, n) = s1 * h - delta * s2 * g * g.transpose();
  j.topRightCorner(n, 1) = -delta * s2 * g;
  j.bottomLeftCorner(1, n) = k * s2 * g.transpose();
  j(n, n) = k * s2;
  return j;
}

Vector mean_psi(const RewardModel& model, const EmpiricalSample& sample, VectorRef x, double c, double delta,
                const PhiDivergence& d) {
  Vector acc = Vector::Zero(x.size() + 1);
  for (Index i = 0; i < sample.size(); ++i) acc += sample.weight(i) * psi(model, x, c, sample.point(i), delta, d);
  return acc;
}

Matrix mean_psi_jacobian(const RewardModel& model, const EmpiricalSample& sample, VectorRef x, double c,
                         double delta, const PhiDivergence& d) {
  Matrix acc = Matrix::Zero(x.size() + 1, x.size() + 1);
  for (Index i = 0; i < sample.size(); ++i)
    acc += sample.weight(i) * psi_jacobian(model, x, c, sample.point(i), delta, d);
  return acc;
}

namespace {

Vector initial_decision(const RewardModel& model, const EmpiricalSample& sample) {
  if (model.decision_dim() == sample.outcome_dim()) return sample.mean();
  return Vector::Zero(model.decision_dim());
}

SolveResult smooth_saa(const RewardModel& model, const EmpiricalSample& sample, const SolverOptions& opts) {
  Vector x = initial_decision(model, sample);
  const Vector& p = sample.weights();
  auto objective = [&](const Vector& v) { return p.dot(reward_values(model, sample, v)); };
  double fx = objective(x);
  int it = 0;
  double gnorm = kInfinity;
  for (; it < opts.max_newton_iterations; ++it) {
    const RewardStatistics st = reward_statistics(model, sample, x);
    const Vector& g = *st.gradient_mean;
    const Matrix& h = *st.hessian_mean;
    gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= 1e-3 * opts.residual_tolerance) break;
    if (!negative_definite(h)) throw SolverError("solve_saa: mean Hessian is not negative definite");
    const Vector step = -h.ldlt().solve(g);
    const double slack = 1e-13 * (1.0 + std::abs(fx));
    double t = 1.0;
    Vector next = x + step;
    double fn = objective(next);
    while (fn < fx + 1e-4 * t * g.dot(step) - slack && t > 1e-10) {
      t *= 0.5;
      next = x + t * step;
      fn = objective(next);
    }
    const double move = (next - x).lpNorm<Eigen::Infinity>();
    x = std::move(next);
    fx = fn;
    if (move <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>()) && gnorm <= opts.residual_tolerance) {
      ++it;
      break;
    }
  }
  const RewardStatistics st = reward_statistics(model, sample, x);
  if (!negative_definite(*st.hessian_mean)) throw SolverError("solve_saa: mean Hessian is not negative definite");
  gnorm = st.gradient_mean->lpNorm<Eigen::Infinity>();
  if (gnorm > opts.residual_tolerance)
    throw SolverError("solve_saa: Newton stopped with gradient norm " + std::to_string(gnorm));
  SolveResult r;
  r.delta = 0.0;
  r.x = x;
  r.objective = st.mean;
  r.c = -st.mean;
  r.q = sample.distribution();
  r.iterations = it;
  r.residual_norm = gnorm;
  r.method = "newton";
  return r;
}

struct JointState {
  Vector x;
  double c;
};

// Newton on E[psi] = 0 at fixed delta from `z`. Returns false on failure.
bool joint_newton(const RewardModel& model, const EmpiricalSample& sample, double delta, const PhiDivergence& d,
                  const SolverOptions& opts, JointState& z, int& iterations, double& resid) {
  const Index n = z.x.size();
  auto residual = [&](const Vector& x, double c, Vector& out) -> bool {
    try {
      out = mean_psi(model, sample, x, c, delta, d);
      return out.allFinite();
    } catch (const DomainError&) {
      return false;
    }
  };
  Vector g;
  if (!residual(z.x, z.c, g)) return false;
  double gn = g.lpNorm<Eigen::Infinity>();
  const double target = std::min(opts.residual_tolerance, 1e-12 * (1.0 + std::abs(z.c)));
  for (int it = 0; it < opts.max_newton_iterations; ++it) {
    if (gn <= target) break;
    ++iterations;
    Matrix j = mean_psi_jacobian(model, sample, z.x, z.c, delta, d);
    Eigen::FullPivLU<Matrix> lu(j);
    if (!lu.isInvertible()) return false;
    const Vector step = -lu.solve(g);
    double t = 1.0;
    Vector gn_vec;
    Vector xn;
    double cn = 0.0;
    bool ok = false;
    for (int bt = 0; bt < 40; ++bt) {
      xn = z.x + t * step.head(n);
      cn = z.c + t * step[n];
      if (residual(xn, cn, gn_vec) && gn_vec.squaredNorm() <= (1.0 - 1e-4 * t) * g.squaredNorm()) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      // Accept a full step that lands at round-off level even if not decreasing.
      xn = z.x + step.head(n);
      cn = z.c + step[n];
      if (!residual(xn, cn, gn_vec) || gn_vec.lpNorm<Eigen::Infinity>() > 10.0 * target) return false;
    }
    z.x = xn;
    z.c = cn;
    g = gn_vec;
    gn = g.lpNorm<Eigen::Infinity>();
  }
  resid = gn;
  return gn <= opts.residual_tolerance;
}

// Reduced Hessian of the outer objective: J_xx - J_xc J_cc^{-1} J_cx. The c
// row of the Jacobian is a rescaled dual gradient, so the scale cancels.
bool outer_locally_concave(const Matrix& j) {
  const Index n = j.rows() - 1;
  const double jcc = j(n, n);
  if (jcc == 0.0 || !std::isfinite(jcc)) return false;
  const Matrix s = j.topLeftCorner(n, n) - j.topRightCorner(n, 1) * j.bottomLeftCorner(1, n) / jcc;
  return negative_definite(0.5 * (s + s.transpose()));
}

SolveResult smooth_dro_doo(const RewardModel& model, const EmpiricalSample& sample, double delta,
                           const PhiDivergence& d, const SolverOptions& opts, const SolveResult* warm) {
  JointState z;
  double from = 0.0;
  if (warm != nullptr) {
    z = {warm->x, warm->c};
    from = warm->delta;
  } else {
    const SolveResult saa = smooth_saa(model, sample, opts);
    z = {saa.x, saa.c};
  }
  int iterations = 0;
  double resid = kInfinity;
  double step = delta - from;
  int halvings = 0;
  double current = from;
  while (current != delta) {
    double next = current + step;
    if ((step > 0 && next > delta) || (step < 0 && next < delta)) next = delta;
    JointState trial = z;
    if (joint_newton(model, sample, next, d, opts, trial, iterations, resid)) {
      z = trial;
      current = next;
      step *= 1.5;
    } else {
      if (++halvings > opts.max_homotopy_halvings)
        throw SolverError("solve_dro_doo: continuation in delta stalled at " + std::to_string(current) +
                          " (target " + std::to_string(delta) + "); delta lies outside the solvable range");
      step *= 0.5;
    }
  }
  const Matrix j = mean_psi_jacobian(model, sample, z.x, z.c, delta, d);
  if (!outer_locally_concave(j))
    throw SolverError("solve_dro_doo: first-order point at delta = " + std::to_string(delta) +
                      " is not a local maximiser; delta lies outside the regular range");
  SolveResult r;
  r.delta = delta;
  r.x = z.x;
  r.c = z.c;
  const InnerSolution inner = dual_inner_value(model, sample, z.x, delta, d);
  r.objective = inner.value;
  r.q = inner.q;
  r.iterations = iterations;
  r.residual_norm = mean_psi(model, sample, z.x, z.c, delta, d).lpNorm<Eigen::Infinity>();
  r.method = "newton";
  return r;
}

}  // namespace

ScalarPiecewiseSolver::ScalarPiecewiseSolver(const RewardModel& model, const EmpiricalSample& sample,
                                             const PhiDivergence& d, SolverOptions opts)
    : model_(model), sample_(sample), div_(d), opts_(opts) {
  if (model.smoothness() != Smoothness::piecewise_linear_scalar || model.decision_dim() != 1)
    throw InvalidArgument("ScalarPiecewiseSolver: model must be piecewise-linear with a scalar decision");
  if (sample.outcome_dim() != 1) throw InvalidArgument("ScalarPiecewiseSolver: scalar outcomes required");
  inventory_ = dynamic_cast<const InventoryReward*>(&model);
  const Index n = sample.size();
  order_.resize(static_cast<std::size_t>(n));
  std::iota(order_.begin(), order_.end(), Index{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](Index a, Index b) { return sample.point(a)[0] < sample.point(b)[0]; });
  for (Index i : order_) {
    outcomes_.push_back(sample.point(i)[0]);
    weights_.push_back(sample.weight(i));
    for (double k : model.kinks(sample.point(i))) kinks_.push_back(k);
  }
  std::sort(kinks_.begin(), kinks_.end());
  kinks_.erase(std::unique(kinks_.begin(), kinks_.end()), kinks_.end());
  if (kinks_.empty()) throw InvalidArgument("ScalarPiecewiseSolver: model reports no kinks");

  // Bounded outer problem: every reward must slope up left of the first kink
  // and down right of the last one.
  const double span = std::max(1.0, kinks_.back() - kinks_.front());
  Vector left(1), right(1);
  left[0] = kinks_.front() - span;
  right[0] = kinks_.back() + span;
  for (Index i = 0; i < n; ++i) {
    auto gl = model.gradient(left, sample.point(i));
    auto gr = model.gradient(right, sample.point(i));
    if (!gl || !gr || (*gl)[0] < 0.0 || (*gr)[0] > 0.0)
      throw SolverError("ScalarPiecewiseSolver: outer objective is not bounded by the kink range");
  }
  f_.resize(static_cast<std::size_t>(n));
  fs_.resize(static_cast<std::size_t>(n));
  ps_.resize(static_cast<std::size_t>(n));
  perm_.resize(static_cast<std::size_t>(n));
}

void ScalarPiecewiseSolver::fill_rewards(double x) const {
  const std::size_t n = outcomes_.size();
  bool sorted = true;
  if (inventory_ != nullptr) {
    // Inventory rewards are nondecreasing in demand, so the outcome order is
    // already a reward order.
    for (std::size_t i = 0; i < n; ++i) f_[i] = inventory_->value(x, outcomes_[i]);
  } else {
    Vector xv = Vector::Constant(1, x);
    for (std::size_t i = 0; i < n; ++i) {
      f_[i] = model_.evaluate(xv, sample_.point(order_[i]));
      if (i > 0 && f_[i] < f_[i - 1]) sorted = false;
    }
  }
  if (sorted) {
    std::copy(f_.begin(), f_.end(), fs_.begin());
    std::copy(weights_.begin(), weights_.end(), ps_.begin());
    return;
  }
  std::iota(perm_.begin(), perm_.end(), Index{0});
  std::stable_sort(perm_.begin(), perm_.end(), [&](Index a, Index b) {
    return f_[static_cast<std::size_t>(a)] < f_[static_cast<std::size_t>(b)];
  });
  for (std::size_t k = 0; k < n; ++k) {
    fs_[k] = f_[static_cast<std::size_t>(perm_[k])];
    ps_[k] = weights_[static_cast<std::size_t>(perm_[k])];
  }
}

double ScalarPiecewiseSolver::outer_value(double x, double delta) const {
  fill_rewards(x);
  if (delta == 0.0 || div_.kind == DivergenceKind::modified_chi2) return chi2_inner_sorted(fs_, ps_, delta).value;
  const Vector f = Eigen::Map<const Vector>(fs_.data(), static_cast<Index>(fs_.size()));
  const Vector p = Eigen::Map<const Vector>(ps_.data(), static_cast<Index>(ps_.size()));
  return dual_inner_value(f, p, delta, div_).value;
}

double ScalarPiecewiseSolver::saa_decision() const {
  if (inventory_ != nullptr) {
    const double ratio = inventory_->params().critical_ratio();
    double cum = 0.0;
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
      cum += weights_[i];
      if (cum >= ratio - 1e-12) return outcomes_[i];
    }
    return outcomes_.back();
  }
  double best = -kInfinity, arg = kinks_.front();
  for (double k : kinks_) {
    const double v = outer_value(k, 0.0);
    if (improves(v, best)) {
      best = v;
      arg = k;
    }
  }
  return arg;
}

double ScalarPiecewiseSolver::golden_section(double lo, double hi, double delta, int& iterations,
                                             double& width) const {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = outer_value(x1, delta), f2 = outer_value(x2, delta);
  const double tol = opts_.golden_tolerance * std::max(1.0, std::abs(hi));
  while (b - a > tol && iterations < 400) {
    ++iterations;
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = outer_value(x2, delta);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = outer_value(x1, delta);
    }
  }
  width = b - a;
  return f1 >= f2 ? x1 : x2;
}

double ScalarPiecewiseSolver::solve_decision(double delta) const {
  if (delta == 0.0) return saa_decision();
  std::size_t best_k = 0;
  double best = -kInfinity;
  for (std::size_t k = 0; k < kinks_.size(); ++k) {
    const double v = outer_value(kinks_[k], delta);
    if (improves(v, best)) {
      best = v;
      best_k = k;
    }
  }
  if (delta < 0.0) return kinks_[best_k];
  const double lo = kinks_[best_k == 0 ? 0 : best_k - 1];
  const double hi = kinks_[std::min(best_k + 1, kinks_.size() - 1)];
  if (!(hi > lo)) return kinks_[best_k];
  int iterations = 0;
  double width = 0.0;
  const double x = golden_section(lo, hi, delta, iterations, width);
  return outer_value(x, delta) > best ? x : kinks_[best_k];
}

SolveResult ScalarPiecewiseSolver::solve(double delta) const {
  if (!std::isfinite(delta)) throw InvalidArgument("solve: delta must be finite");
  SolveResult r;
  r.delta = delta;
  double x;
  if (delta == 0.0) {
    x = saa_decision();
    r.method = inventory_ != nullptr ? "critical_quantile" : "kink_enumeration";
  } else if (delta < 0.0) {
    x = solve_decision(delta);
    r.method = "kink_enumeration";
    r.iterations = static_cast<int>(kinks_.size());
  } else {
    std::size_t best_k = 0;
    double best = -kInfinity;
    for (std::size_t k = 0; k < kinks_.size(); ++k) {
      const double v = outer_value(kinks_[k], delta);
      if (improves(v, best)) {
        best = v;
        best_k = k;
      }
    }
    const double lo = kinks_[best_k == 0 ? 0 : best_k - 1];
    const double hi = kinks_[std::min(best_k + 1, kinks_.size() - 1)];
    x = kinks_[best_k];
    int iterations = 0;
    double width = 0.0;
    if (hi > lo) {
      const double xg = golden_section(lo, hi, delta, iterations, width);
      if (outer_value(xg, delta) > best) x = xg;
    }
    r.iterations = static_cast<int>(kinks_.size()) + iterations;
    r.residual_norm = width;
    r.method = "golden_section";
  }
  r.x = Vector::Constant(1, x);
  const Vector f = reward_values(model_, sample_, r.x);
  if (delta == 0.0) {
    r.objective = sample_.weights().dot(f);
    r.c = -r.objective;
    r.q = sample_.distribution();
  } else {
    const InnerSolution inner = div_.kind == DivergenceKind::modified_chi2
                                    ? tilted_distribution_chi2(sample_.weights(), f, delta)
                                    : dual_inner_value(f, sample_.weights(), delta, div_);
    r.objective = inner.value;
    r.c = inner.c;
    r.q = inner.q;
  }
  return r;
}

SolveResult solve_saa(const RewardModel& model, const EmpiricalSample& sample, const SolverOptions& opts) {
  if (model.is_smooth()) return smooth_saa(model, sample, opts);
  return ScalarPiecewiseSolver(model, sample, modified_chi2(), opts).solve(0.0);
}

SolveResult solve_dro_doo(const RewardModel& model, const EmpiricalSample& sample, double delta,
                          const PhiDivergence& d, const SolverOptions& opts, const SolveResult* warm_start) {
  if (!std::isfinite(delta)) throw InvalidArgument("solve_dro_doo: delta must be finite");
  if (!model.is_smooth()) return ScalarPiecewiseSolver(model, sample, d, opts).solve(delta);
  if (delta == 0.0) return smooth_saa(model, sample, opts);
  return smooth_dro_doo(model, sample, delta, d, opts, warm_start);
}

std::vector<FamilyEntry> solve_family(const RewardModel& model, const EmpiricalSample& sample,
                                      std::span<const double> grid, const PhiDivergence& d,
                                      const SolverOptions& opts) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidArgument("solve_family: grid must be sorted");
  const auto zero = std::find(grid.begin(), grid.end(), 0.0);
  if (zero == grid.end()) throw InvalidArgument("solve_family: grid must contain zero");
  const std::size_t z = static_cast<std::size_t>(zero - grid.begin());
  std::vector<FamilyEntry> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k].delta = grid[k];

  auto record = [&](std::size_t k, auto&& fn) {
    try {
      out[k].result = fn();
    } catch (const Error& e) {
      out[k].error = e.what();
    }
  };

  if (!model.is_smooth()) {
    ScalarPiecewiseSolver solver(model, sample, d, opts);
    for (std::size_t k = 0; k < grid.size(); ++k) record(k, [&] { return solver.solve(grid[k]); });
    return out;
  }
  record(z, [&] { return smooth_saa(model, sample, opts); });
  // Continue outward from zero; each solve starts from its inner neighbour.
  for (int dir : {1, -1}) {
    const SolveResult* prev = out[z].result ? &*out[z].result : nullptr;
    for (std::size_t k = dir > 0 ? z + 1 : z; dir > 0 ? k < grid.size() : k-- > 0; k += (dir > 0 ? 1 : 0)) {
      if (grid[k] == 0.0) continue;
      record(k, [&] { return smooth_dro_doo(model, sample, grid[k], d, opts, prev); });
      if (out[k].result) prev = &*out[k].result;
    }
  }
  return out;
}

}  // namespace drdoo
