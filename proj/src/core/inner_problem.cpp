#include "inner_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace drdoo {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr int kMaxNewton = 100;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_inputs(const Vector& f, const Vector& p) {
  if (f.size() != p.size()) throw InvalidArgument("inner problem: reward and weight lengths differ");
  if (f.size() == 0) throw InvalidArgument("inner problem: empty sample");
  if (!f.allFinite()) throw InvalidArgument("inner problem: non-finite reward");
}

// Renormalise the recovered weights and wrap them; tiny negative round-off is
// clipped so the distribution invariant holds exactly.
DiscreteDistribution finish_weights(Vector q, double& residual) {
  q = q.cwiseMax(0.0);
  const double s = q.sum();
  residual = std::abs(s - 1.0);
  if (!(s > 0.0)) throw SolverError("inner problem: recovered distribution has zero mass");
  q /= s;
  return DiscreteDistribution(std::move(q));
}

}  // namespace

InnerSolution dual_inner_value(const Vector& f, const Vector& p, double delta, const PhiDivergence& d) {
  check_inputs(f, p);
  if (delta == 0.0 || !std::isfinite(delta)) throw InvalidArgument("dual_inner_value: delta must be finite and nonzero");

  const double fmin = f.minCoeff(), fmax = f.maxCoeff();
  // c-interval keeping every conjugate argument -delta (f_i + c) in the domain.
  double c_lo = -kInfinity, c_hi = kInfinity;
  const Interval dom = d.conjugate_domain;
  if (delta > 0.0) {
    if (std::isfinite(dom.upper)) c_lo = -dom.upper / delta - fmin;
    if (std::isfinite(dom.lower)) c_hi = -dom.lower / delta - fmax;
  } else {
    const double a = -delta;
    if (std::isfinite(dom.upper)) c_hi = dom.upper / a - fmax;
    if (std::isfinite(dom.lower)) c_lo = dom.lower / a - fmin;
  }
  if (c_lo > c_hi) throw DomainError("dual_inner_value: conjugate domain admits no dual variable", dom.upper);

  auto residual = [&](double c) {
    double s = 0.0;
    for (Index i = 0; i < f.size(); ++i) s += p[i] * d.conjugate_prime(-delta * (f[i] + c));
    return s - 1.0;
  };
  auto slope = [&](double c) {
    double s = 0.0;
    for (Index i = 0; i < f.size(); ++i) s += p[i] * d.conjugate_second(-delta * (f[i] + c));
    return -delta * s;
  };

  double c0 = std::clamp(-p.dot(f), c_lo, c_hi);
  double r0 = residual(c0);
  int iterations = 0;
  double c = c0;
  double r = r0;

  if (std::abs(r0) > kResidualTol) {
    // r is nonincreasing in c for delta > 0 and nondecreasing for delta < 0.
    const double dir = ((r0 > 0.0) == (delta > 0.0)) ? 1.0 : -1.0;
    const double limit = dir > 0 ? c_hi : c_lo;
    double step = std::max(1.0 / std::abs(delta), (fmax - fmin) + 1.0) * 1e-3;
    double a = c0, ra = r0;
    double b = c0, rb = r0;
    for (int k = 0; k < 400; ++k) {
      b = a + dir * step;
      bool at_limit = false;
      if ((dir > 0 && b >= limit) || (dir < 0 && b <= limit)) {
        b = limit;
        at_limit = true;
      }
      rb = residual(b);
      if ((rb > 0.0) != (ra > 0.0) || std::abs(rb) <= kResidualTol) break;
      if (at_limit || !std::isfinite(b)) {
        throw DomainError("dual_inner_value: dual variable not bracketable; conjugate-domain boundary at c = " +
                              std::to_string(limit),
                          limit);
      }
      a = b;
      ra = rb;
      step *= 2.0;
    }
    if ((rb > 0.0) == (ra > 0.0) && std::abs(rb) > kResidualTol)
      throw SolverError("dual_inner_value: bracket search exhausted");

    double lo = std::min(a, b), hi = std::max(a, b);
    double r_lo = residual(lo);
    c = std::abs(rb) <= kResidualTol ? b : 0.5 * (lo + hi);
    r = residual(c);
    while (std::abs(r) > kResidualTol && iterations < kMaxNewton) {
      ++iterations;
      if ((r > 0.0) == (r_lo > 0.0)) {
        lo = c;
        r_lo = r;
      } else {
        hi = c;
      }
      const double g = slope(c);
      double next = (g != 0.0 && std::isfinite(g)) ? c - r / g : kNaN;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == c) break;
      c = next;
      r = residual(c);
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c))) break;
    }
  }
  if (std::abs(r) > 1e-10)
    throw SolverError("dual_inner_value: residual " + std::to_string(r) + " after " + std::to_string(iterations) +
                      " iterations");

  InnerSolution sol;
  sol.c = c;
  sol.iterations = iterations;
  Vector q(f.size());
  double penalty = 0.0;
  for (Index i = 0; i < f.size(); ++i) {
    const double z = -delta * (f[i] + c);
    q[i] = p[i] * d.conjugate_prime(z);
    penalty += p[i] * d.conjugate(z);
    if (q[i] <= 0.0) sol.active_clip = true;
  }
  sol.value = -c - penalty / delta;
  sol.q = finish_weights(std::move(q), sol.residual);
  return sol;
}

InnerSolution dual_inner_value(const RewardModel& model, const EmpiricalSample& sample, VectorRef x, double delta,
                               const PhiDivergence& d) {
  return dual_inner_value(reward_values(model, sample, x), sample.weights(), delta, d);
}

Vector project_to_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

namespace {

struct PrimalObjective {
  const Vector& f;
  const Vector& p;
  double delta;
  const PhiDivergence& d;

  // Minimisation form: sign * E_Q f + H(Q|P) / |delta|.
  double sign() const { return delta > 0.0 ? 1.0 : -1.0; }

  double value(const Vector& q) const {
    double pen = 0.0;
    for (Index i = 0; i < q.size(); ++i) pen += p[i] * d.phi(q[i] / p[i]);
    return sign() * q.dot(f) + pen / std::abs(delta);
  }
  Vector gradient(const Vector& q) const {
    Vector g(q.size());
    for (Index i = 0; i < q.size(); ++i) {
      double dphi = d.phi_prime(std::max(q[i] / p[i], 1e-300));
      if (!std::isfinite(dphi)) dphi = dphi > 0 ? 1e300 : -1e300;
      g[i] = sign() * f[i] + dphi / std::abs(delta);
    }
    return g;
  }
};

Vector projected_gradient(const PrimalObjective& obj, Vector q) {
  double t = std::abs(obj.delta) * obj.p.minCoeff();
  double fq = obj.value(q);
  int stalled = 0;
  for (int it = 0; it < 200000; ++it) {
    const Vector g = obj.gradient(q);
    Vector next;
    double fn = 0.0;
    for (int bt = 0; bt < 80; ++bt) {
      next = project_to_simplex(q - t * g);
      fn = obj.value(next);
      const Vector step = next - q;
      if (fn <= fq + g.dot(step) + step.squaredNorm() / (2.0 * t) + 1e-15 * std::abs(fq)) break;
      t *= 0.5;
    }
    const double move = (next - q).lpNorm<Eigen::Infinity>();
    stalled = fn < fq - 1e-15 * (1.0 + std::abs(fq)) ? 0 : stalled + 1;
    q = std::move(next);
    fq = fn;
    if (move < 1e-15 || stalled >= 50) break;
    t *= 1.25;
  }
  return q;
}

void simplex_grid(Index n, int resolution, Vector& current, Index pos, int remaining, std::vector<Vector>& out) {
  if (pos == n - 1) {
    current[pos] = static_cast<double>(remaining) / resolution;
    out.push_back(current);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    current[pos] = static_cast<double>(k) / resolution;
    simplex_grid(n, resolution, current, pos + 1, remaining - k, out);
  }
}

}  // namespace

InnerSolution primal_inner_brute_force(const Vector& f, const Vector& p, double delta, const PhiDivergence& d) {
  check_inputs(f, p);
  if (f.size() > kBruteForceMaxAtoms)
    throw InvalidArgument("primal_inner_brute_force: at most " + std::to_string(kBruteForceMaxAtoms) + " atoms");
  if (delta == 0.0 || !std::isfinite(delta)) throw InvalidArgument("primal_inner_brute_force: delta must be nonzero");
  const Index n = f.size();
  PrimalObjective obj{f, p, delta, d};

  std::vector<Vector> starts;
  starts.push_back(p);
  for (Index i = 0; i < n; ++i) starts.push_back(Vector::Unit(n, i));
  if (n <= 4) {
    std::vector<Vector> grid;
    Vector cur(n);
    simplex_grid(n, 20, cur, 0, 20, grid);
    auto best = std::min_element(grid.begin(), grid.end(),
                                 [&](const Vector& a, const Vector& b) { return obj.value(a) < obj.value(b); });
    starts.push_back(*best);
  }
  CounterRng rng(0x5eed0bad1dea5ULL);
  for (int k = 0; k < 16; ++k) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.exponential(1.0);
    starts.push_back(v / v.sum());
  }

  Vector best_q = p;
  double best_val = kInfinity;
  for (auto& s : starts) {
    Vector q = projected_gradient(obj, s);
    const double v = obj.value(q);
    if (v < best_val) {
      best_val = v;
      best_q = q;
    }
  }
  InnerSolution sol;
  sol.c = kNaN;
  sol.value = obj.sign() * best_val;
  sol.active_clip = (best_q.array() <= 0.0).any();
  sol.q = finish_weights(best_q, sol.residual);
  return sol;
}

InnerSolution primal_inner_brute_force(const RewardModel& model, const EmpiricalSample& sample, VectorRef x,
                                       double delta, const PhiDivergence& d) {
  return primal_inner_brute_force(reward_values(model, sample, x), sample.weights(), delta, d);
}

Chi2Value chi2_inner_sorted(std::span<const double> f, std::span<const double> p, double delta) {
  const auto n = static_cast<Index>(f.size());
  if (delta == 0.0) {
    double m = 0.0;
    for (Index i = 0; i < n; ++i) m += p[i] * f[i];
    return {m, -m, 0, n};
  }
  // Active set is a contiguous block of the sorted rewards: a prefix for
  // delta > 0, a suffix for delta < 0. Take the largest block whose boundary
  // atom keeps a positive weight; earlier blocks are then automatically valid.
  Index begin = 0, end = n;
  double mass = 0.0, first = 0.0;
  for (Index i = 0; i < n; ++i) {
    mass += p[i];
    first += p[i] * f[i];
  }
  double excluded = 0.0;
  double c = 0.0;
  for (;;) {
    // sum_{active} p_i (1 - delta (f_i + c)) = 1 solved for c.
    c = -first / mass - excluded / (delta * mass);
    const Index edge = delta > 0.0 ? end - 1 : begin;
    if (1.0 - delta * (f[edge] + c) > 0.0 || end - begin == 1) break;
    mass -= p[edge];
    first -= p[edge] * f[edge];
    excluded += p[edge];
    if (delta > 0.0) --end;
    else ++begin;
  }
  double value = 0.0;
  for (Index i = begin; i < end; ++i) {
    const double u = f[i] + c;
    value += p[i] * ((1.0 - delta * u) * f[i] + 0.5 * delta * u * u);
  }
  value += 0.5 * excluded / delta;
  return {value, c, begin, end};
}

InnerSolution tilted_distribution_chi2(const Vector& p, const Vector& f, double delta) {
  check_inputs(f, p);
  InnerSolution sol;
  if (delta == 0.0) {
    sol.value = p.dot(f);
    sol.c = -sol.value;
    sol.q = DiscreteDistribution(p);
    return sol;
  }
  const Index n = f.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return f[a] < f[b]; });
  // Ties are broken by index: among equal rewards the later index is the more
  // extreme one for delta > 0, and the earlier one for delta < 0. Equal
  // rewards are never split by the active set, so this only fixes the order.
  std::vector<double> fs(static_cast<std::size_t>(n)), ps(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    fs[static_cast<std::size_t>(k)] = f[order[static_cast<std::size_t>(k)]];
    ps[static_cast<std::size_t>(k)] = p[order[static_cast<std::size_t>(k)]];
  }
  const Chi2Value cv = chi2_inner_sorted(fs, ps, delta);
  Vector q = Vector::Zero(n);
  for (Index k = cv.active_begin; k < cv.active_end; ++k) {
    const Index i = order[static_cast<std::size_t>(k)];
    q[i] = p[i] * (1.0 - delta * (f[i] + cv.c));
  }
  sol.c = cv.c;
  sol.value = cv.value;
  sol.active_clip = cv.active_end - cv.active_begin < n;
  sol.q = finish_weights(std::move(q), sol.residual);
  return sol;
}

DiscreteDistribution sensitivity_distribution(const Vector& p, const Vector& f, double epsilon,
                                              const PhiDivergence& d) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw InvalidArgument("sensitivity_distribution: epsilon must be finite and nonnegative");
  if (epsilon == 0.0) return DiscreteDistribution(p);
  if (d.kind == DivergenceKind::modified_chi2) return tilted_distribution_chi2(p, f, epsilon).q;
  return dual_inner_value(f, p, epsilon, d).q;
}

}  // namespace drdoo
