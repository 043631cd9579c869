#include "population.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "rng.hpp"

namespace drdoo {

void gauss_hermite(int nodes, Vector& abscissae, Vector& weights) {
  if (nodes < 1) throw InvalidArgument("gauss_hermite: need at least one node");
  Matrix jacobi = Matrix::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  abscissae = eig.eigenvalues();
  weights = eig.eigenvectors().row(0).transpose().array().square();
  weights /= weights.sum();
}

GaussianPopulation::GaussianPopulation(Vector mean, Vector sd, int nodes_per_axis)
    : mean_(std::move(mean)), sd_(std::move(sd)), nodes_(nodes_per_axis) {
  if (mean_.size() == 0 || mean_.size() != sd_.size())
    throw InvalidArgument("gaussian population: mean and sd must have equal nonzero length");
  if ((sd_.array() < 0.0).any()) throw InvalidArgument("gaussian population: sd must be nonnegative");
}

EmpiricalSample GaussianPopulation::draw(Index n, std::uint64_t seed) const {
  if (n < 1) throw InvalidArgument("draw: n must be at least 1");
  CounterRng rng(seed);
  Matrix pts(mean_.size(), n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < mean_.size(); ++j) pts(j, i) = mean_[j] + sd_[j] * rng.normal();
  }
  return EmpiricalSample::uniform(std::move(pts));
}

std::optional<EmpiricalSample> GaussianPopulation::quadrature() const {
  const Index l = mean_.size();
  int m = nodes_;
  // Keep the tensor grid below ~2e4 atoms.
  while (l > 1 && std::pow(static_cast<double>(m), static_cast<double>(l)) > 2e4 && m > 3) --m;
  Vector z, w;
  gauss_hermite(m, z, w);
  Index total = 1;
  for (Index j = 0; j < l; ++j) total *= m;
  Matrix pts(l, total);
  Vector wts(total);
  for (Index k = 0; k < total; ++k) {
    Index rem = k;
    double wk = 1.0;
    for (Index j = 0; j < l; ++j) {
      const Index a = rem % m;
      rem /= m;
      pts(j, k) = mean_[j] + sd_[j] * z[a];
      wk *= w[a];
    }
    wts[k] = wk;
  }
  // Gauss-Hermite weights in the far tails underflow; drop exact zeros.
  std::vector<Index> keep;
  for (Index k = 0; k < total; ++k)
    if (wts[k] > 0.0) keep.push_back(k);
  Matrix p2(l, static_cast<Index>(keep.size()));
  Vector w2(static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    p2.col(static_cast<Index>(j)) = pts.col(keep[j]);
    w2[static_cast<Index>(j)] = wts[keep[j]];
  }
  w2 /= w2.sum();
  return EmpiricalSample(std::move(p2), std::move(w2));
}

DiscretePopulation::DiscretePopulation(Matrix values, Vector probs)
    : values_(std::move(values)), probs_(std::move(probs)) {
  // Reuse the sample validation: positive weights summing to one.
  EmpiricalSample check(values_, probs_);
  probs_ = check.weights();
  cumulative_.resize(probs_.size());
  double acc = 0.0;
  for (Index i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    cumulative_[i] = acc;
  }
  cumulative_[probs_.size() - 1] = 1.0;
}

EmpiricalSample DiscretePopulation::draw(Index n, std::uint64_t seed) const {
  if (n < 1) throw InvalidArgument("draw: n must be at least 1");
  CounterRng rng(seed);
  Matrix pts(values_.rows(), n);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const auto* it = std::upper_bound(cumulative_.data(), cumulative_.data() + cumulative_.size(), u);
    Index k = static_cast<Index>(it - cumulative_.data());
    if (k >= probs_.size()) k = probs_.size() - 1;
    pts.col(i) = values_.col(k);
  }
  return EmpiricalSample::uniform(std::move(pts));
}

std::optional<EmpiricalSample> DiscretePopulation::quadrature() const { return EmpiricalSample(values_, probs_); }

void DemandMixtureParams::validate() const {
  if (!std::isfinite(m)) throw InvalidArgument("demand: m must be finite");
  if (!(mu1 > 0.0) || !(mu2 > 0.0) || !std::isfinite(mu1) || !std::isfinite(mu2))
    throw InvalidArgument("demand: exponential means must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("demand: p must lie in [0, 1]");
}

DemandMixture::DemandMixture(DemandMixtureParams params) : params_(params) { params_.validate(); }

EmpiricalSample DemandMixture::draw(Index n, std::uint64_t seed) const { return sample_demand(params_, n, seed); }

EmpiricalSample sample_demand(const DemandMixtureParams& params, Index n, std::uint64_t seed) {
  params.validate();
  if (n < 1) throw InvalidArgument("sample_demand: n must be at least 1");
  CounterRng rng(seed);
  Matrix pts(1, n);
  for (Index i = 0; i < n; ++i) {
    const bool up = rng.bernoulli(params.p);
    const double z = up ? params.m + rng.exponential(params.mu1) : params.m - rng.exponential(params.mu2);
    pts(0, i) = std::max(z, 0.0);
  }
  return EmpiricalSample::uniform(std::move(pts));
}

namespace {

// int_0^u t^j (1/mu) exp(-t/mu) dt for j = 0, 1, 2 and u in [0, inf].
double exp_partial(int j, double u, double mu) {
  if (u <= 0.0) return 0.0;
  if (std::isinf(u)) return j == 0 ? 1.0 : (j == 1 ? mu : 2.0 * mu * mu);
  const double e = std::exp(-u / mu);
  switch (j) {
    case 0:
      return -std::expm1(-u / mu);
    case 1:
      return mu - (u + mu) * e;
    default:
      return 2.0 * mu * mu - (u * u + 2.0 * mu * u + 2.0 * mu * mu) * e;
  }
}

// E[(m + sign U)^k 1{U in (u1, u2]}] for U ~ Exp(mu).
double shifted_moment(int k, double m, double sign, double mu, double u1, double u2) {
  u1 = std::max(u1, 0.0);
  if (!(u2 > u1)) return 0.0;
  const double g0 = exp_partial(0, u2, mu) - exp_partial(0, u1, mu);
  if (k == 0) return g0;
  const double g1 = exp_partial(1, u2, mu) - exp_partial(1, u1, mu);
  if (k == 1) return m * g0 + sign * g1;
  const double g2 = exp_partial(2, u2, mu) - exp_partial(2, u1, mu);
  return m * m * g0 + 2.0 * sign * m * g1 + g2;
}

}  // namespace

double DemandMixture::atom_at_zero() const {
  const auto& pr = params_;
  const double up = pr.m < 0.0 ? exp_partial(0, -pr.m, pr.mu1) : 0.0;
  const double down = pr.m > 0.0 ? std::exp(-pr.m / pr.mu2) : 1.0;
  return pr.p * up + (1.0 - pr.p) * down;
}

double DemandMixture::partial_moment(int k, double a, double b) const {
  if (k < 0 || k > 2) throw InvalidArgument("partial_moment: k must be 0, 1 or 2");
  if (!(b > a)) return 0.0;
  const auto& pr = params_;
  double total = 0.0;
  if (k == 0 && a < 0.0 && b >= 0.0) total += atom_at_zero();
  // Continuous part lives on Y = Z > 0.
  const double lo = std::max(a, 0.0);
  if (b > lo) {
    // Z = m + U on (lo, b]  <=>  U in (lo - m, b - m].
    total += pr.p * shifted_moment(k, pr.m, 1.0, pr.mu1, lo - pr.m, b - pr.m);
    // Z = m - U on (lo, b]  <=>  U in [m - b, m - lo); the endpoint has no mass.
    total += (1.0 - pr.p) * shifted_moment(k, pr.m, -1.0, pr.mu2, pr.m - b, pr.m - lo);
  }
  return total;
}

double DemandMixture::mean() const { return partial_moment(1, -kInfinity, kInfinity); }

double DemandMixture::variance() const {
  const double m1 = mean();
  return partial_moment(2, -kInfinity, kInfinity) - m1 * m1;
}

double DemandMixture::cdf(double y) const {
  if (y < 0.0) return 0.0;
  return partial_moment(0, -kInfinity, y);
}

double DemandMixture::quantile(double level) const {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("quantile: level must lie in (0, 1)");
  if (cdf(0.0) >= level) return 0.0;
  double lo = 0.0;
  double hi = std::max(1.0, params_.m);
  while (cdf(hi) < level) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= level) hi = mid;
    else lo = mid;
  }
  return hi;
}

PopulationMoments inventory_reward_moments(const InventoryParams& inv, const DemandMixture& demand, double x) {
  // f = (r - q) Y + (q - c) x  on Y <= x,   f = (r - c + s) x - s Y  on Y > x.
  const double a1 = inv.r - inv.q, b1 = (inv.q - inv.c) * x;
  const double a2 = -inv.s, b2 = (inv.r - inv.c + inv.s) * x;
  double lower[3], upper[3];
  for (int k = 0; k < 3; ++k) {
    lower[k] = demand.partial_moment(k, -kInfinity, x);
    upper[k] = demand.partial_moment(k, x, kInfinity);
  }
  const double mean = a1 * lower[1] + b1 * lower[0] + a2 * upper[1] + b2 * upper[0];
  const double second = a1 * a1 * lower[2] + 2.0 * a1 * b1 * lower[1] + b1 * b1 * lower[0] + a2 * a2 * upper[2] +
                        2.0 * a2 * b2 * upper[1] + b2 * b2 * upper[0];
  return {mean, std::max(second - mean * mean, 0.0)};
}

PopulationMoments population_reward_moments(const RewardModel& model, const Population& population, VectorRef x) {
  const auto* inv = dynamic_cast<const InventoryReward*>(&model);
  const auto* mix = dynamic_cast<const DemandMixture*>(&population);
  if (inv != nullptr && mix != nullptr) return inventory_reward_moments(inv->params(), *mix, x[0]);
  auto rule = population.quadrature();
  if (!rule)
    throw Unavailable("no closed-form expectation for model '" + model.name() + "' under population '" +
                      population.name() + "'; use a Monte-Carlo estimate");
  const auto st = reward_statistics(model, *rule, x);
  return {st.mean, st.variance};
}

double population_expected_reward(const RewardModel& model, const Population& population, VectorRef x) {
  return population_reward_moments(model, population, x).mean;
}

}  // namespace drdoo
