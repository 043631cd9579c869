#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "reward_model.hpp"

namespace drdoo {

/// Data-generating distribution P. Draws are deterministic in the seed.
class Population {
 public:
  virtual ~Population() = default;

  virtual std::string name() const = 0;
  virtual Index outcome_dim() const noexcept = 0;
  virtual EmpiricalSample draw(Index n, std::uint64_t seed) const = 0;

  /// Weighted atoms reproducing expectations under P: exact for finite
  /// support, Gauss-Hermite for Gaussians. Empty when no rule is available.
  virtual std::optional<EmpiricalSample> quadrature() const { return std::nullopt; }
};

using PopulationPtr = std::shared_ptr<const Population>;

/// Independent normal components with the given means and standard deviations.
class GaussianPopulation final : public Population {
 public:
  GaussianPopulation(Vector mean, Vector sd, int nodes_per_axis = 24);

  std::string name() const override { return "gaussian"; }
  Index outcome_dim() const noexcept override { return mean_.size(); }
  EmpiricalSample draw(Index n, std::uint64_t seed) const override;
  std::optional<EmpiricalSample> quadrature() const override;

  const Vector& mean() const noexcept { return mean_; }
  const Vector& sd() const noexcept { return sd_; }

 private:
  Vector mean_;
  Vector sd_;
  int nodes_;
};

/// Finite support: atoms are the columns of `values`, with probabilities `probs`.
class DiscretePopulation final : public Population {
 public:
  DiscretePopulation(Matrix values, Vector probs);

  std::string name() const override { return "discrete"; }
  Index outcome_dim() const noexcept override { return values_.rows(); }
  EmpiricalSample draw(Index n, std::uint64_t seed) const override;
  std::optional<EmpiricalSample> quadrature() const override;

 private:
  Matrix values_;
  Vector probs_;
  Vector cumulative_;
};

/// Y = max{m + I X1 - (1 - I) X2, 0} with X1 ~ Exp(mean mu1), X2 ~ Exp(mean
/// mu2) and I ~ Bernoulli(p), all independent.
struct DemandMixtureParams {
  double m = 250.0;
  double mu1 = 10.0;
  double mu2 = 60.0;
  double p = 0.9;

  void validate() const;
};

class DemandMixture final : public Population {
 public:
  explicit DemandMixture(DemandMixtureParams params);

  std::string name() const override { return "demand_mixture"; }
  Index outcome_dim() const noexcept override { return 1; }
  EmpiricalSample draw(Index n, std::uint64_t seed) const override;

  /// E[Y^k 1{a < Y <= b}] for k in {0, 1, 2}, including the atom at zero.
  double partial_moment(int k, double a, double b) const;
  double mean() const;
  double variance() const;
  double cdf(double y) const;
  /// Smallest y with cdf(y) >= level.
  double quantile(double level) const;
  /// Mass of the truncation atom P[Y = 0].
  double atom_at_zero() const;

  const DemandMixtureParams& params() const noexcept { return params_; }

 private:
  DemandMixtureParams params_;
};

/// n independent demand draws with uniform weights. Per draw the stream emits
/// one uniform for I and then one exponential for the selected branch.
EmpiricalSample sample_demand(const DemandMixtureParams& params, Index n, std::uint64_t seed);

/// E_P[f(x, Y)] and Var_P[f(x, Y)] at a fixed decision.
struct PopulationMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact population moments of the reward. The inventory model under the
/// demand mixture is integrated piecewise in closed form; any model under a
/// population with a quadrature rule is summed over the rule. Other
/// combinations throw Unavailable and callers fall back to Monte Carlo.
PopulationMoments population_reward_moments(const RewardModel& model, const Population& population, VectorRef x);

double population_expected_reward(const RewardModel& model, const Population& population, VectorRef x);

/// Closed-form inventory moments; used directly by the experiment loops.
PopulationMoments inventory_reward_moments(const InventoryParams& inv, const DemandMixture& demand, double x);

/// Gauss-Hermite nodes and weights for the standard normal (probabilists'
/// convention), by the Golub-Welsch eigenvalue method.
void gauss_hermite(int nodes, Vector& abscissae, Vector& weights);

}  // namespace drdoo
