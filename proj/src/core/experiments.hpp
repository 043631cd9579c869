#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "sensitivity.hpp"

namespace drdoo {

/// One Monte-Carlo study: datasets of size n drawn from `population`, each
/// solved over `delta_grid`. Dataset r uses seed derive_seed(master_seed, r).
struct MonteCarloSpec {
  RewardModelPtr model;
  PopulationPtr population;
  PhiDivergence divergence = modified_chi2();
  Index n = 30;
  Index n_datasets = 1;
  std::vector<double> delta_grid{0.0};
  std::uint64_t master_seed = 0;
  /// Worker threads; 0 means one per hardware thread. Results do not depend on it.
  int jobs = 0;
  SolverOptions solver;
};

MonteCarloSpec make_spec(const ExperimentConfig& config, int jobs = 0);

/// mu_n(delta) averaged over datasets.
struct CurveEstimate {
  std::vector<double> delta_grid;
  std::vector<double> mean_curve;
  /// Empty when a single replicate was used.
  std::vector<double> std_error;
  double argmax_delta = 0.0;
  double argmax_value = 0.0;
  Index replicates = 0;
  Index excluded = 0;
  double exclusion_rate = 0.0;
};

/// Per-delta averages over datasets, all at x_n(delta).
struct FrontierEstimate {
  std::vector<double> delta_grid;
  std::vector<double> in_sample_mean;
  std::vector<double> sensitivity;
  std::vector<double> sensitivity_std_error;
  std::vector<double> out_of_sample_mean;
  std::vector<double> out_of_sample_variance;
  Index replicates = 0;
  Index excluded = 0;
  double exclusion_rate = 0.0;
};

struct BootstrapSummary {
  std::vector<double> estimates;  // one argmax delta per dataset
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  int reference_sign = -1;
  double fraction_correct_sign = 0.0;
  std::vector<double> histogram_delta;  // grid values
  std::vector<Index> histogram_count;
  Index excluded = 0;
  double exclusion_rate = 0.0;
};

/// Failures beyond this fraction of replicates abort a study with SolverError.
inline constexpr double kMaxExclusionRate = 0.01;

/// Out-of-sample curve: each x_n(delta) is scored by the exact conditional
/// expectation under the population (closed form or quadrature when
/// available, otherwise a fixed large Monte-Carlo measure). Replicates with any
/// failed delta are excluded as a whole.
CurveEstimate out_of_sample_curve(const MonteCarloSpec& spec);

FrontierEstimate averaged_frontiers(const MonteCarloSpec& spec);

/// Bootstrap estimate of the best delta for each of spec.n_datasets datasets:
/// train on each of `resamples` resamples, score on the original dataset,
/// average over resamples and take the argmax over the grid.
BootstrapSummary bootstrap_delta(const MonteCarloSpec& spec, Index resamples, int reference_sign);

/// argmax over a grid with ties broken toward the smallest |delta|.
Index argmax_smallest_delta(const std::vector<double>& grid, const std::vector<double>& values);

/// Solutions at one delta for every dataset of the spec; failures are empty.
std::vector<std::optional<SolveResult>> replicate_solutions(const MonteCarloSpec& spec, double delta);

/// Scores decisions under the population: exact where possible.
class PopulationEvaluator {
 public:
  PopulationEvaluator(RewardModelPtr model, PopulationPtr population, Index mc_draws = 200000);
  PopulationMoments moments(VectorRef x) const;
  /// Whether the moments are exact (closed form or quadrature).
  bool exact() const noexcept { return exact_; }

 private:
  RewardModelPtr model_;
  PopulationPtr population_;
  const InventoryReward* inventory_ = nullptr;
  const DemandMixture* demand_ = nullptr;
  std::optional<EmpiricalSample> measure_;
  bool exact_ = true;
};

}  // namespace drdoo
