#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "population.hpp"
#include "solver.hpp"

namespace drdoo {

/// Delta grid: `points_per_sign` log-spaced magnitudes in [min, max] on each
/// side of zero plus zero itself, or an explicit list (zero is added).
struct GridSpec {
  std::string kind = "log";
  double min = 1e-5;
  double max = 1e-1;
  int points_per_sign = 81;
  std::vector<double> values;

  std::vector<double> build() const;
};

struct ExperimentConfig {
  // [model]
  std::string model = "inventory";  // inventory | quadratic | exponential | constant
  Index dim = 1;
  double curvature = 1.0;
  double level = 0.0;
  InventoryParams inventory;
  // [population]
  std::string population = "demand_mixture";  // demand_mixture | gaussian | discrete
  DemandMixtureParams demand;
  std::vector<double> gaussian_mean{0.0};
  std::vector<double> gaussian_sd{1.0};
  std::vector<double> discrete_values;
  std::vector<double> discrete_probs;
  // [divergence]
  std::string divergence = "modified_chi2";
  // [experiment]
  Index n = 30;
  Index n_datasets = 5000;
  std::uint64_t master_seed = 20240601;
  // [bootstrap]
  Index bootstrap_datasets = 500;
  Index bootstrap_resamples = 50;
  /// Sign counted as correct in the bootstrap summary.
  int reference_sign = -1;
  // [grid]
  GridSpec grid;
  // [solver]
  SolverOptions solver;

  void validate() const;
  RewardModelPtr make_model() const;
  PopulationPtr make_population() const;
  PhiDivergence make_divergence() const;

  /// Every effective setting as sorted `section.key = value` lines with
  /// numbers in shortest round-trip form. Equal configs give equal text.
  std::string canonical_text() const;
  /// Hex SHA-256 of canonical_text().
  std::string hash() const;
};

/// Parses INI text. Unknown sections or keys and malformed values throw
/// ConfigError. `overrides` are `section.key=value` assignments applied on top.
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Copy of `config` with `section.key=value` assignments applied and validated.
ExperimentConfig with_overrides(const ExperimentConfig& config,
                                const std::vector<std::pair<std::string, std::string>>& overrides);

/// Reads and parses a file; unreadable files throw ConfigError.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});

std::string sha256_hex(const std::string& bytes);

}  // namespace drdoo
