#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "experiments.hpp"

namespace drdoo {

inline constexpr const char* kToolVersion = "0.3.0";

/// Figures accepted by reproduce_figure: fig1, fig2a, fig2b, fig2c, fig2d, all.
const std::vector<std::string>& known_figures();

/// Runs the study behind `figure`, writes its CSV files and a manifest
/// (manifest_<figure>.json) into `out_dir` (created if missing) and returns
/// the manifest. CSV content depends only on the config, never on `jobs`.
nlohmann::json reproduce_figure(const ExperimentConfig& config, const std::string& figure,
                                const std::string& out_dir, int jobs = 0);

/// Single solve at `delta` on `sample` as a JSON document.
nlohmann::json solve_report(const ExperimentConfig& config, const EmpiricalSample& sample, double delta);

/// Expansion and sensitivity analysis at the SAA solution of `sample`.
/// Quantities that do not exist for the model class are null and explained
/// under "warnings".
nlohmann::json analyze_report(const ExperimentConfig& config, const EmpiricalSample& sample);

}  // namespace drdoo
