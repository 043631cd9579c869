#include "reproduce.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "errors.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace drdoo {

namespace fs = std::filesystem;

namespace {

nlohmann::json config_echo(const ExperimentConfig& config) {
  nlohmann::json echo = nlohmann::json::object();
  std::istringstream in(config.canonical_text());
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    echo[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return echo;
}

std::string prepare_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory '" + out_dir + "'");
  return out_dir;
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

nlohmann::json curve_files(const CurveEstimate& c, const std::string& dir, std::vector<std::string>& paths) {
  const bool with_se = !c.std_error.empty();
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < c.delta_grid.size(); ++k) {
    std::vector<double> row{c.delta_grid[k], c.mean_curve[k]};
    if (with_se) row.push_back(c.std_error[k]);
    rows.push_back(std::move(row));
  }
  std::vector<std::string> header{"delta", "mean"};
  if (with_se) header.emplace_back("std_error");
  const std::string path = join(dir, "figure1_curve.csv");
  write_csv(path, header, rows);
  paths.push_back(path);
  return {{"argmax_delta", c.argmax_delta}, {"argmax_value", c.argmax_value}, {"replicates", c.replicates},
          {"excluded", c.excluded}, {"exclusion_rate", c.exclusion_rate}};
}

nlohmann::json frontier_files(const FrontierEstimate& f, const std::string& figure, const std::string& dir,
                              std::vector<std::string>& paths) {
  const std::size_t m = f.delta_grid.size();
  auto emit = [&](const std::string& name, const std::vector<std::string>& header, auto&& row_of) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < m; ++k) rows.push_back(row_of(k));
    const std::string path = join(dir, name);
    write_csv(path, header, rows);
    paths.push_back(path);
  };
  const bool all = figure == "all";
  if (all || figure == "fig2a")
    emit("figure2a_sensitivity.csv", {"delta", "sensitivity", "std_error"}, [&](std::size_t k) {
      return std::vector<double>{f.delta_grid[k], f.sensitivity[k], f.sensitivity_std_error[k]};
    });
  if (all || figure == "fig2b")
    emit("figure2b_insample_frontier.csv", {"delta", "in_sample_mean", "sensitivity"}, [&](std::size_t k) {
      return std::vector<double>{f.delta_grid[k], f.in_sample_mean[k], f.sensitivity[k]};
    });
  if (all || figure == "fig2c")
    emit("figure2c_oos_frontier.csv", {"delta", "out_of_sample_mean", "out_of_sample_variance"},
         [&](std::size_t k) {
           return std::vector<double>{f.delta_grid[k], f.out_of_sample_mean[k], f.out_of_sample_variance[k]};
         });
  const auto best = static_cast<std::size_t>(argmax_smallest_delta(f.delta_grid, f.out_of_sample_mean));
  return {{"replicates", f.replicates},
          {"excluded", f.excluded},
          {"exclusion_rate", f.exclusion_rate},
          {"out_of_sample_argmax_delta", f.delta_grid[best]},
          {"out_of_sample_argmax_variance", f.out_of_sample_variance[best]}};
}

nlohmann::json bootstrap_files(const BootstrapSummary& b, const std::string& dir, std::vector<std::string>& paths) {
  std::vector<std::vector<double>> rows;
  const auto used = static_cast<double>(b.estimates.size());
  for (std::size_t k = 0; k < b.histogram_delta.size(); ++k) {
    const auto count = static_cast<double>(b.histogram_count[k]);
    rows.push_back({b.histogram_delta[k], count, count / used});
  }
  const std::string path = join(dir, "figure2d_bootstrap_hist.csv");
  write_csv(path, {"delta", "count", "fraction"}, rows);
  paths.push_back(path);
  return {{"mean", b.mean},
          {"sd", b.sd},
          {"skewness", b.skewness},
          {"reference_sign", b.reference_sign},
          {"fraction_correct_sign", b.fraction_correct_sign},
          {"datasets_used", b.estimates.size()},
          {"excluded", b.excluded},
          {"exclusion_rate", b.exclusion_rate},
          {"evaluation_measure", "train on each resample, score on the original dataset"}};
}

}  // namespace

const std::vector<std::string>& known_figures() {
  static const std::vector<std::string> figures{"fig1", "fig2a", "fig2b", "fig2c", "fig2d", "all"};
  return figures;
}

nlohmann::json reproduce_figure(const ExperimentConfig& config, const std::string& figure,
                                const std::string& out_dir, int jobs) {
  const auto& figs = known_figures();
  if (std::find(figs.begin(), figs.end(), figure) == figs.end())
    throw InvalidArgument("reproduce: unknown figure '" + figure + "'");
  const auto start = std::chrono::steady_clock::now();
  const std::string dir = prepare_dir(out_dir);
  MonteCarloSpec spec = make_spec(config, jobs);
  std::vector<std::string> paths;
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();
  auto timed = [&](const char* name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    results[name] = fn();
    timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const bool all = figure == "all";
  if (all || figure == "fig1") timed("fig1", [&] { return curve_files(out_of_sample_curve(spec), dir, paths); });
  if (all || figure == "fig2a" || figure == "fig2b" || figure == "fig2c")
    timed("fig2abc", [&] { return frontier_files(averaged_frontiers(spec), figure, dir, paths); });
  if (all || figure == "fig2d") {
    MonteCarloSpec boot = spec;
    boot.n_datasets = config.bootstrap_datasets;
    timed("fig2d", [&] {
      return bootstrap_files(bootstrap_delta(boot, config.bootstrap_resamples, config.reference_sign), dir, paths);
    });
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& p : paths) outputs.push_back(fs::path(p).filename().string());
  nlohmann::json manifest = {
      {"tool_version", kToolVersion},
      {"subcommand", "reproduce"},
      {"figure", figure},
      {"config_hash", config.hash()},
      {"master_seed", config.master_seed},
      {"seed_scheme", "dataset r uses derive_seed(master_seed, r); bootstrap resample b of that dataset uses "
                      "derive_seed(dataset_seed, b)"},
      {"rng", CounterRng::kName},
      {"output_paths", outputs},
      {"wall_time", wall},
      {"timings", timings},
      {"results", results},
      {"config", config_echo(config)},
  };
  const std::string manifest_path = join(dir, "manifest_" + figure + ".json");
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + manifest_path + "'");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + manifest_path + "'");
  return manifest;
}

nlohmann::json solve_report(const ExperimentConfig& config, const EmpiricalSample& sample, double delta) {
  const RewardModelPtr model = config.make_model();
  const PhiDivergence d = config.make_divergence();
  const SolveResult r = solve_dro_doo(*model, sample, delta, d, config.solver);
  nlohmann::json j = to_json(r);
  j["model"] = model->name();
  j["divergence"] = d.name;
  return j;
}

nlohmann::json analyze_report(const ExperimentConfig& config, const EmpiricalSample& sample) {
  const RewardModelPtr model = config.make_model();
  const PhiDivergence d = config.make_divergence();
  nlohmann::json warnings = nlohmann::json::array();
  const SolveResult saa = solve_saa(*model, sample, config.solver);
  nlohmann::json j = {{"model", model->name()},
                      {"divergence", d.name},
                      {"n", sample.size()},
                      {"saa", to_json(saa)},
                      {"sensitivity", to_json(worst_case_sensitivity(*model, sample, saa.x, d))},
                      {"pi", nullptr},
                      {"beta", nullptr},
                      {"expansion", nullptr},
                      {"sensitivity_slope", nullptr},
                      {"sandwich", nullptr},
                      {"rho", nullptr},
                      {"optimal_delta", nullptr}};
  if (!model->is_smooth()) {
    warnings.push_back("model '" + model->name() +
                       "' is not smooth: pi, beta, sandwich, rho and optimal delta are undefined");
    j["warnings"] = warnings;
    return j;
  }
  const ExpansionSummary es = bias_direction(*model, sample, saa.x, d);
  j["pi"] = to_json(es.pi);
  j["beta"] = to_json(es.beta);
  j["expansion"] = to_json(es);
  j["sensitivity_slope"] = sensitivity_slope(es);
  j["sandwich"] = to_json(sandwich_covariance(*model, sample, saa.x, saa.c, 0.0, d));
  try {
    const PopulationPtr population = config.make_population();
    if (population->outcome_dim() != sample.outcome_dim())
      throw Unavailable("population outcome dimension differs from the sample");
    RhoOptions ro;
    ro.solver = config.solver;
    const RhoEstimate rho = rho_estimate(*model, *population, d, ro);
    j["rho"] = {{"rho", rho.rho},
                {"rho_coarse", rho.rho_coarse},
                {"rho_decomposition", rho.rho_decomposition},
                {"theta", rho.theta},
                {"jensen_trace", rho.jensen_trace},
                {"x_star", to_json(rho.x_star)},
                {"c_star", rho.c_star},
                {"population_expansion", to_json(rho.summary)},
                {"population", population->name()}};
    try {
      const OptimalDelta od = optimal_delta(rho.rho, rho.summary, sample.size());
      j["optimal_delta"] = {{"delta", od.delta}, {"improvement", od.improvement}};
    } catch (const Unavailable& e) {
      warnings.push_back(e.what());
    }
  } catch (const Unavailable& e) {
    warnings.push_back(std::string("rho unavailable: ") + e.what());
  } catch (const SolverError& e) {
    warnings.push_back(std::string("rho unavailable: ") + e.what());
  }
  j["warnings"] = warnings;
  return j;
}

}  // namespace drdoo
