#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "errors.hpp"
#include "rng.hpp"

namespace drdoo {

namespace {

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, count). Each index writes only its own slot, so the
/// outcome is independent of the number of workers.
template <class Fn>
void parallel_for(Index count, int jobs, Fn&& fn) {
  const int workers = static_cast<int>(std::min<Index>(resolve_jobs(jobs), std::max<Index>(count, 1)));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (Index i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void validate_spec(const MonteCarloSpec& spec) {
  if (!spec.model || !spec.population) throw InvalidArgument("experiment: model and population are required");
  if (spec.n < 1 || spec.n_datasets < 1) throw InvalidArgument("experiment: n and n_datasets must be positive");
  if (spec.delta_grid.empty() || !std::is_sorted(spec.delta_grid.begin(), spec.delta_grid.end()) ||
      std::find(spec.delta_grid.begin(), spec.delta_grid.end(), 0.0) == spec.delta_grid.end())
    throw InvalidArgument("experiment: delta grid must be sorted and contain zero");
}

/// x_n(delta) over the grid. Throws on any failed delta.
std::vector<Vector> decision_path(const MonteCarloSpec& spec, const EmpiricalSample& sample) {
  std::vector<Vector> xs;
  xs.reserve(spec.delta_grid.size());
  if (!spec.model->is_smooth()) {
    ScalarPiecewiseSolver solver(*spec.model, sample, spec.divergence, spec.solver);
    for (double delta : spec.delta_grid) xs.push_back(Vector::Constant(1, solver.solve_decision(delta)));
    return xs;
  }
  const auto family = solve_family(*spec.model, sample, spec.delta_grid, spec.divergence, spec.solver);
  for (const FamilyEntry& e : family) {
    if (!e.result) throw SolverError(e.error);
    xs.push_back(e.result->x);
  }
  return xs;
}

struct PathRecord {
  bool ok = false;
  std::vector<double> oos_mean, oos_var, ins_mean, ins_sens;
};

std::vector<PathRecord> run_paths(const MonteCarloSpec& spec, bool in_sample) {
  validate_spec(spec);
  const PopulationEvaluator eval(spec.model, spec.population);
  std::vector<PathRecord> records(static_cast<std::size_t>(spec.n_datasets));
  parallel_for(spec.n_datasets, spec.jobs, [&](Index r) {
    PathRecord& rec = records[static_cast<std::size_t>(r)];
    const EmpiricalSample sample = spec.population->draw(spec.n, derive_seed(spec.master_seed, static_cast<std::uint64_t>(r)));
    std::vector<Vector> xs;
    try {
      xs = decision_path(spec, sample);
    } catch (const SolverError&) {
      return;
    }
    for (const Vector& x : xs) {
      const PopulationMoments pm = eval.moments(x);
      rec.oos_mean.push_back(pm.mean);
      rec.oos_var.push_back(pm.variance);
      if (in_sample) {
        const SensitivityReport s = worst_case_sensitivity(*spec.model, sample, x, spec.divergence);
        rec.ins_mean.push_back(s.mean_reward);
        rec.ins_sens.push_back(s.sensitivity);
      }
    }
    rec.ok = true;
  });
  return records;
}

Index count_ok(const std::vector<PathRecord>& records, double& rate) {
  Index ok = 0;
  for (const auto& r : records) ok += r.ok ? 1 : 0;
  const auto total = static_cast<Index>(records.size());
  rate = static_cast<double>(total - ok) / static_cast<double>(total);
  if (rate >= kMaxExclusionRate)
    throw SolverError("experiment: " + std::to_string(total - ok) + " of " + std::to_string(total) +
                      " replicates failed to solve; exclusion rate too high");
  return ok;
}

/// Mean and standard error per grid point over successful records.
void average(const std::vector<PathRecord>& records, std::vector<double> PathRecord::*field, std::size_t m,
             std::vector<double>& mean, std::vector<double>* se) {
  mean.assign(m, 0.0);
  if (se) se->assign(m, 0.0);
  Index used = 0;
  for (const auto& r : records) used += r.ok ? 1 : 0;
  if (used == 0) return;
  for (std::size_t k = 0; k < m; ++k) {
    CompensatedSum s;
    for (const auto& r : records)
      if (r.ok) s.add((r.*field)[k]);
    mean[k] = s.value() / static_cast<double>(used);
    if (se && used > 1) {
      CompensatedSum v;
      for (const auto& r : records)
        if (r.ok) {
          const double d = (r.*field)[k] - mean[k];
          v.add(d * d);
        }
      (*se)[k] = std::sqrt(v.value() / static_cast<double>(used - 1) / static_cast<double>(used));
    }
  }
}

}  // namespace

PopulationEvaluator::PopulationEvaluator(RewardModelPtr model, PopulationPtr population, Index mc_draws)
    : model_(std::move(model)), population_(std::move(population)) {
  inventory_ = dynamic_cast<const InventoryReward*>(model_.get());
  demand_ = dynamic_cast<const DemandMixture*>(population_.get());
  if (inventory_ != nullptr && demand_ != nullptr) return;
  measure_ = population_->quadrature();
  if (!measure_) {
    exact_ = false;
    measure_ = population_->draw(mc_draws, 0x5eed);
  }
}

PopulationMoments PopulationEvaluator::moments(VectorRef x) const {
  if (inventory_ != nullptr && demand_ != nullptr) return inventory_reward_moments(inventory_->params(), *demand_, x[0]);
  const Vector f = reward_values(*model_, *measure_, x);
  const Vector& p = measure_->weights();
  const double mean = p.dot(f);
  return {mean, p.dot((f.array() - mean).square().matrix())};
}

MonteCarloSpec make_spec(const ExperimentConfig& config, int jobs) {
  MonteCarloSpec s;
  s.model = config.make_model();
  s.population = config.make_population();
  s.divergence = config.make_divergence();
  s.n = config.n;
  s.n_datasets = config.n_datasets;
  s.delta_grid = config.grid.build();
  s.master_seed = config.master_seed;
  s.jobs = jobs;
  s.solver = config.solver;
  return s;
}

Index argmax_smallest_delta(const std::vector<double>& grid, const std::vector<double>& values) {
  if (grid.empty() || grid.size() != values.size()) throw InvalidArgument("argmax: grid and values differ in length");
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (values[k] > values[best] || (values[k] == values[best] && std::abs(grid[k]) < std::abs(grid[best])))
      best = k;
  }
  return static_cast<Index>(best);
}

CurveEstimate out_of_sample_curve(const MonteCarloSpec& spec) {
  const auto records = run_paths(spec, false);
  CurveEstimate c;
  c.delta_grid = spec.delta_grid;
  c.replicates = count_ok(records, c.exclusion_rate);
  c.excluded = spec.n_datasets - c.replicates;
  const std::size_t m = spec.delta_grid.size();
  average(records, &PathRecord::oos_mean, m, c.mean_curve, c.replicates > 1 ? &c.std_error : nullptr);
  const Index k = argmax_smallest_delta(c.delta_grid, c.mean_curve);
  c.argmax_delta = c.delta_grid[static_cast<std::size_t>(k)];
  c.argmax_value = c.mean_curve[static_cast<std::size_t>(k)];
  return c;
}

FrontierEstimate averaged_frontiers(const MonteCarloSpec& spec) {
  const auto records = run_paths(spec, true);
  FrontierEstimate f;
  f.delta_grid = spec.delta_grid;
  f.replicates = count_ok(records, f.exclusion_rate);
  f.excluded = spec.n_datasets - f.replicates;
  const std::size_t m = spec.delta_grid.size();
  average(records, &PathRecord::ins_mean, m, f.in_sample_mean, nullptr);
  average(records, &PathRecord::ins_sens, m, f.sensitivity, &f.sensitivity_std_error);
  average(records, &PathRecord::oos_mean, m, f.out_of_sample_mean, nullptr);
  average(records, &PathRecord::oos_var, m, f.out_of_sample_variance, nullptr);
  return f;
}

BootstrapSummary bootstrap_delta(const MonteCarloSpec& spec, Index resamples, int reference_sign) {
  validate_spec(spec);
  if (resamples < 2) throw InvalidArgument("bootstrap: at least two resamples are required");
  const std::size_t m = spec.delta_grid.size();
  std::vector<std::optional<double>> picks(static_cast<std::size_t>(spec.n_datasets));
  parallel_for(spec.n_datasets, spec.jobs, [&](Index r) {
    const std::uint64_t seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(r));
    const EmpiricalSample data = spec.population->draw(spec.n, seed);
    std::vector<CompensatedSum> score(m);
    std::vector<Index> idx(static_cast<std::size_t>(spec.n));
    try {
      for (Index b = 0; b < resamples; ++b) {
        CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        for (auto& i : idx) i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(spec.n)));
        const EmpiricalSample boot = data.resample(idx);
        const std::vector<Vector> xs = decision_path(spec, boot);
        for (std::size_t k = 0; k < m; ++k)
          score[k].add(data.weights().dot(reward_values(*spec.model, data, xs[k])));
      }
    } catch (const SolverError&) {
      return;
    }
    std::vector<double> avg(m);
    for (std::size_t k = 0; k < m; ++k) avg[k] = score[k].value() / static_cast<double>(resamples);
    picks[static_cast<std::size_t>(r)] = spec.delta_grid[static_cast<std::size_t>(argmax_smallest_delta(spec.delta_grid, avg))];
  });

  BootstrapSummary s;
  s.reference_sign = reference_sign;
  for (const auto& p : picks)
    if (p) s.estimates.push_back(*p);
  const auto total = static_cast<Index>(picks.size());
  s.excluded = total - static_cast<Index>(s.estimates.size());
  s.exclusion_rate = static_cast<double>(s.excluded) / static_cast<double>(total);
  if (s.exclusion_rate >= kMaxExclusionRate)
    throw SolverError("bootstrap: " + std::to_string(s.excluded) + " of " + std::to_string(total) +
                      " datasets failed to solve; exclusion rate too high");
  const auto used = static_cast<double>(s.estimates.size());
  CompensatedSum sum;
  Index correct = 0;
  for (double e : s.estimates) {
    sum.add(e);
    if ((reference_sign < 0 && e < 0.0) || (reference_sign > 0 && e > 0.0)) ++correct;
  }
  s.mean = sum.value() / used;
  CompensatedSum m2, m3;
  for (double e : s.estimates) {
    const double d = e - s.mean;
    m2.add(d * d);
    m3.add(d * d * d);
  }
  s.sd = used > 1 ? std::sqrt(m2.value() / (used - 1.0)) : 0.0;
  const double pop_var = m2.value() / used;
  s.skewness = pop_var > 0.0 ? (m3.value() / used) / std::pow(pop_var, 1.5) : 0.0;
  s.fraction_correct_sign = static_cast<double>(correct) / used;
  s.histogram_delta = spec.delta_grid;
  s.histogram_count.assign(m, 0);
  for (double e : s.estimates) {
    const auto it = std::lower_bound(spec.delta_grid.begin(), spec.delta_grid.end(), e);
    ++s.histogram_count[static_cast<std::size_t>(it - spec.delta_grid.begin())];
  }
  return s;
}

std::vector<std::optional<SolveResult>> replicate_solutions(const MonteCarloSpec& spec, double delta) {
  if (!spec.model || !spec.population) throw InvalidArgument("experiment: model and population are required");
  std::vector<std::optional<SolveResult>> out(static_cast<std::size_t>(spec.n_datasets));
  parallel_for(spec.n_datasets, spec.jobs, [&](Index r) {
    const EmpiricalSample sample = spec.population->draw(spec.n, derive_seed(spec.master_seed, static_cast<std::uint64_t>(r)));
    try {
      out[static_cast<std::size_t>(r)] = solve_dro_doo(*spec.model, sample, delta, spec.divergence, spec.solver);
    } catch (const SolverError&) {
    }
  });
  return out;
}

}  // namespace drdoo
