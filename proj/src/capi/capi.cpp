#include "drdoo/drdoo.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "errors.hpp"
#include "io.hpp"
#include "reproduce.hpp"

struct drdoo_config {
  drdoo::ExperimentConfig value;
};

struct drdoo_sample {
  drdoo::EmpiricalSample value;
};

namespace {

thread_local std::string g_last_error;

drdoo_status fail(drdoo_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <class Fn>
drdoo_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return DRDOO_OK;
  } catch (const drdoo::ConfigError& e) {
    return fail(DRDOO_ERR_CONFIG, e.what());
  } catch (const drdoo::SolverError& e) {
    return fail(DRDOO_ERR_SOLVER, e.what());
  } catch (const drdoo::IoError& e) {
    return fail(DRDOO_ERR_IO, e.what());
  } catch (const drdoo::Unavailable& e) {
    return fail(DRDOO_ERR_UNAVAILABLE, e.what());
  } catch (const drdoo::InvalidArgument& e) {
    return fail(DRDOO_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DRDOO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DRDOO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DRDOO_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw drdoo::InvalidArgument(what);
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* drdoo_version(void) { return drdoo::kToolVersion; }

const char* drdoo_last_error(void) { return g_last_error.c_str(); }

const char* drdoo_status_name(drdoo_status status) {
  switch (status) {
    case DRDOO_OK: return "ok";
    case DRDOO_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DRDOO_ERR_CONFIG: return "config";
    case DRDOO_ERR_SOLVER: return "solver";
    case DRDOO_ERR_IO: return "io";
    case DRDOO_ERR_UNAVAILABLE: return "unavailable";
    case DRDOO_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void drdoo_string_free(char* s) { delete[] s; }

drdoo_status drdoo_config_default(drdoo_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new drdoo_config{};
  });
}

drdoo_status drdoo_config_parse(const char* ini_text, drdoo_config** out) {
  return guarded([&] {
    require(ini_text != nullptr && out != nullptr, "null argument");
    *out = new drdoo_config{drdoo::parse_config(ini_text)};
  });
}

drdoo_status drdoo_config_load(const char* path, drdoo_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new drdoo_config{drdoo::load_config(path)};
  });
}

drdoo_status drdoo_config_set(drdoo_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "null argument");
    config->value = drdoo::with_overrides(config->value, {{key, value}});
  });
}

drdoo_status drdoo_config_hash(const drdoo_config* config, char** out_hex) {
  return guarded([&] {
    require(config != nullptr && out_hex != nullptr, "null argument");
    *out_hex = copy_string(config->value.hash());
  });
}

drdoo_status drdoo_config_canonical(const drdoo_config* config, char** out_text) {
  return guarded([&] {
    require(config != nullptr && out_text != nullptr, "null argument");
    *out_text = copy_string(config->value.canonical_text());
  });
}

void drdoo_config_free(drdoo_config* config) { delete config; }

drdoo_status drdoo_sample_create(const double* values, const double* weights, size_t n, size_t dim,
                                 drdoo_sample** out) {
  return guarded([&] {
    require(values != nullptr && out != nullptr, "null argument");
    require(n > 0 && dim > 0, "sample needs at least one point of positive dimension");
    const auto ni = static_cast<drdoo::Index>(n);
    const auto di = static_cast<drdoo::Index>(dim);
    drdoo::Matrix pts = Eigen::Map<const drdoo::Matrix>(values, di, ni);
    if (weights == nullptr) {
      *out = new drdoo_sample{drdoo::EmpiricalSample::uniform(std::move(pts))};
    } else {
      *out = new drdoo_sample{drdoo::EmpiricalSample(std::move(pts), Eigen::Map<const drdoo::Vector>(weights, ni))};
    }
  });
}

drdoo_status drdoo_sample_load(const char* path, drdoo_sample** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new drdoo_sample{drdoo::read_sample(path)};
  });
}

drdoo_status drdoo_sample_draw(const drdoo_config* config, size_t n, uint64_t seed, drdoo_sample** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "null argument");
    require(n > 0, "n must be positive");
    *out = new drdoo_sample{config->value.make_population()->draw(static_cast<drdoo::Index>(n), seed)};
  });
}

size_t drdoo_sample_size(const drdoo_sample* sample) {
  return sample == nullptr ? 0 : static_cast<size_t>(sample->value.size());
}

size_t drdoo_sample_dim(const drdoo_sample* sample) {
  return sample == nullptr ? 0 : static_cast<size_t>(sample->value.outcome_dim());
}

drdoo_status drdoo_sample_to_csv(const drdoo_sample* sample, char** out_csv) {
  return guarded([&] {
    require(sample != nullptr && out_csv != nullptr, "null argument");
    *out_csv = copy_string(drdoo::sample_to_csv(sample->value));
  });
}

void drdoo_sample_free(drdoo_sample* sample) { delete sample; }

drdoo_status drdoo_solve_json(const drdoo_config* config, const drdoo_sample* sample, double delta,
                              char** out_json) {
  return guarded([&] {
    require(config != nullptr && sample != nullptr && out_json != nullptr, "null argument");
    *out_json = copy_string(drdoo::solve_report(config->value, sample->value, delta).dump(2));
  });
}

drdoo_status drdoo_analyze_json(const drdoo_config* config, const drdoo_sample* sample, char** out_json) {
  return guarded([&] {
    require(config != nullptr && sample != nullptr && out_json != nullptr, "null argument");
    *out_json = copy_string(drdoo::analyze_report(config->value, sample->value).dump(2));
  });
}

drdoo_status drdoo_reproduce(const drdoo_config* config, const char* figure, const char* out_dir, int jobs,
                             char** out_manifest_json) {
  return guarded([&] {
    require(config != nullptr && figure != nullptr && out_dir != nullptr, "null argument");
    const nlohmann::json manifest = drdoo::reproduce_figure(config->value, figure, out_dir, jobs);
    if (out_manifest_json != nullptr) *out_manifest_json = copy_string(manifest.dump(2));
  });
}

drdoo_status drdoo_divergence_chi2(const double* q, const double* p, size_t n, double* out_value) {
  return guarded([&] {
    require(q != nullptr && p != nullptr && out_value != nullptr && n > 0, "null argument");
    const auto ni = static_cast<drdoo::Index>(n);
    *out_value = drdoo::divergence_value(drdoo::DiscreteDistribution(Eigen::Map<const drdoo::Vector>(q, ni)),
                                         drdoo::DiscreteDistribution(Eigen::Map<const drdoo::Vector>(p, ni)),
                                         drdoo::modified_chi2());
  });
}

drdoo_status drdoo_inner_value(const double* rewards, const double* weights, size_t n, double delta,
                               double* out_value, double* out_c, double* out_q) {
  return guarded([&] {
    require(rewards != nullptr && weights != nullptr && out_value != nullptr && n > 0, "null argument");
    const auto ni = static_cast<drdoo::Index>(n);
    const drdoo::Vector f = Eigen::Map<const drdoo::Vector>(rewards, ni);
    const drdoo::Vector p = Eigen::Map<const drdoo::Vector>(weights, ni);
    const drdoo::InnerSolution s = drdoo::tilted_distribution_chi2(p, f, delta);
    *out_value = s.value;
    if (out_c != nullptr) *out_c = s.c;
    if (out_q != nullptr)
      for (drdoo::Index i = 0; i < ni; ++i) out_q[i] = s.q[i];
  });
}

}  // extern "C"
