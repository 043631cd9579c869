#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "errors.hpp"
#include "io.hpp"

namespace drdoo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("config: " + key + ": expected a finite number, got '" + text + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("config: " + key + ": expected an integer, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  for (std::string tok; in >> tok;) out.push_back(parse_double(key, tok));
  return out;
}

std::string word(const std::string& text) { return trim(text); }

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v[i]);
  return s;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define DRDOO_NUM(path, member)                                                         \
  {                                                                                     \
    path, {                                                                             \
      [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(path, v); }, \
          [](const ExperimentConfig& c) { return format_number(c.member); }             \
    }                                                                                   \
  }
#define DRDOO_INT(path, member, type)                                                        \
  {                                                                                          \
    path, {                                                                                  \
      [](ExperimentConfig& c, const std::string& v) { c.member = parse_int<type>(path, v); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.member); }                 \
    }                                                                                        \
  }
#define DRDOO_WORD(path, member)                                                \
  {                                                                             \
    path, {                                                                     \
      [](ExperimentConfig& c, const std::string& v) { c.member = word(v); },    \
          [](const ExperimentConfig& c) { return c.member; }                    \
    }                                                                           \
  }
#define DRDOO_LIST(path, member)                                                         \
  {                                                                                      \
    path, {                                                                              \
      [](ExperimentConfig& c, const std::string& v) { c.member = parse_list(path, v); }, \
          [](const ExperimentConfig& c) { return list_text(c.member); }                  \
    }                                                                                    \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      DRDOO_WORD("model.kind", model),
      DRDOO_INT("model.dim", dim, Index),
      DRDOO_NUM("model.curvature", curvature),
      DRDOO_NUM("model.level", level),
      DRDOO_NUM("inventory.r", inventory.r),
      DRDOO_NUM("inventory.c", inventory.c),
      DRDOO_NUM("inventory.s", inventory.s),
      DRDOO_NUM("inventory.q", inventory.q),
      DRDOO_WORD("population.kind", population),
      DRDOO_LIST("population.mean", gaussian_mean),
      DRDOO_LIST("population.sd", gaussian_sd),
      DRDOO_LIST("population.values", discrete_values),
      DRDOO_LIST("population.probs", discrete_probs),
      DRDOO_NUM("demand.m", demand.m),
      DRDOO_NUM("demand.mu1", demand.mu1),
      DRDOO_NUM("demand.mu2", demand.mu2),
      DRDOO_NUM("demand.p", demand.p),
      DRDOO_WORD("divergence.name", divergence),
      DRDOO_INT("experiment.n", n, Index),
      DRDOO_INT("experiment.n_datasets", n_datasets, Index),
      DRDOO_INT("experiment.master_seed", master_seed, std::uint64_t),
      DRDOO_INT("bootstrap.datasets", bootstrap_datasets, Index),
      DRDOO_INT("bootstrap.resamples", bootstrap_resamples, Index),
      DRDOO_INT("bootstrap.reference_sign", reference_sign, int),
      DRDOO_WORD("grid.kind", grid.kind),
      DRDOO_NUM("grid.min", grid.min),
      DRDOO_NUM("grid.max", grid.max),
      DRDOO_INT("grid.points_per_sign", grid.points_per_sign, int),
      DRDOO_LIST("grid.values", grid.values),
      DRDOO_NUM("solver.residual_tolerance", solver.residual_tolerance),
      DRDOO_INT("solver.max_newton_iterations", solver.max_newton_iterations, int),
      DRDOO_INT("solver.max_homotopy_halvings", solver.max_homotopy_halvings, int),
      DRDOO_NUM("solver.golden_tolerance", solver.golden_tolerance),
  };
  return table;
}

#undef DRDOO_NUM
#undef DRDOO_INT
#undef DRDOO_WORD
#undef DRDOO_LIST

void assign(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second.set(c, value);
}

}  // namespace

std::vector<double> GridSpec::build() const {
  std::vector<double> g;
  if (kind == "log") {
    if (!(min > 0.0) || !(max >= min) || points_per_sign < 1)
      throw ConfigError("grid: need 0 < min <= max and points_per_sign >= 1");
    for (int k = 0; k < points_per_sign; ++k) {
      const double t = points_per_sign == 1 ? 0.0 : static_cast<double>(k) / (points_per_sign - 1);
      const double mag = std::pow(10.0, std::log10(min) + t * (std::log10(max) - std::log10(min)));
      g.push_back(mag);
      g.push_back(-mag);
    }
  } else if (kind == "explicit") {
    g = values;
  } else {
    throw ConfigError("grid.kind: expected 'log' or 'explicit', got '" + kind + "'");
  }
  g.push_back(0.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

void ExperimentConfig::validate() const {
  try {
    if (model == "inventory") {
      inventory.validate();
    } else if (model == "quadratic") {
      if (!(curvature > 0.0)) throw ConfigError("model.curvature must be positive");
    } else if (model != "exponential" && model != "constant") {
      throw ConfigError("model.kind: unknown model '" + model + "'");
    }
    if (dim < 1) throw ConfigError("model.dim must be at least 1");
    if ((model == "inventory" || model == "exponential") && dim != 1)
      throw ConfigError("model.dim must be 1 for scalar models");
    if (population == "demand_mixture") {
      demand.validate();
    } else if (population == "gaussian") {
      if (gaussian_mean.empty() || gaussian_mean.size() != gaussian_sd.size())
        throw ConfigError("population.mean and population.sd must be nonempty and of equal length");
    } else if (population == "discrete") {
      if (discrete_values.empty() || discrete_values.size() != discrete_probs.size())
        throw ConfigError("population.values and population.probs must be nonempty and of equal length");
    } else {
      throw ConfigError("population.kind: unknown population '" + population + "'");
    }
    if (divergence != "modified_chi2") throw ConfigError("divergence.name: only 'modified_chi2' is built in");
    if (n < 1 || n_datasets < 1 || bootstrap_datasets < 1) throw ConfigError("counts must be at least 1");
    if (bootstrap_resamples < 2) throw ConfigError("bootstrap.resamples must be at least 2");
    if (reference_sign != -1 && reference_sign != 1) throw ConfigError("bootstrap.reference_sign must be -1 or 1");
    if (!(solver.residual_tolerance > 0.0) || solver.max_newton_iterations < 1)
      throw ConfigError("solver tolerances must be positive");
    (void)grid.build();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

RewardModelPtr ExperimentConfig::make_model() const {
  if (model == "inventory") return std::make_shared<InventoryReward>(inventory);
  if (model == "quadratic") return std::make_shared<QuadraticReward>(dim, curvature);
  if (model == "exponential") return std::make_shared<ExponentialReward>();
  if (model == "constant") return std::make_shared<ConstantReward>(level, dim);
  throw ConfigError("model.kind: unknown model '" + model + "'");
}

PopulationPtr ExperimentConfig::make_population() const {
  if (population == "demand_mixture") return std::make_shared<DemandMixture>(demand);
  if (population == "gaussian") {
    const auto k = static_cast<Index>(gaussian_mean.size());
    return std::make_shared<GaussianPopulation>(Eigen::Map<const Vector>(gaussian_mean.data(), k),
                                                Eigen::Map<const Vector>(gaussian_sd.data(), k));
  }
  if (population == "discrete") {
    const auto k = static_cast<Index>(discrete_values.size());
    return std::make_shared<DiscretePopulation>(Eigen::Map<const Matrix>(discrete_values.data(), 1, k),
                                                Eigen::Map<const Vector>(discrete_probs.data(), k));
  }
  throw ConfigError("population.kind: unknown population '" + population + "'");
}

PhiDivergence ExperimentConfig::make_divergence() const {
  if (divergence == "modified_chi2") return modified_chi2();
  throw ConfigError("divergence.name: only 'modified_chi2' is built in");
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
  return out;
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical_text()); }

ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) assign(c, section + "." + key, value.data());
  }
  for (const auto& [key, value] : overrides) assign(c, key, value);
  c.validate();
  return c;
}

ExperimentConfig with_overrides(const ExperimentConfig& config,
                                const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig c = config;
  for (const auto& [key, value] : overrides) assign(c, key, value);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

}  // namespace drdoo
