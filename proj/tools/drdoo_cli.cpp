// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drdoo/drdoo.h"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kInput = 2, kSolver = 3, kOutput = 4 };

struct ConfigDeleter {
  void operator()(drdoo_config* c) const { drdoo_config_free(c); }
};
struct SampleDeleter {
  void operator()(drdoo_sample* s) const { drdoo_sample_free(s); }
};
struct StringDeleter {
  void operator()(char* s) const { drdoo_string_free(s); }
};
using ConfigHandle = std::unique_ptr<drdoo_config, ConfigDeleter>;
using SampleHandle = std::unique_ptr<drdoo_sample, SampleDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct Failure {
  int code;
};

void report(drdoo_status status, const std::string& context) {
  std::fprintf(stderr, "drdoo: %s: %s (%s)\n", context.c_str(), drdoo_last_error(), drdoo_status_name(status));
}

/// Status of a failed input step (config or sample) maps to exit 2.
void check_input(drdoo_status status, const std::string& context) {
  if (status == DRDOO_OK) return;
  report(status, context);
  throw Failure{status == DRDOO_ERR_INTERNAL ? kInternal : kInput};
}

void check_run(drdoo_status status, const std::string& context) {
  if (status == DRDOO_OK) return;
  report(status, context);
  switch (status) {
    case DRDOO_ERR_SOLVER:
    case DRDOO_ERR_UNAVAILABLE: throw Failure{kSolver};
    case DRDOO_ERR_IO: throw Failure{kOutput};
    case DRDOO_ERR_CONFIG:
    case DRDOO_ERR_INVALID_ARGUMENT: throw Failure{kInput};
    default: throw Failure{kInternal};
  }
}

ConfigHandle load_config(const std::string& path, const std::vector<std::string>& overrides) {
  drdoo_config* raw = nullptr;
  check_input(path.empty() ? drdoo_config_default(&raw) : drdoo_config_load(path.c_str(), &raw),
              path.empty() ? "default config" : "config '" + path + "'");
  ConfigHandle config(raw);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "drdoo: --set expects section.key=value, got '%s'\n", kv.c_str());
      throw Failure{kInput};
    }
    check_input(drdoo_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
                "--set " + kv);
  }
  return config;
}

SampleHandle load_sample(const std::string& path) {
  drdoo_sample* raw = nullptr;
  check_input(drdoo_sample_load(path.c_str(), &raw), "sample '" + path + "'");
  return SampleHandle(raw);
}

void print(char* raw) {
  OwnedString s(raw);
  std::fputs(s.get(), stdout);
  std::fputc('\n', stdout);
}

std::string default_out_dir() {
  const char* env = std::getenv("DRDOO_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "results";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust and optimistic optimisation with phi-divergence penalties"};
  app.set_version_flag("--version", std::string(drdoo_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "INI config file (built-in defaults when omitted)");
    cmd->add_option("--set", overrides, "Override a config entry, section.key=value (repeatable)");
  };

  double delta = 0.0;
  std::string sample_path;
  CLI::App* solve = app.add_subcommand("solve", "Solve SAA/DRO/DOO at one delta; JSON on stdout");
  solve->add_option("--delta", delta, "Penalty parameter: >0 robust, <0 optimistic, 0 SAA")->required();
  solve->add_option("--input-sample", sample_path, "Sample CSV or JSON")->required();
  add_common(solve);

  CLI::App* analyze = app.add_subcommand("analyze", "Expansion and sensitivity analysis; JSON on stdout");
  analyze->add_option("--input-sample", sample_path, "Sample CSV or JSON")->required();
  add_common(analyze);

  std::string figure;
  std::string out_dir;
  int jobs = 0;
  CLI::App* reproduce = app.add_subcommand("reproduce", "Write figure CSVs and a manifest");
  reproduce->add_option("figure", figure, "fig1, fig2a, fig2b, fig2c, fig2d or all")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2a", "fig2b", "fig2c", "fig2d", "all"}));
  add_common(reproduce);
  reproduce->add_option("--out-dir", out_dir, "Output directory (default: $DRDOO_OUT_DIR or ./results)");
  reproduce->add_option("--jobs", jobs, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    const ConfigHandle config = load_config(config_path, overrides);
    if (solve->parsed()) {
      const SampleHandle sample = load_sample(sample_path);
      char* json = nullptr;
      check_run(drdoo_solve_json(config.get(), sample.get(), delta, &json), "solve");
      print(json);
    } else if (analyze->parsed()) {
      const SampleHandle sample = load_sample(sample_path);
      char* json = nullptr;
      check_run(drdoo_analyze_json(config.get(), sample.get(), &json), "analyze");
      print(json);
    } else if (reproduce->parsed()) {
      const std::string dir = out_dir.empty() ? default_out_dir() : out_dir;
      check_run(drdoo_reproduce(config.get(), figure.c_str(), dir.c_str(), jobs, nullptr), "reproduce " + figure);
      std::fprintf(stdout, "wrote %s/manifest_%s.json\n", dir.c_str(), figure.c_str());
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kOk;
}
