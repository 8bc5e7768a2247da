// Command-line front end. Links only the public C API (quasi1d.h), so it
// doubles as a living example of driving the library from plain C.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "quasi1d.h"

namespace {

int fail(q1d_status status) {
  std::fprintf(stderr, "q1d: error: %s\n", q1d_last_error());
  return static_cast<int>(status);
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

struct ScenarioCloser {
  void operator()(q1d_scenario* s) const { q1d_scenario_close(s); }
};
using ScenarioHandle = std::unique_ptr<q1d_scenario, ScenarioCloser>;

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic quasi-1D condensate simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int threads = 0;

  auto* run = app.add_subcommand("run", "run a scenario and write its output bundle");
  run->add_option("config", config_path, "scenario config (or manifest) JSON file")
      ->required();
  run->add_option("-o,--output", output_dir, "output directory (overrides the config)");
  run->add_option("-t,--threads", threads, "worker threads (0 = config, then core count)");

  auto* validate = app.add_subcommand("validate", "check a config and report derived scales");
  validate->add_option("config", config_path, "scenario config JSON file")->required();

  auto* calibrate =
      app.add_subcommand("calibrate", "build or load the thermal calibration table");
  calibrate->add_option("config", config_path, "scenario config JSON file")->required();
  calibrate->add_option("-t,--threads", threads, "worker threads");

  auto* version = app.add_subcommand("version", "print the artifact version");

  CLI11_PARSE(app, argc, argv);

  if (version->parsed()) {
    std::printf("q1d %s\n", q1d_version());
    return 0;
  }

  std::string config;
  if (!read_file(config_path, config)) {
    std::fprintf(stderr, "q1d: error: cannot read %s\n", config_path.c_str());
    return static_cast<int>(Q1D_ERR_VALIDATION);
  }

  if (validate->parsed()) {
    ScenarioHandle s(q1d_scenario_open(config.c_str()));
    if (!s) return fail(Q1D_ERR_VALIDATION);
    const q1d_status st = q1d_scenario_validate(s.get());
    if (st != Q1D_OK) return fail(st);
    std::fputs(q1d_scenario_report(s.get()), stdout);
    return 0;
  }

  if (calibrate->parsed()) {
    const char* json = q1d_calibrate(config.c_str(), threads);
    if (json == nullptr) return fail(Q1D_ERR_RUNTIME);
    std::fputs(json, stdout);
    return 0;
  }

  // run
  ScenarioHandle s(q1d_scenario_open(config.c_str()));
  if (!s) return fail(Q1D_ERR_VALIDATION);
  const q1d_status st =
      q1d_scenario_run(s.get(), output_dir.empty() ? nullptr : output_dir.c_str(), threads);
  if (st != Q1D_OK && st != Q1D_ASSERTIONS_FAILED) return fail(st);
  std::fputs(q1d_scenario_summary(s.get()), stdout);
  if (st == Q1D_ASSERTIONS_FAILED) {
    std::fprintf(stderr, "q1d: physics assertions failed (bundle: %s)\n",
                 q1d_scenario_output_dir(s.get()));
    return static_cast<int>(Q1D_ASSERTIONS_FAILED);
  }
  std::fprintf(stderr, "q1d: bundle written to %s\n", q1d_scenario_output_dir(s.get()));
  return 0;
}
