#pragma once

#include <string>

namespace q1d {

inline constexpr const char* artifact_version = "1.0.0";
inline constexpr const char* summary_schema = "q1d-summary/1";

struct ScenarioResult {
  bool assertions_passed = true;
  std::string summary_json;  // same text as <bundle>/summary.json
  std::string output_dir;
};

/**
 * Parses and cross-checks a config (or a manifest from an earlier run) and
 * returns a human-readable report including the 1D-regime assessment.
 * Throws Error(validation) naming the offending field on hard errors;
 * physics warnings go into the report instead.
 */
std::string validate_config(const std::string& config_json_text);

/**
 * Runs the scenario named in the config end to end and writes the bundle
 * (manifest.json, summary.json, CSVs) under the config's output.directory,
 * or `output_dir_override` when non-empty. `threads` <= 0 defers to the
 * config, which defers to the core count. The manifest embeds the fully
 * resolved config, so feeding a manifest back reproduces the bundle
 * bit-identically at the same thread count. summary.json is written last:
 * a bundle without it is incomplete. Scenario-level physics assertions do
 * not throw; they are reported through `assertions_passed`.
 */
ScenarioResult run_scenario(const std::string& config_json_text,
                            const std::string& output_dir_override, int threads);

/**
 * Builds the thermal decay-length calibration table a prethermalization run
 * needs and stores it in the cache directory ($Q1D_CACHE_DIR, falling back
 * to ./.q1d-cache). Runs reuse a cached table whose key (gas, basis and
 * sampling settings) matches. Returns a JSON summary of the table.
 */
std::string calibrate_from_config(const std::string& config_json_text, int threads);

} // namespace q1d
