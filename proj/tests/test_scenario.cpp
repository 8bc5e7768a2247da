#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "q1d/error.hpp"
#include "q1d/scenario.hpp"

using namespace q1d;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json tiny_cooling_config(std::uint64_t seed) {
  json cfg;
  cfg["scenario"] = "cooling";
  cfg["seed"] = seed;
  cfg["threads"] = 1;
  cfg["gas"] = {{"atom_mass_kg", 1.44316060e-25}, {"scattering_length_nm", 5.2},
                {"transverse_freq_hz", 3000.0},   {"density_per_um", 50.0},
                {"temperature_nk", 60.0}};
  cfg["trap"] = {{"geometry", "box"}, {"length_um", 100.0}};
  cfg["grid"] = {{"points", 64}};
  cfg["basis"] = {{"modes", 16}};
  cfg["ensemble"] = {{"realizations", 120}};
  cfg["cooling"] = {{"steps", 4}};
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("scenario-test-out") / name;
  fs::remove_all(dir);
  return dir;
}

void expect_validation(const json& cfg, const std::string& needle) {
  try {
    validate_config(cfg.dump());
    FAIL_CHECK("expected a validation error mentioning '" << needle << "'");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                  "message was: " << e.what());
  }
}

} // namespace

TEST_SUITE("scenario") {

TEST_CASE("config validation names the offending field") {
  auto cfg = tiny_cooling_config(5);

  {
    auto c = cfg;
    c.erase("seed");
    expect_validation(c, "seed");
  }
  {
    auto c = cfg;
    c["scenario"] = "warp-drive";
    expect_validation(c, "scenario");
  }
  {
    auto c = cfg;
    c["gas"].erase("temperature_nk");
    expect_validation(c, "temperature_nk");
  }
  {
    auto c = cfg;
    c["grid"]["points"] = 32;
    expect_validation(c, "grid.points");
  }
  {
    auto c = cfg;
    c["ensemble"]["realizations"] = 50;
    expect_validation(c, "realizations");
  }
  {
    auto c = cfg;
    c["basis"]["modes"] = 40;  // >= points / 2
    expect_validation(c, "basis.modes");
  }
  {
    auto c = cfg;
    c["trap"] = {{"geometry", "ring"}};
    expect_validation(c, "trap.geometry");
  }
  {
    auto c = cfg;
    c["cooling"]["extraction_fraction"] = 1.0;
    expect_validation(c, "extraction_fraction");
  }
  {
    auto c = cfg;
    c["gas"]["density_per_um"] = -3.0;
    expect_validation(c, "density_per_um");
  }
  CHECK_THROWS_AS(validate_config("{ not json"), Error);

  // the good config passes and reports the regime
  const auto report = validate_config(cfg.dump());
  CHECK(report.find("config OK") != std::string::npos);
  CHECK(report.find("1D quasicondensate") != std::string::npos);
}

TEST_CASE("a run writes a complete, self-describing bundle") {
  const auto dir = fresh_dir("bundle");
  const auto res = run_scenario(tiny_cooling_config(11).dump(), dir.string(), 1);

  CHECK(res.output_dir == dir.string());
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "cooling_trace.csv"));

  const auto summary = json::parse(res.summary_json);
  CHECK(summary.at("schema").get<std::string>() == summary_schema);
  CHECK(summary.at("artifact_version").get<std::string>() == artifact_version);
  CHECK(summary.at("scenario").get<std::string>() == "cooling");
  CHECK(summary.at("seed").get<std::uint64_t>() == 11);
  CHECK(summary.at("assertions_passed").get<bool>() == res.assertions_passed);
  CHECK(summary.at("results").at("steps").get<std::size_t>() == 5);  // initial + 4 quenches
  CHECK(summary.at("results").contains("slope_k_per_atom"));
  CHECK(slurp(dir / "summary.json") == res.summary_json);

  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("artifact_version").get<std::string>() == artifact_version);
  CHECK(manifest.at("config_hash") == summary.at("config_hash"));
  // the embedded config is fully resolved: defaults are spelled out
  CHECK(manifest.at("config").at("cooling").at("extraction_fraction").get<double>() == 0.25);

  // the CSV announces its provenance in comments
  const auto csv = slurp(dir / "cooling_trace.csv");
  CHECK(csv.find("# artifact=q1d") != std::string::npos);
  CHECK(csv.find("# seed=11") != std::string::npos);
  CHECK(csv.find("step,atom_number,temperature_nk") != std::string::npos);
}

TEST_CASE("feeding a manifest back reproduces the bundle bit for bit") {
  const auto dir_a = fresh_dir("roundtrip-a");
  const auto res_a = run_scenario(tiny_cooling_config(23).dump(), dir_a.string(), 1);

  const auto dir_b = fresh_dir("roundtrip-b");
  const auto res_b = run_scenario(slurp(dir_a / "manifest.json"), dir_b.string(), 1);

  CHECK(res_a.summary_json == res_b.summary_json);
  CHECK(slurp(dir_a / "cooling_trace.csv") == slurp(dir_b / "cooling_trace.csv"));
}

TEST_CASE("results do not depend on the thread count") {
  const auto dir_1 = fresh_dir("threads-1");
  const auto dir_3 = fresh_dir("threads-3");
  const auto res_1 = run_scenario(tiny_cooling_config(31).dump(), dir_1.string(), 1);
  const auto res_3 = run_scenario(tiny_cooling_config(31).dump(), dir_3.string(), 3);
  CHECK(res_1.summary_json == res_3.summary_json);
  CHECK(slurp(dir_1 / "cooling_trace.csv") == slurp(dir_3 / "cooling_trace.csv"));

  // and reruns at the same seed are bit-identical too
  const auto dir_r = fresh_dir("threads-r");
  const auto res_r = run_scenario(tiny_cooling_config(31).dump(), dir_r.string(), 1);
  CHECK(res_r.summary_json == res_1.summary_json);

  // while a different seed genuinely changes the draw
  const auto dir_s = fresh_dir("threads-s");
  const auto res_s = run_scenario(tiny_cooling_config(32).dump(), dir_s.string(), 1);
  CHECK(res_s.summary_json != res_1.summary_json);
}

} // TEST_SUITE
