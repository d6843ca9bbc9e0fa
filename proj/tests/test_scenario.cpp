#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "errors.hpp"
#include "scenario.hpp"

using namespace lavreg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

nlohmann::json small_rate_config(uint64_t seed) {
  return nlohmann::json{
      {"name", "tiny-benchmark"},
      {"category", "rate"},
      {"grid_n", 64},
      {"operator", {{"kind", "volterra"}}},
      {"solution", {{"kind", "source"}, {"p", 1.0}, {"w", "smooth"}}},
      {"x_bar", {{"kind", "zero"}}},
      {"noise",
       {{"deltas", {{"max", 1e-2}, {"min", 1e-4}, {"points", 5}}},
        {"seed", seed}}},
      {"rule", {{"kind", "power"}, {"c", 1.0}, {"theta", 0.5}}},
      {"checks",
       {{"slope_target", 0.5}, {"slope_tol", 0.5}, {"r2_min", 0.0}}}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("lavreg_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("builtin suite enumerates one scenario per claim") {
  auto all = builtin_scenarios();
  CHECK(all.size() == 14);
  std::set<std::string> names;
  for (const auto& s : all) names.insert(s.name());
  const std::set<std::string> expected = {
      "well-posed-dichotomy",    "volterra-benchmark",
      "volterra-holder-p0.25",   "volterra-holder-p0.5",
      "mult-closed-form-bias",   "mult-log",
      "cesaro-heaviside-distance", "cesaro-heaviside-rate",
      "scalar-kappa-0.5",        "scalar-kappa-1",
      "scalar-kappa-2",          "scalar-kappa-3",
      "exp-bias-transfer",       "saturation-probe"};
  CHECK(names == expected);
  CHECK_THROWS_AS(builtin_scenario("no-such"), Error);
  CHECK(builtin_scenario("mult-log").category() == "rate");
}

TEST_CASE("scenario validation") {
  nlohmann::json bad = small_rate_config(1);
  bad["grid_n"] = 8;
  CHECK_THROWS_AS(parse_scenario(bad), Error);

  bad = small_rate_config(1);
  bad["category"] = "mystery";
  CHECK_THROWS_AS(parse_scenario(bad), Error);

  bad = small_rate_config(1);
  bad["solution"]["p"] = 1.5;
  CHECK_THROWS_AS(parse_scenario(bad), Error);

  bad = small_rate_config(1);
  bad["noise"]["deltas"] = {1e-2, 1e-2, 1e-4};
  CHECK_THROWS_AS(parse_scenario(bad), Error);
}

TEST_CASE("identical config and seed reproduce byte-identical tables") {
  TempDir dir("repro");
  Scenario s = parse_scenario(small_rate_config(99));
  run_scenario(s, (dir.path / "a").string());
  run_scenario(s, (dir.path / "b").string());
  CHECK(slurp(dir.path / "a/tiny-benchmark/rate_table.csv") ==
        slurp(dir.path / "b/tiny-benchmark/rate_table.csv"));
  CHECK(slurp(dir.path / "a/tiny-benchmark/manifest.json") ==
        slurp(dir.path / "b/tiny-benchmark/manifest.json"));

  Scenario other = parse_scenario(small_rate_config(100));
  run_scenario(other, (dir.path / "c").string());
  CHECK(slurp(dir.path / "a/tiny-benchmark/rate_table.csv") !=
        slurp(dir.path / "c/tiny-benchmark/rate_table.csv"));
}

TEST_CASE("seed override changes outputs and the config hash") {
  TempDir dir("seed");
  Scenario s = parse_scenario(small_rate_config(99));
  RunOverrides seeded;
  seeded.seed = 100;
  run_scenario(s, (dir.path / "a").string());
  run_scenario(s, (dir.path / "b").string(), seeded);
  CHECK(slurp(dir.path / "a/tiny-benchmark/rate_table.csv") !=
        slurp(dir.path / "b/tiny-benchmark/rate_table.csv"));

  auto ma = nlohmann::json::parse(slurp(dir.path / "a/tiny-benchmark/manifest.json"));
  auto mb = nlohmann::json::parse(slurp(dir.path / "b/tiny-benchmark/manifest.json"));
  CHECK(ma["config_hash"] != mb["config_hash"]);
  CHECK(ma["version"] == kVersion);
}

TEST_CASE("manifest records inequality checks and noise seeds") {
  TempDir dir("manifest");
  Scenario s = parse_scenario(small_rate_config(7));
  RunResult result = run_scenario(s, dir.path.string());
  CHECK(result.all_pass());

  auto manifest = nlohmann::json::parse(
      slurp(dir.path / "tiny-benchmark/manifest.json"));
  REQUIRE(manifest.contains("ie_checks"));
  CHECK(manifest["ie_checks"].size() == 5);
  for (const auto& entry : manifest["ie_checks"]) CHECK(entry["pass"] == true);
  CHECK(manifest["noise_seeds"].size() == 5);
  CHECK(manifest["all_pass"] == true);
  CHECK(manifest["log_rate_interpretation"] == "decaying");

  auto report = nlohmann::json::parse(
      slurp(dir.path / "tiny-benchmark/report.json"));
  CHECK(report["regime"] == "power");
  CHECK(report["n_points"] == 5);
  CHECK(report.contains("r_squared"));
}

TEST_CASE("noise-free delta list reduces the total error to the bias") {
  TempDir dir("noisefree");
  nlohmann::json cfg{
      {"name", "noise-free"},
      {"category", "rate"},
      {"grid_n", 64},
      {"operator", {{"kind", "multiplication"}, {"multiplier", "t"}}},
      {"solution", {{"kind", "constant"}, {"value", 1.0}}},
      {"x_bar", {{"kind", "zero"}}},
      {"noise", {{"deltas", {0.0}}, {"seed", 1}}},
      {"bias_alphas", {{"max", 1.0}, {"min", 1e-3}, {"points", 13}}},
      {"rule", {{"kind", "linear"}, {"c", 1.0}}},
      {"checks", nlohmann::json::object()}};
  RunResult result = run_scenario(parse_scenario(cfg), dir.path.string());
  REQUIRE(result.checks.size() == 1);
  CHECK(result.checks[0].name == "noise-free-total-equals-bias");
  CHECK(result.checks[0].pass);
  CHECK(fs::exists(dir.path / "noise-free/bias_curve.csv"));
}

TEST_CASE("scenario file round-trip") {
  TempDir dir("file");
  fs::path cfg_path = dir.path / "scenario.json";
  {
    std::ofstream out(cfg_path);
    out << small_rate_config(5).dump(2);
  }
  Scenario s = load_scenario(cfg_path.string());
  CHECK(s.name() == "tiny-benchmark");
  RunResult result = run_scenario(s, dir.path.string());
  CHECK(result.all_pass());
  CHECK_THROWS_AS(load_scenario((dir.path / "missing.json").string()), Error);
}

TEST_CASE("config hash is stable and content-sensitive") {
  nlohmann::json a = small_rate_config(1);
  nlohmann::json b = small_rate_config(1);
  CHECK(config_hash(a) == config_hash(b));
  b["grid_n"] = 128;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("log grid hits its endpoints exactly") {
  auto grid = log_grid(1e-2, 1e-6, 9);
  CHECK(grid.size() == 9);
  CHECK(grid.front() == 1e-2);
  CHECK(grid.back() == 1e-6);
  for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
  CHECK_THROWS_AS(log_grid(1e-6, 1e-2, 9), Error);
}
