#ifndef LAVREG_SCENARIO_HPP
#define LAVREG_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace lavreg {

inline constexpr const char* kVersion = "0.1.0";

/// One acceptance check evaluated during a scenario run.
struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  std::string requirement;
};

struct RunResult {
  std::string name;
  std::string out_dir;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// A scenario is a single JSON document; categories:
/// rate | bias-curve | dichotomy | distance | distance-rate | scalar-rate |
/// bias-transfer | saturation.
struct Scenario {
  nlohmann::json config;

  std::string name() const { return config.at("name").get<std::string>(); }
  std::string category() const {
    return config.at("category").get<std::string>();
  }
};

struct RunOverrides {
  std::optional<int> grid_n;
  std::optional<uint64_t> seed;
};

Scenario load_scenario(const std::string& json_path);
Scenario parse_scenario(const nlohmann::json& config);

/// Fixed suite, one scenario per claim exercised by the acceptance criteria.
std::vector<Scenario> builtin_scenarios();

const Scenario& builtin_scenario(const std::string& name);

void validate_scenario(const Scenario& s);

/// Deterministic given config + seed; writes manifest.json, report.json and
/// the requested CSVs under <out_root>/<name>/.
RunResult run_scenario(const Scenario& s, const std::string& out_root,
                       const RunOverrides& overrides = {});

/// FNV-1a over the canonical config dump.
uint64_t config_hash(const nlohmann::json& config);

/// Log-spaced grid from "max" down to "min" with "points" entries.
std::vector<double> log_grid(double max_value, double min_value, int points);

}  // namespace lavreg

#endif
