// Experiment harness CLI. Links the C API only.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lavreg.h"

namespace {

struct CheckCounter {
  int total = 0;
  int failed = 0;
};

void print_check(const char* scenario, const char* check, int pass,
                 double observed, const char* required, void* ctx) {
  auto* counter = static_cast<CheckCounter*>(ctx);
  counter->total++;
  if (!pass) counter->failed++;
  std::printf("%s  %s / %s: observed %.6g, required %s\n",
              pass ? "PASS" : "FAIL", scenario, check, observed, required);
}

int finish(int status, const CheckCounter& counter, int all_pass) {
  if (status != LAVREG_OK) {
    std::fprintf(stderr, "error: %s (%s)\n", lavreg_last_error(),
                 lavreg_status_name(status));
    return 2;
  }
  std::printf("%d checks, %d failed\n", counter.total, counter.failed);
  return all_pass ? 0 : 1;
}

int export_operator(const std::string& spec, const std::string& out_dir,
                    int grid_n) {
  lavreg_grid* grid = nullptr;
  int rc = lavreg_grid_uniform(grid_n, &grid);
  if (rc != LAVREG_OK) {
    std::fprintf(stderr, "error: %s\n", lavreg_last_error());
    return 2;
  }
  lavreg_operator* op = nullptr;
  std::string name = spec;
  if (spec == "volterra")
    rc = lavreg_operator_volterra(grid, &op);
  else if (spec == "cesaro")
    rc = lavreg_operator_cesaro(grid, &op);
  else if (spec == "skew")
    rc = lavreg_operator_skew(&op);
  else if (spec == "identity")
    rc = lavreg_operator_identity(grid, &op);
  else if (spec.rfind("multiplication:", 0) == 0) {
    std::string multiplier = spec.substr(std::string("multiplication:").size());
    rc = lavreg_operator_multiplication(grid, multiplier.c_str(), &op);
    name = "multiplication-" + multiplier;
  } else {
    std::fprintf(stderr,
                 "error: unknown operator spec '%s'\n"
                 "expected volterra | cesaro | skew | identity | "
                 "multiplication:<t|one-plus-t|exp-inv-sqrt|one>\n",
                 spec.c_str());
    lavreg_grid_free(grid);
    return 2;
  }
  if (rc == LAVREG_OK) {
    std::string csv = out_dir + "/" + name + ".csv";
    std::string json = out_dir + "/" + name + ".json";
    rc = lavreg_operator_export(op, csv.c_str(), json.c_str());
    if (rc == LAVREG_OK)
      std::printf("wrote %s and %s\n", csv.c_str(), json.c_str());
  }
  if (rc != LAVREG_OK)
    std::fprintf(stderr, "error: %s (%s)\n", lavreg_last_error(),
                 lavreg_status_name(rc));
  lavreg_operator_free(op);
  lavreg_grid_free(grid);
  return rc == LAVREG_OK ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lavreg: Lavrentiev regularization experiments for monotone operator "
      "equations"};
  app.set_version_flag("--version", std::string(lavreg_version()));
  app.fallthrough();  // accept --out/--grid-n/--seed after the subcommand

  std::string out_dir = "out";
  int grid_n = 0;
  std::int64_t seed = -1;
  app.add_option("--out", out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--grid-n", grid_n,
                 "override the scenario grid size (0 = keep)");
  app.add_option("--seed", seed, "override the noise seed (< 0 = keep)");

  std::string scenario_path, scenario_spec;
  CLI::App* run = app.add_subcommand("run", "run a scenario JSON file");
  run->add_option("scenario", scenario_path, "path to scenario.json")
      ->required();

  CLI::App* suite = app.add_subcommand("suite", "run all builtin scenarios");

  CLI::App* list = app.add_subcommand("list", "list builtin scenarios");

  CLI::App* exp =
      app.add_subcommand("export-operator", "export an operator matrix");
  exp->add_option("spec", scenario_spec,
                  "volterra | cesaro | skew | identity | "
                  "multiplication:<name>")
      ->required();

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    const int count = lavreg_scenario_count();
    char buf[128];
    for (int i = 0; i < count; ++i) {
      if (lavreg_scenario_name(i, buf, sizeof(buf)) == LAVREG_OK)
        std::printf("%s\n", buf);
    }
    return 0;
  }
  if (exp->parsed()) {
    return export_operator(scenario_spec, out_dir, grid_n > 0 ? grid_n : 1000);
  }

  CheckCounter counter;
  int all_pass = 0;
  int rc;
  if (run->parsed()) {
    rc = lavreg_run_scenario_file(scenario_path.c_str(), out_dir.c_str(),
                                  grid_n, seed, print_check, &counter,
                                  &all_pass);
  } else {
    rc = lavreg_run_suite(out_dir.c_str(), grid_n, seed, print_check, &counter,
                          &all_pass);
  }
  (void)suite;
  return finish(rc, counter, all_pass);
}
