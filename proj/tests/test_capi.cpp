// Exercises the shared-library surface exactly as an external client would.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lavreg.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("lavreg_capi_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(lavreg_version()) == "0.1.0");
  CHECK(std::string(lavreg_status_name(LAVREG_OK)) == "ok");
  CHECK(std::string(lavreg_status_name(LAVREG_ERR_GRID_MISMATCH)) ==
        "grid mismatch");
}

TEST_CASE("grid lifecycle and error reporting") {
  lavreg_grid* grid = nullptr;
  CHECK(lavreg_grid_uniform(1, &grid) == LAVREG_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(lavreg_last_error()) > 0);
  CHECK(grid == nullptr);

  REQUIRE(lavreg_grid_uniform(4, &grid) == LAVREG_OK);
  CHECK(lavreg_grid_size(grid) == 4);
  double nodes[4], weights[4];
  CHECK(lavreg_grid_nodes(grid, nodes) == LAVREG_OK);
  CHECK(lavreg_grid_weights(grid, weights) == LAVREG_OK);
  CHECK(nodes[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(weights[3] == doctest::Approx(0.25).epsilon(1e-15));
  lavreg_grid_free(grid);
}

TEST_CASE("functions, inner products, csv") {
  TempDir dir("func");
  lavreg_grid* grid = nullptr;
  REQUIRE(lavreg_grid_uniform(100, &grid) == LAVREG_OK);

  lavreg_func* one = nullptr;
  REQUIRE(lavreg_func_constant(grid, 1.0, &one) == LAVREG_OK);
  double nrm = 0.0;
  CHECK(lavreg_func_norm(one, &nrm) == LAVREG_OK);
  CHECK(nrm == doctest::Approx(1.0).epsilon(1e-14));

  std::vector<double> tv(100);
  double nodes[100];
  lavreg_grid_nodes(grid, nodes);
  for (int i = 0; i < 100; ++i) tv[i] = nodes[i];
  lavreg_func* t = nullptr;
  REQUIRE(lavreg_func_create(grid, tv.data(), &t) == LAVREG_OK);
  double ip = 0.0;
  CHECK(lavreg_func_inner(t, t, &ip) == LAVREG_OK);
  CHECK(std::abs(ip - 1.0 / 3.0) <= 1e-3);

  std::string csv = (dir.path / "t.csv").string();
  CHECK(lavreg_func_write_csv(t, csv.c_str()) == LAVREG_OK);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,value");

  lavreg_func_free(one);
  lavreg_func_free(t);
  lavreg_grid_free(grid);
}

TEST_CASE("operators through the c api") {
  lavreg_grid* grid = nullptr;
  REQUIRE(lavreg_grid_uniform(200, &grid) == LAVREG_OK);

  lavreg_operator* M = nullptr;
  REQUIRE(lavreg_operator_multiplication(grid, "t", &M) == LAVREG_OK);
  CHECK(lavreg_operator_size(M) == 200);
  char label[64];
  CHECK(lavreg_operator_label(M, label, sizeof(label)) == LAVREG_OK);
  CHECK(std::string(label) == "multiplication(t)");

  lavreg_operator* bad = nullptr;
  CHECK(lavreg_operator_multiplication(grid, "nope", &bad) ==
        LAVREG_ERR_INVALID_ARGUMENT);
  CHECK(bad == nullptr);

  // resolvent solve closed form for the diagonal operator
  lavreg_func* one = nullptr;
  REQUIRE(lavreg_func_constant(grid, 1.0, &one) == LAVREG_OK);
  lavreg_func* z = nullptr;
  REQUIRE(lavreg_resolvent_solve(M, 0.1, one, &z) == LAVREG_OK);
  std::vector<double> zv(200), nodes(200);
  lavreg_func_values(z, zv.data());
  lavreg_grid_nodes(grid, nodes.data());
  for (int i = 0; i < 200; ++i)
    CHECK(zv[i] == doctest::Approx(1.0 / (nodes[i] + 0.1)).epsilon(1e-12));

  double nrm = 0.0;
  lavreg_operator* I = nullptr;
  REQUIRE(lavreg_operator_identity(grid, &I) == LAVREG_OK);
  CHECK(lavreg_resolvent_norm(I, 1.0, &nrm) == LAVREG_OK);
  CHECK(nrm == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(lavreg_contraction_norm(I, 1.0, &nrm) == LAVREG_OK);
  CHECK(nrm <= 1.0 + 1e-8);

  // fractional power of a diagonal operator exponentiates the symbol
  lavreg_func* frac = nullptr;
  REQUIRE(lavreg_fractional_power_apply(M, 0.5, one, &frac) == LAVREG_OK);
  std::vector<double> fv(200);
  lavreg_func_values(frac, fv.data());
  for (int i = 0; i < 200; ++i)
    CHECK(std::abs(fv[i] - std::sqrt(nodes[i])) <= 1e-8);

  double defect = 0.0;
  CHECK(lavreg_monotonicity_defect(M, 32, &defect) == LAVREG_OK);
  CHECK(defect >= -1e-12);

  lavreg_operator* V = nullptr;
  REQUIRE(lavreg_operator_volterra(grid, &V) == LAVREG_OK);
  const double alphas[3] = {1e-1, 1e-2, 1e-3};
  int classification = -1;
  double K = 0.0, norms[3];
  REQUIRE(lavreg_classify_posedness(V, alphas, 3, &classification, &K,
                                    norms) == LAVREG_OK);
  CHECK(classification == 1);
  for (int i = 0; i < 3; ++i) CHECK(norms[i] <= (1.0 + 1e-8) / alphas[i]);

  REQUIRE(lavreg_classify_posedness(I, alphas, 3, &classification, &K,
                                    nullptr) == LAVREG_OK);
  CHECK(classification == 0);
  CHECK(std::abs(K - 1.0) <= 0.05);

  TempDir dir("export");
  std::string csv = (dir.path / "op.csv").string();
  std::string meta = (dir.path / "op.json").string();
  CHECK(lavreg_operator_export(V, csv.c_str(), meta.c_str()) == LAVREG_OK);
  CHECK(fs::file_size(csv) > 0);
  CHECK(fs::file_size(meta) > 0);

  lavreg_func_free(one);
  lavreg_func_free(z);
  lavreg_func_free(frac);
  lavreg_operator_free(M);
  lavreg_operator_free(I);
  lavreg_operator_free(V);
  lavreg_grid_free(grid);
}

TEST_CASE("linear regularization pipeline") {
  lavreg_grid* grid = nullptr;
  REQUIRE(lavreg_grid_uniform(128, &grid) == LAVREG_OK);
  lavreg_operator* V = nullptr;
  REQUIRE(lavreg_operator_volterra(grid, &V) == LAVREG_OK);

  lavreg_func* x_true = nullptr;
  lavreg_func* x_bar = nullptr;
  REQUIRE(lavreg_func_constant(grid, 1.0, &x_true) == LAVREG_OK);
  REQUIRE(lavreg_func_constant(grid, 0.0, &x_bar) == LAVREG_OK);

  lavreg_linear_problem* P = nullptr;
  REQUIRE(lavreg_linear_problem_create(V, x_true, x_bar, &P) == LAVREG_OK);

  lavreg_noisy_data* D = nullptr;
  REQUIRE(lavreg_noisy_data_create(P, 1e-3, 42, &D) == LAVREG_OK);

  // the noise carries weighted norm exactly delta
  lavreg_func *y = nullptr, *yd = nullptr;
  REQUIRE(lavreg_linear_problem_y(P, &y) == LAVREG_OK);
  REQUIRE(lavreg_noisy_data_y(D, &yd) == LAVREG_OK);
  std::vector<double> yv(128), ydv(128);
  lavreg_func_values(y, yv.data());
  lavreg_func_values(yd, ydv.data());
  double diff2 = 0.0;
  for (int i = 0; i < 128; ++i)
    diff2 += (yv[i] - ydv[i]) * (yv[i] - ydv[i]) / 128.0;
  CHECK(std::sqrt(diff2) == doctest::Approx(1e-3).epsilon(1e-12));

  const double alpha = 1e-2;
  double bias = 0.0, gap = 0.0, total = 0.0;
  REQUIRE(lavreg_bias_linear(P, alpha, &bias) == LAVREG_OK);
  REQUIRE(lavreg_noise_propagation_gap(P, D, alpha, &gap) == LAVREG_OK);
  REQUIRE(lavreg_total_error(P, D, alpha, &total) == LAVREG_OK);
  CHECK(gap <= 1e-3 / alpha + 1e-10);
  CHECK(total <= bias + gap + 1e-10);

  lavreg_func* x = nullptr;
  REQUIRE(lavreg_regularize_linear(P, D, alpha, &x) == LAVREG_OK);
  CHECK(lavreg_func_size(x) == 128);

  const double probe[5] = {1.0, 0.5, 0.25, 0.1, 0.05};
  double liminf = 0.0;
  REQUIRE(lavreg_saturation_probe(P, probe, 5, &liminf) == LAVREG_OK);
  CHECK(liminf > 0.0);

  double a = 0.0;
  CHECK(lavreg_apriori_alpha_linear(0.01, 2.0, &a) == LAVREG_OK);
  CHECK(a == doctest::Approx(0.02));
  CHECK(lavreg_apriori_alpha_power(1e-4, 1.0, 0.5, &a) == LAVREG_OK);
  CHECK(a == doctest::Approx(0.01));
  CHECK(lavreg_apriori_alpha_power(1e-4, 1.0, 2.0, &a) ==
        LAVREG_ERR_INVALID_ARGUMENT);

  lavreg_func_free(x);
  lavreg_func_free(y);
  lavreg_func_free(yd);
  lavreg_noisy_data_free(D);
  lavreg_linear_problem_free(P);
  lavreg_func_free(x_true);
  lavreg_func_free(x_bar);
  lavreg_operator_free(V);
  lavreg_grid_free(grid);
}

TEST_CASE("distance curve api") {
  TempDir dir("dist");
  lavreg_grid* grid = nullptr;
  REQUIRE(lavreg_grid_uniform(64, &grid) == LAVREG_OK);
  lavreg_operator* C = nullptr;
  REQUIRE(lavreg_operator_cesaro(grid, &C) == LAVREG_OK);

  // Heaviside element sampled at the nodes
  std::vector<double> uv(64);
  double nodes[64];
  lavreg_grid_nodes(grid, nodes);
  for (int i = 0; i < 64; ++i) uv[i] = nodes[i] < 0.5 ? 0.0 : 1.0;
  lavreg_func* u = nullptr;
  REQUIRE(lavreg_func_create(grid, uv.data(), &u) == LAVREG_OK);

  std::vector<double> mus;
  for (int i = 0; i <= 28; ++i) mus.push_back(std::pow(10.0, 1.0 - 0.25 * i));
  lavreg_distance_curve* curve = nullptr;
  REQUIRE(lavreg_distance_function(C, u, mus.data(),
                                   static_cast<int>(mus.size()),
                                   &curve) == LAVREG_OK);
  int m = lavreg_distance_curve_size(curve);
  CHECK(m >= 10);
  std::vector<double> R(m), d(m);
  REQUIRE(lavreg_distance_curve_points(curve, nullptr, R.data(), d.data()) ==
          LAVREG_OK);
  for (int i = 1; i < m; ++i) {
    CHECK(R[i] > R[i - 1]);
    CHECK(d[i] < d[i - 1] + 1e-12);
  }

  int kind = -1;
  double exponent = 0.0, constant = 0.0, extra = 0.0, residual = 0.0;
  REQUIRE(lavreg_fit_decay(curve, &kind, &exponent, &constant, &extra,
                           &residual) == LAVREG_OK);
  CHECK(kind == 0);  // power
  CHECK(exponent < 0.0);

  double bound = 0.0;
  int rc = lavreg_bias_bound_from_distance(curve, 1e-20, &bound);
  CHECK(rc == LAVREG_ERR_OUT_OF_RANGE);

  double alpha_psi = 0.0;
  rc = lavreg_psi_parameter_choice(curve, 1e-20, &alpha_psi);
  CHECK(rc == LAVREG_ERR_OUT_OF_RANGE);

  std::string path = (dir.path / "curve.csv").string();
  CHECK(lavreg_distance_curve_write_csv(curve, path.c_str()) == LAVREG_OK);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "mu,R,d");

  lavreg_grid* fine = nullptr;
  REQUIRE(lavreg_grid_uniform(1000, &fine) == LAVREG_OK);
  double wres = 0.0, wnorm = 0.0;
  REQUIRE(lavreg_verify_cesaro_witness(fine, 5.0, &wres, &wnorm) == LAVREG_OK);
  CHECK(wres <= 1.1 / 5.0);
  CHECK(wnorm <= 5.0 * 1.01);

  lavreg_distance_curve_free(curve);
  lavreg_func_free(u);
  lavreg_operator_free(C);
  lavreg_grid_free(grid);
  lavreg_grid_free(fine);
}

namespace {
double quad_f(double x, void*) { return x * x * x; }
double quad_df(double x, void*) { return 3.0 * x * x; }
}  // namespace

TEST_CASE("nonlinear api") {
  lavreg_map* link = nullptr;
  REQUIRE(lavreg_map_power_link(1.0, &link) == LAVREG_OK);
  double fx = 0.0;
  CHECK(lavreg_map_eval_scalar(link, 0.5, &fx) == LAVREG_OK);
  CHECK(fx == doctest::Approx(0.5));
  double k0 = 0.0;
  CHECK(lavreg_map_k0_hint(link, &k0) == LAVREG_ERR_UNSUPPORTED);

  lavreg_nl_problem* P = nullptr;
  REQUIRE(lavreg_nl_problem_create_scalar(link, 0.0, 0.0, 1.0, &P) ==
          LAVREG_OK);
  double x = 0.0;
  REQUIRE(lavreg_solve_scalar(P, 1e-3, 0.1, 1e-12, &x) == LAVREG_OK);
  CHECK(x == doctest::Approx(1e-3 / 1.1).epsilon(1e-9));
  lavreg_nl_problem_free(P);
  lavreg_map_free(link);

  lavreg_map* exp_link = nullptr;
  REQUIRE(lavreg_map_exp_link(0.5, &exp_link) == LAVREG_OK);
  REQUIRE(lavreg_map_k0_hint(exp_link, &k0) == LAVREG_OK);
  lavreg_nl_problem* PE = nullptr;
  REQUIRE(lavreg_nl_problem_create_scalar(exp_link, 0.2, 0.0, 0.5, &PE) ==
          LAVREG_OK);
  double bias = 0.0;
  REQUIRE(lavreg_bias_nonlinear(PE, 1e-2, 1e-12, &bias) == LAVREG_OK);
  CHECK(bias > 0.0);
  CHECK(bias <= 0.2);

  const double alphas[4] = {1.0, 1e-1, 1e-2, 1e-3};
  double ratios[4], C = 0.0;
  REQUIRE(lavreg_bias_transfer_check(PE, k0, alphas, 4, 1e-12, ratios, &C) ==
          LAVREG_OK);
  for (int i = 0; i < 4; ++i) CHECK(ratios[i] <= C + 1e-9);
  lavreg_nl_problem_free(PE);
  lavreg_map_free(exp_link);

  lavreg_map* cubic = nullptr;
  REQUIRE(lavreg_map_custom_scalar(quad_f, quad_df, nullptr, &cubic) ==
          LAVREG_OK);
  lavreg_nl_problem* PC = nullptr;
  REQUIRE(lavreg_nl_problem_create_scalar(cubic, 0.0, 0.0, 1.0, &PC) ==
          LAVREG_OK);
  REQUIRE(lavreg_solve_scalar(PC, 1e-3, 1e-3, 1e-13, &x) == LAVREG_OK);
  CHECK(std::abs(x * x * x + 1e-3 * x - 1e-3) <= 1e-12);
  lavreg_nl_problem_free(PC);
  lavreg_map_free(cubic);

  double deltas[7], errors[7], slope = 0.0, r2 = 0.0;
  for (int i = 0; i < 7; ++i) deltas[i] = std::pow(10.0, -2.0 - 0.5 * i);
  REQUIRE(lavreg_conditional_stability_rate(2.0, deltas, 7, 1.0, errors,
                                            &slope, &r2) == LAVREG_OK);
  CHECK(std::abs(slope - 0.5) <= 0.02);
  CHECK(r2 >= 0.99);
}

TEST_CASE("rate fit api") {
  double drivers[5], errors[5];
  for (int i = 0; i < 5; ++i) {
    drivers[i] = std::pow(10.0, -1.0 - i);
    errors[i] = std::sqrt(drivers[i]);
  }
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  REQUIRE(lavreg_fit_power_rate(drivers, errors, 5, &slope, &intercept,
                                &r2) == LAVREG_OK);
  CHECK(slope == doctest::Approx(0.5).epsilon(1e-12));

  double q = 0.0, K = 0.0;
  for (int i = 0; i < 5; ++i) errors[i] = 1.0 / std::log(1.0 / drivers[i]);
  REQUIRE(lavreg_fit_log_rate(drivers, errors, 5, &q, &K, &r2) == LAVREG_OK);
  CHECK(q == doctest::Approx(1.0).epsilon(1e-9));
}

namespace {
void count_checks(const char*, const char*, int pass, double, const char*,
                  void* ctx) {
  auto* counter = static_cast<std::pair<int, int>*>(ctx);
  counter->first++;
  if (!pass) counter->second++;
}
}  // namespace

TEST_CASE("scenario api") {
  CHECK(lavreg_scenario_count() == 14);
  char buf[128];
  REQUIRE(lavreg_scenario_name(0, buf, sizeof(buf)) == LAVREG_OK);
  CHECK(std::string(buf) == "well-posed-dichotomy");
  CHECK(lavreg_scenario_name(99, buf, sizeof(buf)) ==
        LAVREG_ERR_INVALID_ARGUMENT);

  char* config = nullptr;
  REQUIRE(lavreg_scenario_config_json("scalar-kappa-1", &config) == LAVREG_OK);
  CHECK(std::string(config).find("\"kappa\"") != std::string::npos);
  lavreg_string_free(config);
  CHECK(lavreg_scenario_config_json("no-such", &config) ==
        LAVREG_ERR_INVALID_ARGUMENT);

  TempDir dir("run");
  std::pair<int, int> counter{0, 0};
  int all_pass = 0;
  REQUIRE(lavreg_run_scenario_named("scalar-kappa-1", dir.path.c_str(), 0, -1,
                                    count_checks, &counter,
                                    &all_pass) == LAVREG_OK);
  CHECK(all_pass == 1);
  CHECK(counter.first >= 3);
  CHECK(counter.second == 0);
  CHECK(fs::exists(dir.path / "scalar-kappa-1/manifest.json"));
  CHECK(fs::exists(dir.path / "scalar-kappa-1/scalar_table.csv"));

  // run a scenario from a config file
  fs::path cfg = dir.path / "custom.json";
  {
    std::ofstream out(cfg);
    REQUIRE(lavreg_scenario_config_json("scalar-kappa-2", &config) ==
            LAVREG_OK);
    out << config;
    lavreg_string_free(config);
  }
  counter = {0, 0};
  REQUIRE(lavreg_run_scenario_file(cfg.c_str(), dir.path.c_str(), 0, -1,
                                   count_checks, &counter,
                                   &all_pass) == LAVREG_OK);
  CHECK(all_pass == 1);
}
