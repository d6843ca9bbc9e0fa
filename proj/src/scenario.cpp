#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "analysis.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "lavrentiev.hpp"
#include "linops.hpp"
#include "nonlinear.hpp"
#include "srcfit.hpp"

namespace lavreg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open " + path);
  out << text;
  require(out.good(), ErrorCode::io, "write failed for " + path);
}

uint64_t sub_seed(uint64_t seed, size_t index) {
  uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<double> parse_log_grid(const json& spec) {
  return log_grid(spec.at("max").get<double>(), spec.at("min").get<double>(),
                  spec.at("points").get<int>());
}

// Either {"max","min","points"} (log-spaced) or an explicit array; explicit
// arrays must be nonnegative and strictly decreasing.
std::vector<double> parse_delta_list(const json& spec) {
  if (spec.is_array()) {
    std::vector<double> out = spec.get<std::vector<double>>();
    require(!out.empty(), ErrorCode::invalid_argument, "empty delta list");
    for (size_t i = 0; i < out.size(); ++i) {
      require(out[i] >= 0.0, ErrorCode::invalid_argument,
              "deltas must be nonnegative");
      if (i > 0)
        require(out[i] < out[i - 1], ErrorCode::invalid_argument,
                "deltas must be strictly decreasing");
    }
    return out;
  }
  return parse_log_grid(spec);
}

double multiplier_by_name(const std::string& name, double t) {
  if (name == "t") return t;
  if (name == "one-plus-t") return 1.0 + t;
  if (name == "exp-inv-sqrt") return std::exp(1.0 - 1.0 / std::sqrt(t));
  if (name == "one") return 1.0;
  fail(ErrorCode::invalid_argument, "unknown multiplier '" + name + "'");
}

LinearMonotoneOperator make_operator(const json& spec, const GridPtr& grid) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "volterra") return volterra_operator(grid);
  if (kind == "cesaro") return cesaro_operator(grid);
  if (kind == "skew") return skew_example();
  if (kind == "identity") return identity_operator(grid);
  if (kind == "zero") return zero_operator(grid);
  if (kind == "multiplication") {
    const std::string m = spec.at("multiplier").get<std::string>();
    return multiplication_operator(
        grid, [m](double t) { return multiplier_by_name(m, t); },
        "multiplication(" + m + ")");
  }
  fail(ErrorCode::invalid_argument, "unknown operator kind '" + kind + "'");
}

GridFunction make_source_element(const json& spec, const GridPtr& grid,
                                 double* w_norm_out) {
  const std::string w_kind = spec.value("w", "smooth");
  GridFunction w = [&] {
    if (w_kind == "smooth")
      return sample_function(
          grid, [](double t) { return 1.0 + std::sin(2.0 * M_PI * t); });
    if (w_kind == "rough") {
      uint64_t seed = spec.value("w_seed", 7ull);
      GridFunction g(grid, detail::gaussian_vector(grid->size(), seed));
      return (1.0 / norm(g)) * g;
    }
    fail(ErrorCode::invalid_argument, "unknown source w kind '" + w_kind + "'");
  }();
  if (w_norm_out) *w_norm_out = norm(w);
  return w;
}

GridFunction make_solution(const json& spec, const GridPtr& grid,
                           const LinearMonotoneOperator& A,
                           double* w_norm_out = nullptr) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "constant")
    return constant_function(grid, spec.value("value", 1.0));
  if (kind == "heaviside") return heaviside_element(grid);
  if (kind == "values") {
    std::vector<double> v = spec.at("values").get<std::vector<double>>();
    require(static_cast<int>(v.size()) == grid->size(),
            ErrorCode::invalid_argument, "solution values length mismatch");
    return GridFunction(grid, Eigen::Map<Eigen::VectorXd>(
                                  v.data(), static_cast<long>(v.size())));
  }
  if (kind == "source") {
    const double p = spec.at("p").get<double>();
    require(p > 0.0 && p <= 1.0, ErrorCode::invalid_argument,
            "source exponent p must be in (0, 1]");
    GridFunction w = make_source_element(spec, grid, w_norm_out);
    return p == 1.0 ? A.apply(w) : fractional_power_apply(A, p, w);
  }
  fail(ErrorCode::invalid_argument, "unknown solution kind '" + kind + "'");
}

GridFunction make_x_bar(const json& spec, const GridPtr& grid) {
  const std::string kind = spec.value("kind", "zero");
  if (kind == "zero") return constant_function(grid, 0.0);
  if (kind == "constant") return constant_function(grid, spec.value("value", 0.0));
  fail(ErrorCode::invalid_argument, "unknown x_bar kind '" + kind + "'");
}

ParameterRule make_rule(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "linear") return ParameterRule::linear_rule(spec.value("c", 1.0));
  if (kind == "power")
    return ParameterRule::power_rule(spec.value("c", 1.0),
                                     spec.at("theta").get<double>());
  fail(ErrorCode::invalid_argument, "unknown rule kind '" + kind + "'");
}

struct CheckList {
  std::vector<CheckResult> checks;

  void add(const std::string& name, bool pass, double observed,
           const std::string& requirement) {
    checks.push_back({name, pass, observed, requirement});
  }
  void add_le(const std::string& name, double observed, double bound) {
    add(name, observed <= bound, observed, "<= " + fmt17(bound));
  }
  void add_ge(const std::string& name, double observed, double bound) {
    add(name, observed >= bound, observed, ">= " + fmt17(bound));
  }
  void add_within(const std::string& name, double observed, double target,
                  double tol) {
    add(name, std::abs(observed - target) <= tol, observed,
        fmt17(target) + " +- " + fmt17(tol));
  }
};

json ie_entry(const InequalityChecks& c, double tol) {
  return json{{"delta", c.delta},
              {"alpha", c.alpha},
              {"ie1_slack", c.ie1_lhs - c.ie1_rhs},
              {"ie2_slack", c.ie2_lhs - c.ie2_rhs},
              {"ie3_slack", c.ie3_lhs - c.ie3_rhs},
              {"gap", c.gap},
              {"gap_bound", c.gap_bound},
              {"equation_residual", c.equation_residual},
              {"pass", c.pass(tol)}};
}

void summarize_ie(CheckList& list, const std::vector<InequalityChecks>& ies,
                  double tol) {
  if (ies.empty()) return;
  double worst_ie = -std::numeric_limits<double>::infinity();
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (const auto& c : ies) {
    worst_ie = std::max({worst_ie, c.ie1_lhs - c.ie1_rhs,
                         c.ie2_lhs - c.ie2_rhs, c.ie3_lhs - c.ie3_rhs});
    worst_gap = std::max(worst_gap, c.gap - c.gap_bound);
  }
  list.add_le("ie-inequalities", worst_ie, tol);
  list.add_le("noise-propagation", worst_gap, tol);
}

json rate_report(const RateTable& table) {
  json report;
  report["regime"] =
      table.regime == RateTable::Regime::power ? "power" : "logarithmic";
  report["slope_or_q"] = table.fitted_slope;
  report["intercept_or_K"] = table.fitted_intercept;
  report["r_squared"] = table.r_squared;
  report["fit_range"] = {table.records.back().driver,
                         table.records.front().driver};
  report["n_points"] = table.records.size();
  report["log_rate_interpretation"] = "decaying";
  return report;
}

std::string rate_csv(const std::vector<std::array<double, 5>>& rows) {
  std::string out = "alpha,delta,bias,gap,total_error\n";
  for (const auto& r : rows) {
    out += fmt17(r[0]) + "," + fmt17(r[1]) + "," + fmt17(r[2]) + "," +
           fmt17(r[3]) + "," + fmt17(r[4]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// category runners
// ---------------------------------------------------------------------------

struct RunContext {
  const Scenario& s;
  fs::path dir;
  json manifest;
  CheckList list;
};

void run_rate(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const int n = cfg.at("grid_n").get<int>();
  GridPtr grid = make_uniform_grid(n);
  LinearMonotoneOperator A = make_operator(cfg.at("operator"), grid);

  double w_norm = 0.0;
  GridFunction x_true = make_solution(cfg.at("solution"), grid, A, &w_norm);
  GridFunction x_bar = make_x_bar(cfg.value("x_bar", json{{"kind", "zero"}}), grid);
  LinearProblem P = make_linear_problem(A, x_true, x_bar);

  const json& noise = cfg.at("noise");
  std::vector<double> deltas = parse_delta_list(noise.at("deltas"));
  const uint64_t seed = noise.at("seed").get<uint64_t>();

  // Noise-free runs tabulate the bias curve over an explicit alpha grid and
  // verify that the total error coincides with it.
  if (deltas.size() == 1 && deltas.front() == 0.0) {
    std::vector<double> alphas = parse_log_grid(cfg.at("bias_alphas"));
    NoisyData clean = make_noisy_data(P, 0.0, seed);
    double worst = 0.0;
    std::string csv = "alpha,delta,bias,gap,total_error\n";
    for (double a : alphas) {
      double bias = bias_linear(P, a);
      double total = total_error(P, clean, a);
      worst = std::max(worst, std::abs(total - bias));
      csv += fmt17(a) + ",0," + fmt17(bias) + ",0," + fmt17(total) + "\n";
    }
    write_text((ctx.dir / "bias_curve.csv").string(), csv);
    ctx.list.add_le("noise-free-total-equals-bias", worst, 1e-9);
    write_text((ctx.dir / "report.json").string(),
               json{{"noise_free", true}, {"max_total_vs_bias", worst}}.dump(2) +
                   "\n");
    return;
  }
  require(deltas.back() > 0.0, ErrorCode::invalid_argument,
          "rate scenario: zero deltas are only supported as the single-entry "
          "noise-free list {0}");
  ParameterRule rule = make_rule(cfg.at("rule"));

  // Grid-resolution floor: the zero-noise control probe measures how much of
  // the 1/alpha amplification the grid actually realizes on noise-like data;
  // once it saturates, smaller deltas only flatten the observed errors.
  json excluded = json::array();
  if (noise.value("grid_floor", false)) {
    const double threshold = noise.value("grid_floor_threshold", 0.7);
    GridFunction probe(grid, detail::gaussian_vector(grid->size(), 0xF100Full));
    probe = (1.0 / norm(probe)) * probe;
    std::vector<double> kept;
    json floor_log = json::array();
    for (double d : deltas) {
      const double a = apriori_alpha(d, rule);
      const double realized = a * norm(resolvent_solve(P.A, a, probe));
      floor_log.push_back({{"delta", d}, {"realized_amplification", realized}});
      if (realized >= threshold)
        kept.push_back(d);
      else
        excluded.push_back(d);
    }
    ctx.manifest["grid_floor_threshold"] = threshold;
    ctx.manifest["grid_floor_probe"] = floor_log;
    deltas = std::move(kept);
  }
  ctx.manifest["deltas_excluded"] = excluded;
  require(deltas.size() >= 3, ErrorCode::invalid_argument,
          "rate scenario: fewer than 3 usable deltas after the grid floor");

  std::vector<std::array<double, 5>> rows;
  std::vector<RateRecord> records;
  std::vector<InequalityChecks> ies;
  json noise_seeds = json::array();
  for (size_t i = 0; i < deltas.size(); ++i) {
    const double delta = deltas[i];
    const double alpha = apriori_alpha(delta, rule);
    const uint64_t ds = sub_seed(seed, i);
    noise_seeds.push_back({{"delta", delta}, {"seed", ds}});
    NoisyData D = make_noisy_data(P, delta, ds);
    InequalityChecks c = check_inequalities(P, D, alpha);
    double bias = bias_linear(P, alpha);
    double total = total_error(P, D, alpha);
    ies.push_back(c);
    rows.push_back({alpha, delta, bias, c.gap, total});
    records.push_back({delta, total});
  }
  ctx.manifest["noise_seeds"] = noise_seeds;

  RateTable table = make_rate_table(records);
  const json& checks = cfg.at("checks");
  const std::string expected_regime = checks.value("expected_regime", "power");
  ctx.list.add("regime",
               (table.regime == RateTable::Regime::power ? "power"
                                                         : "logarithmic") ==
                   expected_regime,
               table.regime == RateTable::Regime::power ? 0.0 : 1.0,
               "regime == " + expected_regime);
  ctx.list.add_within("rate-slope", table.fitted_slope,
                      checks.at("slope_target").get<double>(),
                      checks.at("slope_tol").get<double>());
  ctx.list.add_ge("rate-r2", table.r_squared, checks.value("r2_min", 0.98));

  if (checks.value("benchmark_bounds", false)) {
    require(w_norm > 0.0, ErrorCode::invalid_argument,
            "benchmark_bounds needs a source-type solution");
    // B(alpha)/alpha in [||u|| / (||A|| + alpha), ||w||] on the bias grid.
    std::vector<double> alphas = parse_log_grid(cfg.at("bias_alphas"));
    BiasCurve bias_curve = tabulate_bias(P, alphas);
    double a_norm = operator_norm(P.A);
    double u_norm = norm(P.x_true - P.x_bar);
    double worst_upper = 0.0;
    double worst_lower = std::numeric_limits<double>::infinity();
    std::string csv = "alpha,delta,bias,gap,total_error\n";
    for (size_t i = 0; i < alphas.size(); ++i) {
      double ratio = bias_curve.values[i] / alphas[i];
      worst_upper = std::max(worst_upper, ratio / w_norm);
      double lower =
          u_norm / (a_norm * (1.0 + 1e-6) + alphas[i]) - 1e-8;
      worst_lower = std::min(worst_lower, ratio - lower);
      csv += fmt17(alphas[i]) + ",0," + fmt17(bias_curve.values[i]) + ",0," +
             fmt17(bias_curve.values[i]) + "\n";
    }
    write_text((ctx.dir / "bias_curve.csv").string(), csv);
    ctx.list.add_le("benchmark-ratio-upper", worst_upper, 1.0 + 1e-8);
    ctx.list.add_ge("benchmark-ratio-lower-slack", worst_lower, 0.0);
  }

  if (checks.contains("fractional_oracle_p")) {
    const double p = checks.at("fractional_oracle_p").get<double>();
    GridFunction one = constant_function(grid, 1.0);
    GridFunction fp = fractional_power_apply(P.A, p, one);
    GridFunction oracle = sample_function(grid, [p](double t) {
      return std::pow(t, p) / std::tgamma(p + 1.0);
    });
    ctx.list.add_le("fractional-oracle", norm(fp - oracle),
                    checks.value("fractional_oracle_tol", 1e-3));
  }

  summarize_ie(ctx.list, ies, 1e-9);
  json ie_json = json::array();
  for (const auto& c : ies) ie_json.push_back(ie_entry(c, 1e-9));
  ctx.manifest["ie_checks"] = ie_json;
  ctx.manifest["tolerances"] = {{"ie_tol", 1e-9}};

  write_text((ctx.dir / "rate_table.csv").string(), rate_csv(rows));
  json report = rate_report(table);
  write_text((ctx.dir / "report.json").string(), report.dump(2) + "\n");
}

void run_bias_curve(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const int n = cfg.at("grid_n").get<int>();
  GridPtr grid = make_uniform_grid(n);
  LinearMonotoneOperator A = make_operator(cfg.at("operator"), grid);
  GridFunction x_true = make_solution(cfg.at("solution"), grid, A);
  GridFunction x_bar = make_x_bar(cfg.value("x_bar", json{{"kind", "zero"}}), grid);
  LinearProblem P = make_linear_problem(A, x_true, x_bar);

  std::vector<double> alphas = parse_log_grid(cfg.at("alphas"));
  BiasCurve curve = tabulate_bias(P, alphas);

  const json& checks = cfg.at("checks");
  require(checks.at("closed_form").get<std::string>() ==
              "sqrt(alpha/(1+alpha))",
          ErrorCode::invalid_argument, "unknown closed form");
  const double rel_tol = checks.at("rel_tol").get<double>();

  double max_dev = 0.0;
  double smallest_ok = std::numeric_limits<double>::quiet_NaN();
  std::string csv = "alpha,delta,bias,gap,total_error\n";
  for (size_t i = 0; i < alphas.size(); ++i) {
    const double exact = std::sqrt(alphas[i] / (1.0 + alphas[i]));
    const double dev = std::abs(curve.values[i] - exact) / exact;
    max_dev = std::max(max_dev, dev);
    csv += fmt17(alphas[i]) + ",0," + fmt17(curve.values[i]) + ",0," +
           fmt17(curve.values[i]) + "\n";
  }
  // Diagnostic: the largest prefix of small alphas violating the tolerance.
  for (size_t i = 0; i < alphas.size(); ++i) {  // alphas decreasing
    size_t j = alphas.size() - 1 - i;
    const double exact = std::sqrt(alphas[j] / (1.0 + alphas[j]));
    if (std::abs(curve.values[j] - exact) / exact > rel_tol) break;
    smallest_ok = alphas[j];
  }
  write_text((ctx.dir / "bias_curve.csv").string(), csv);
  ctx.list.add_le("closed-form-bias", max_dev, rel_tol);

  json report{{"max_rel_deviation", max_dev},
              {"rel_tol", rel_tol},
              {"smallest_alpha_meeting_tol", smallest_ok},
              {"alpha_range", {alphas.back(), alphas.front()}}};
  write_text((ctx.dir / "report.json").string(), report.dump(2) + "\n");
}

void run_dichotomy(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const int n = cfg.at("grid_n").get<int>();
  GridPtr grid = make_uniform_grid(n);
  std::vector<double> alphas = cfg.at("alphas").get<std::vector<double>>();

  std::string csv = "operator,alpha,resolvent_norm\n";
  json entries = json::array();
  for (const json& entry : cfg.at("entries")) {
    LinearMonotoneOperator A = make_operator(entry.at("operator"), grid);
    PosednessReport report = classify_posedness(A, alphas);
    const bool ill =
        report.classification == PosednessReport::Classification::ill_posed;
    const std::string expect = entry.at("expect").get<std::string>();
    ctx.list.add("classify-" + A.label(), ill == (expect == "ill"),
                 ill ? 1.0 : 0.0, "classification == " + expect);
    if (expect == "well") {
      ctx.list.add_within("K-" + A.label(), report.K,
                          0.5 * (entry.at("k_min").get<double>() +
                                 entry.at("k_max").get<double>()),
                          0.5 * (entry.at("k_max").get<double>() -
                                 entry.at("k_min").get<double>()));
    }
    double worst = 0.0;
    for (const auto& [a, nrm] : report.resolvent_norms) {
      csv += A.label() + "," + fmt17(a) + "," + fmt17(nrm) + "\n";
      worst = std::max(worst, nrm * a);
    }
    ctx.list.add_le("resolvent-bound-" + A.label(), worst, 1.0 + 1e-8);
    entries.push_back({{"operator", A.label()},
                       {"classification", ill ? "ill_posed" : "well_posed"},
                       {"K", report.K},
                       {"ceiling", report.ceiling < 1e300 ? json(report.ceiling)
                                                          : json("inf")},
                       {"smallest_resolvable_alpha",
                        report.smallest_resolvable_alpha}});
  }
  write_text((ctx.dir / "posedness.csv").string(), csv);
  write_text((ctx.dir / "report.json").string(),
             json{{"entries", entries}}.dump(2) + "\n");
}

void run_distance(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const int n = cfg.at("grid_n").get<int>();
  GridPtr grid = make_uniform_grid(n);
  LinearMonotoneOperator A = make_operator(cfg.at("operator"), grid);
  require(cfg.at("element").get<std::string>() == "heaviside",
          ErrorCode::invalid_argument, "distance scenario: unknown element");
  GridFunction u = heaviside_element(grid);

  std::vector<double> mus = parse_log_grid(cfg.at("mus"));
  DistanceCurve curve = distance_function(A, u, mus);
  write_csv(curve, (ctx.dir / "distance_curve.csv").string());

  const json& checks = cfg.at("checks");
  const double r_lo = checks.at("r_lo").get<double>();
  const double r_hi = checks.at("r_hi").get<double>();
  double coverage = curve.radii.back();
  ctx.list.add_ge("curve-covers-R", coverage, r_hi);
  double worst_kr = 0.0;
  for (size_t i = 0; i < curve.size(); ++i)
    if (curve.radii[i] >= r_lo && curve.radii[i] <= r_hi)
      worst_kr = std::max(worst_kr, curve.distances[i] * curve.radii[i]);
  ctx.list.add_le("distance-bound", worst_kr, checks.at("kr_bound").get<double>());

  DecayModel model = fit_decay(curve);
  ctx.list.add("decay-kind", model.kind == DecayModel::Kind::power,
               model.kind == DecayModel::Kind::power ? 0.0 : 1.0,
               "power decay selected");
  ctx.list.add_within("power-exponent", model.exponent,
                      checks.at("exponent_target").get<double>(),
                      checks.at("exponent_tol").get<double>());
  ctx.list.add_within("implied-p", model.implied_p,
                      checks.at("p_target").get<double>(),
                      checks.at("p_tol").get<double>());

  const double witness_R = checks.at("witness_R").get<double>();
  WitnessReport witness = verify_cesaro_witness(grid, witness_R);
  ctx.list.add_le("witness-residual", witness.residual,
                  checks.at("kr_bound").get<double>() / witness_R);
  ctx.list.add_le("witness-norm", witness.witness_norm,
                  witness_R * (1.0 + checks.value("witness_norm_slack", 0.01)));
  // The sweep optimum at the witness's radius must beat the explicit witness.
  double d_at_R = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i + 1 < curve.size(); ++i) {
    if (curve.radii[i] <= witness_R && witness_R <= curve.radii[i + 1]) {
      double s = (std::log(witness_R) - std::log(curve.radii[i])) /
                 (std::log(curve.radii[i + 1]) - std::log(curve.radii[i]));
      d_at_R = std::exp(std::log(curve.distances[i]) +
                        s * (std::log(curve.distances[i + 1]) -
                             std::log(curve.distances[i])));
      break;
    }
  }
  ctx.list.add_le("witness-dominated", d_at_R, witness.residual + 1e-10);

  json model_json{{"kind", model.kind == DecayModel::Kind::power
                               ? "power"
                               : (model.kind == DecayModel::Kind::logarithmic
                                      ? "logarithmic"
                                      : "benchmark")},
                  {"exponent", model.exponent},
                  {"constant", model.constant},
                  {"implied_p", model.implied_p},
                  {"fit_range", {model.fit_range_min, model.fit_range_max}},
                  {"residual", model.residual}};
  write_text((ctx.dir / "decay_model.json").string(), model_json.dump(2) + "\n");
  write_text((ctx.dir / "report.json").string(),
             json{{"max_d_times_R", worst_kr},
                  {"witness_residual", witness.residual},
                  {"witness_norm", witness.witness_norm},
                  {"d_at_witness_R", d_at_R},
                  {"model", model_json}}
                     .dump(2) +
                 "\n");
}

void run_distance_rate(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const int n = cfg.at("grid_n").get<int>();
  GridPtr grid = make_uniform_grid(n);
  LinearMonotoneOperator A = make_operator(cfg.at("operator"), grid);
  GridFunction u = heaviside_element(grid);
  GridFunction x_bar = constant_function(grid, 0.0);
  LinearProblem P = make_linear_problem(A, u, x_bar);

  std::vector<double> mus = parse_log_grid(cfg.at("mus"));
  DistanceCurve curve = distance_function(P.A, u, mus);
  write_csv(curve, (ctx.dir / "distance_curve.csv").string());

  // delta grid on the curve's own Psi values: alpha_i = d_i/R_i and
  // delta_i = alpha_i d_i, so the a priori choice Psi^{-1}(delta_i) is exact
  // and the bound 3 d(Phi^{-1}(Psi^{-1}(delta)))) is 3 d_i.
  const double r_lo = cfg.at("r_lo").get<double>();
  const double r_hi = cfg.at("r_hi").get<double>();
  const uint64_t seed = cfg.at("seed").get<uint64_t>();

  std::vector<std::array<double, 5>> rows;
  std::vector<RateRecord> records;
  std::vector<std::pair<double, double>> bound;
  std::vector<InequalityChecks> ies;
  json noise_seeds = json::array();
  const double bound_factor = cfg.at("checks").value("bound_factor", 3.0);
  for (size_t i = 0; i < curve.size(); ++i) {
    const double R = curve.radii[i], d = curve.distances[i];
    if (R < r_lo || R > r_hi) continue;
    const double alpha = d / R;
    const double delta = alpha * d;
    const uint64_t ds = sub_seed(seed, i);
    noise_seeds.push_back({{"delta", delta}, {"seed", ds}});
    NoisyData D = make_noisy_data(P, delta, ds);
    InequalityChecks c = check_inequalities(P, D, alpha);
    double total = total_error(P, D, alpha);
    double bias = bias_linear(P, alpha);
    ies.push_back(c);
    rows.push_back({alpha, delta, bias, c.gap, total});
    records.push_back({delta, total});
    bound.emplace_back(delta, bound_factor * d);
  }
  ctx.manifest["noise_seeds"] = noise_seeds;
  require(records.size() >= 5, ErrorCode::invalid_argument,
          "distance-rate scenario: too few curve points in [r_lo, r_hi]");
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a[1] > b[1]; });
  std::sort(bound.begin(), bound.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::sort(records.begin(), records.end(),
            [](const RateRecord& a, const RateRecord& b) {
              return a.driver > b.driver;
            });

  const json& checks = cfg.at("checks");
  PowerFit fit = fit_power_rate(records);
  ctx.list.add_within("rate-slope", fit.slope,
                      checks.at("slope_target").get<double>(),
                      checks.at("slope_tol").get<double>());
  ctx.list.add_ge("rate-r2", fit.r_squared, checks.value("r2_min", 0.98));

  CompareReport cmp = compare_bound(records, bound, 1e-9);
  ctx.list.add("total-error-bound", cmp.pass, cmp.max_ratio,
               "observed <= " + fmt17(bound_factor) +
                   " d(Phi^-1(Psi^-1(delta)))");

  const double probe_delta = checks.at("psi_bracket_delta").get<double>();
  const double alpha_psi = psi_parameter_choice(curve, probe_delta);
  ctx.list.add("psi-bracket",
               alpha_psi > probe_delta && alpha_psi < std::sqrt(probe_delta),
               alpha_psi,
               "in (" + fmt17(probe_delta) + ", " +
                   fmt17(std::sqrt(probe_delta)) + ")");

  summarize_ie(ctx.list, ies, 1e-9);
  json ie_json = json::array();
  for (const auto& c : ies) ie_json.push_back(ie_entry(c, 1e-9));
  ctx.manifest["ie_checks"] = ie_json;
  ctx.manifest["tolerances"] = {{"ie_tol", 1e-9}};

  write_text((ctx.dir / "rate_table.csv").string(), rate_csv(rows));
  RateTable table;
  table.records = records;
  table.regime = RateTable::Regime::power;
  table.fitted_slope = fit.slope;
  table.fitted_intercept = fit.intercept;
  table.r_squared = fit.r_squared;
  json report = rate_report(table);
  report["max_bound_ratio"] = cmp.max_ratio;
  write_text((ctx.dir / "report.json").string(), report.dump(2) + "\n");
}

void run_scalar_rate(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const double kappa = cfg.at("kappa").get<double>();
  const double c = cfg.value("c", 1.0);
  const double tol = cfg.value("solver_tol", 1e-12);
  std::vector<double> deltas = parse_log_grid(cfg.at("deltas"));

  RateTable table = conditional_stability_rate(kappa, deltas, c);

  NonlinearProblem P = make_scalar_problem(power_link_map(kappa), 0.0, 0.0, 1.0);
  GridPtr g = P.F.grid();
  std::string csv = "delta,alpha,x,abs_error\n";
  std::vector<InequalityChecks> ies;
  json diagnostics = json::array();
  const double ie_tol = std::max(1e-9, 10.0 * tol);
  for (double d : deltas) {
    const double alpha = c * d;
    SolveInfo info_p, info_m;
    double xp = solve_scalar(P, d, alpha, tol, &info_p);
    double xm = solve_scalar(P, -d, alpha, tol, &info_m);
    double x = std::abs(xp) >= std::abs(xm) ? xp : xm;
    double yd = std::abs(xp) >= std::abs(xm) ? d : -d;
    csv += fmt17(d) + "," + fmt17(alpha) + "," + fmt17(x) + "," +
           fmt17(std::abs(x)) + "\n";
    ies.push_back(check_inequalities_nonlinear(
        P, GridFunction(g, Eigen::VectorXd::Constant(1, yd)), d, alpha, tol));
    diagnostics.push_back({{"delta", d},
                           {"alpha", alpha},
                           {"iterations", info_p.iterations + info_m.iterations},
                           {"residual", std::max(info_p.residual, info_m.residual)},
                           {"method", info_p.method}});
  }
  write_text((ctx.dir / "scalar_table.csv").string(), csv);
  ctx.manifest["solver_diagnostics"] = diagnostics;
  ctx.manifest["tolerances"] = {{"ie_tol", ie_tol}, {"solver_tol", tol}};

  const json& checks = cfg.at("checks");
  ctx.list.add_within("rate-slope", table.fitted_slope,
                      checks.at("slope_target").get<double>(),
                      checks.at("slope_tol").get<double>());
  ctx.list.add_ge("rate-r2", table.r_squared, checks.value("r2_min", 0.98));
  summarize_ie(ctx.list, ies, ie_tol);
  json ie_json = json::array();
  for (const auto& cc : ies) ie_json.push_back(ie_entry(cc, ie_tol));
  ctx.manifest["ie_checks"] = ie_json;

  write_text((ctx.dir / "report.json").string(),
             rate_report(table).dump(2) + "\n");
}

void run_bias_transfer(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const double x_true = cfg.at("x_true").get<double>();
  const double x_bar = cfg.at("x_bar").get<double>();
  const double ball = cfg.at("ball_radius").get<double>();
  const double tol = cfg.value("solver_tol", 1e-12);
  std::vector<double> alphas = parse_log_grid(cfg.at("alphas"));

  MonotoneMap F = exp_link_map(ball);
  const double k0 = *F.k0_hint();
  NonlinearProblem P = make_scalar_problem(F, x_true, x_bar, ball);
  const double gap = std::abs(x_true - x_bar);

  TransferCheck transfer = bias_transfer_check(P, k0, alphas, tol);
  LinearProblem linearized =
      make_linear_problem(P.F.derivative_at(P.x_true), P.x_true, P.x_bar);

  std::string csv = "alpha,bias_nonlinear,bias_linear,ratio\n";
  double worst_ratio = 0.0, worst_bias = 0.0;
  std::vector<InequalityChecks> ies;
  json diagnostics = json::array();
  const double ie_tol = std::max(1e-9, 10.0 * tol);
  for (size_t i = 0; i < alphas.size(); ++i) {
    const double a = alphas[i];
    SolveInfo info;
    const double bf = bias_nonlinear(P, a, tol, &info);
    const double ba = bias_linear(linearized, a);
    csv += fmt17(a) + "," + fmt17(bf) + "," + fmt17(ba) + "," +
           fmt17(transfer.ratios[i].second) + "\n";
    worst_ratio = std::max(worst_ratio, transfer.ratios[i].second);
    worst_bias = std::max(worst_bias, bf);
    ies.push_back(check_inequalities_nonlinear(P, P.y, 0.0, a, tol));
    diagnostics.push_back({{"alpha", a},
                           {"iterations", info.iterations},
                           {"residual", info.residual},
                           {"method", info.method}});
  }
  ctx.manifest["solver_diagnostics"] = diagnostics;
  write_text((ctx.dir / "transfer_table.csv").string(), csv);

  ctx.list.add_le("transfer-ratio", worst_ratio, transfer.C + 1e-6);
  ctx.list.add_le("bias-upper-bound", worst_bias, gap + ie_tol);
  summarize_ie(ctx.list, ies, ie_tol);
  json ie_json = json::array();
  for (const auto& cc : ies) ie_json.push_back(ie_entry(cc, ie_tol));
  ctx.manifest["ie_checks"] = ie_json;
  ctx.manifest["tolerances"] = {{"ie_tol", ie_tol}, {"solver_tol", tol}};

  write_text((ctx.dir / "report.json").string(),
             json{{"C", transfer.C},
                  {"k0", k0},
                  {"k0_times_gap", k0 * gap},
                  {"max_ratio", worst_ratio},
                  {"max_bias", worst_bias}}
                     .dump(2) +
                 "\n");
}

void run_saturation(RunContext& ctx) {
  const json& cfg = ctx.s.config;
  const int n = cfg.at("grid_n").get<int>();
  GridPtr grid = make_uniform_grid(n);
  std::vector<double> alphas = parse_log_grid(cfg.at("alphas"));

  std::string csv = "case,alpha,bias,ratio\n";

  // Benchmark element u = V w: B(alpha)/alpha bounded above by ||w|| and
  // below away from zero.
  LinearMonotoneOperator V = volterra_operator(grid);
  GridFunction w = sample_function(
      grid, [](double t) { return 1.0 + std::sin(2.0 * M_PI * t); });
  LinearProblem bench =
      make_linear_problem(V, V.apply(w), constant_function(grid, 0.0));
  double probe = saturation_probe(bench, alphas);
  double upper = 0.0;
  for (double a : alphas) {
    double b = bias_linear(bench, a);
    upper = std::max(upper, b / a);
    csv += "volterra-benchmark," + fmt17(a) + "," + fmt17(b) + "," +
           fmt17(b / a) + "\n";
  }
  const double u_norm = norm(bench.x_true - bench.x_bar);
  const double v_norm = operator_norm(bench.A);
  ctx.list.add_ge("probe-lower", probe,
                  u_norm / (v_norm * (1.0 + 1e-6) + alphas.front()) - 1e-8);
  ctx.list.add_le("probe-upper", upper, norm(w) * (1.0 + 1e-8));

  // Non-benchmark element (mult by t, u = 1): the ratio must diverge.
  LinearMonotoneOperator M = multiplication_operator(
      grid, [](double t) { return t; }, "multiplication(t)");
  LinearProblem hard = make_linear_problem(M, constant_function(grid, 1.0),
                                           constant_function(grid, 0.0));
  double ratio_large = bias_linear(hard, alphas.front()) / alphas.front();
  double ratio_small = bias_linear(hard, alphas.back()) / alphas.back();
  for (double a : alphas) {
    double b = bias_linear(hard, a);
    csv += "mult-t-const," + fmt17(a) + "," + fmt17(b) + "," + fmt17(b / a) +
           "\n";
  }
  ctx.list.add_ge("probe-diverges", ratio_small,
                  cfg.at("checks").value("divergence_factor", 10.0) *
                      ratio_large);

  write_text((ctx.dir / "saturation_table.csv").string(), csv);
  write_text((ctx.dir / "report.json").string(),
             json{{"benchmark_liminf", probe},
                  {"benchmark_upper", upper},
                  {"w_norm", norm(w)},
                  {"divergence_ratio", ratio_small / ratio_large}}
                     .dump(2) +
                 "\n");
}

}  // namespace

std::vector<double> log_grid(double max_value, double min_value, int points) {
  require(points >= 2 && max_value > min_value && min_value > 0.0,
          ErrorCode::invalid_argument, "log_grid: bad parameters");
  std::vector<double> out(static_cast<size_t>(points));
  const double lmax = std::log(max_value), lmin = std::log(min_value);
  for (int i = 0; i < points; ++i)
    out[static_cast<size_t>(i)] =
        std::exp(lmax + (lmin - lmax) * i / (points - 1));
  out.front() = max_value;
  out.back() = min_value;
  return out;
}

uint64_t config_hash(const nlohmann::json& config) {
  const std::string dump = config.dump();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

Scenario load_scenario(const std::string& json_path) {
  std::ifstream in(json_path);
  require(in.good(), ErrorCode::io, "cannot open " + json_path);
  json config = json::parse(in, nullptr, /*allow_exceptions=*/false);
  require(!config.is_discarded(), ErrorCode::io,
          "invalid JSON in " + json_path);
  return parse_scenario(config);
}

Scenario parse_scenario(const nlohmann::json& config) {
  Scenario s{config};
  validate_scenario(s);
  return s;
}

void validate_scenario(const Scenario& s) {
  const json& cfg = s.config;
  require(cfg.is_object() && cfg.contains("name") && cfg.contains("category"),
          ErrorCode::invalid_argument,
          "scenario: config must carry name and category");
  const std::string category = s.category();
  const bool scalar_category =
      category == "scalar-rate" || category == "bias-transfer";
  if (!scalar_category) {
    require(cfg.contains("grid_n") && cfg.at("grid_n").get<int>() >= 16,
            ErrorCode::invalid_argument, "scenario: grid_n must be >= 16");
  }
  if (category == "rate") {
    parse_delta_list(cfg.at("noise").at("deltas"));
    if (cfg.at("solution").value("kind", "") == "source") {
      double p = cfg.at("solution").at("p").get<double>();
      require(p > 0.0 && p <= 1.0, ErrorCode::invalid_argument,
              "scenario: source p must be in (0, 1]");
    }
  }
  static const std::vector<std::string> known = {
      "rate",        "bias-curve",  "dichotomy",     "distance",
      "distance-rate", "scalar-rate", "bias-transfer", "saturation"};
  require(std::find(known.begin(), known.end(), category) != known.end(),
          ErrorCode::invalid_argument,
          "scenario: unknown category '" + category + "'");
}

RunResult run_scenario(const Scenario& s, const std::string& out_root,
                       const RunOverrides& overrides) {
  Scenario eff = s;
  if (overrides.grid_n && eff.config.contains("grid_n"))
    eff.config["grid_n"] = *overrides.grid_n;
  if (overrides.seed) {
    if (eff.config.contains("noise")) eff.config["noise"]["seed"] = *overrides.seed;
    if (eff.config.contains("seed")) eff.config["seed"] = *overrides.seed;
  }
  validate_scenario(eff);

  RunContext ctx{eff, fs::path(out_root) / eff.name(), json::object(), {}};
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  require(!ec, ErrorCode::io, "cannot create " + ctx.dir.string());

  const std::string category = eff.category();
  if (category == "rate")
    run_rate(ctx);
  else if (category == "bias-curve")
    run_bias_curve(ctx);
  else if (category == "dichotomy")
    run_dichotomy(ctx);
  else if (category == "distance")
    run_distance(ctx);
  else if (category == "distance-rate")
    run_distance_rate(ctx);
  else if (category == "scalar-rate")
    run_scalar_rate(ctx);
  else if (category == "bias-transfer")
    run_bias_transfer(ctx);
  else if (category == "saturation")
    run_saturation(ctx);

  RunResult result;
  result.name = eff.name();
  result.out_dir = ctx.dir.string();
  result.checks = ctx.list.checks;

  json checks_json = json::array();
  for (const auto& c : result.checks)
    checks_json.push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"observed", c.observed},
                           {"required", c.requirement}});
  ctx.manifest["scenario"] = eff.name();
  ctx.manifest["category"] = category;
  ctx.manifest["version"] = kVersion;
  ctx.manifest["config"] = eff.config;
  ctx.manifest["config_hash"] = config_hash(eff.config);
  ctx.manifest["checks"] = checks_json;
  ctx.manifest["all_pass"] = result.all_pass();
  if (!ctx.manifest.contains("tolerances"))
    ctx.manifest["tolerances"] = json::object();
  ctx.manifest["log_rate_interpretation"] = "decaying";
  write_text((ctx.dir / "manifest.json").string(),
             ctx.manifest.dump(2) + "\n");
  return result;
}

std::vector<Scenario> builtin_scenarios() {
  using nlohmann::json;
  std::vector<json> configs;

  configs.push_back(json{
      {"name", "well-posed-dichotomy"},
      {"category", "dichotomy"},
      {"grid_n", 1000},
      {"alphas", {1e-1, 1e-2, 1e-3}},
      {"entries",
       json::array(
           {{{"operator", {{"kind", "volterra"}}}, {"expect", "ill"}},
            {{"operator",
              {{"kind", "multiplication"}, {"multiplier", "one-plus-t"}}},
             {"expect", "well"},
             {"k_min", 0.8},
             {"k_max", 1.1}},
            {{"operator", {{"kind", "multiplication"}, {"multiplier", "t"}}},
             {"expect", "ill"}},
            {{"operator", {{"kind", "skew"}}},
             {"expect", "well"},
             {"k_min", 0.8},
             {"k_max", 1.1}},
            {{"operator", {{"kind", "identity"}}},
             {"expect", "well"},
             {"k_min", 0.8},
             {"k_max", 1.1}}})}});

  configs.push_back(json{
      {"name", "volterra-benchmark"},
      {"category", "rate"},
      {"grid_n", 1000},
      {"operator", {{"kind", "volterra"}}},
      {"solution", {{"kind", "source"}, {"p", 1.0}, {"w", "smooth"}}},
      {"x_bar", {{"kind", "zero"}}},
      {"noise",
       {{"deltas", {{"max", 1e-2}, {"min", 1e-6}, {"points", 9}}},
        {"seed", 2024},
        {"grid_floor", false}}},
      {"rule", {{"kind", "power"}, {"c", 1.0}, {"theta", 0.5}}},
      {"bias_alphas", {{"max", 1.0}, {"min", 1e-4}, {"points", 41}}},
      {"checks",
       {{"slope_target", 0.5},
        {"slope_tol", 0.1},
        {"r2_min", 0.98},
        {"expected_regime", "power"},
        {"benchmark_bounds", true}}}});

  for (double p : {0.25, 0.5}) {
    configs.push_back(json{
        {"name", p == 0.25 ? "volterra-holder-p0.25" : "volterra-holder-p0.5"},
        {"category", "rate"},
        {"grid_n", 1000},
        {"operator", {{"kind", "volterra"}}},
        {"solution",
         {{"kind", "source"}, {"p", p}, {"w", "rough"}, {"w_seed", 7}}},
        {"x_bar", {{"kind", "zero"}}},
        {"noise",
         {{"deltas", {{"max", 1e-2}, {"min", 1e-6}, {"points", 21}}},
          {"seed", 2024},
          {"grid_floor", true}}},
        {"rule", {{"kind", "power"}, {"c", 1.0}, {"theta", 1.0 / (p + 1.0)}}},
        {"checks",
         {{"slope_target", p / (p + 1.0)},
          {"slope_tol", 0.1},
          {"r2_min", 0.98},
          {"expected_regime", "power"},
          {"fractional_oracle_p", p},
          {"fractional_oracle_tol", 1e-3}}}});
  }

  configs.push_back(json{
      {"name", "mult-closed-form-bias"},
      {"category", "bias-curve"},
      {"grid_n", 1000},
      {"operator", {{"kind", "multiplication"}, {"multiplier", "t"}}},
      {"solution", {{"kind", "constant"}, {"value", 1.0}}},
      {"x_bar", {{"kind", "zero"}}},
      {"alphas", {{"max", 1.0}, {"min", 1e-4}, {"points", 81}}},
      {"checks",
       {{"closed_form", "sqrt(alpha/(1+alpha))"}, {"rel_tol", 1e-4}}}});

  configs.push_back(json{
      {"name", "mult-log"},
      {"category", "rate"},
      {"grid_n", 1000},
      {"operator", {{"kind", "multiplication"}, {"multiplier", "exp-inv-sqrt"}}},
      {"solution", {{"kind", "constant"}, {"value", 1.0}}},
      {"x_bar", {{"kind", "zero"}}},
      {"noise",
       {{"deltas", {{"max", 1e-3}, {"min", 1e-8}, {"points", 11}}},
        {"seed", 2025},
        {"grid_floor", false}}},
      {"rule", {{"kind", "power"}, {"c", 1.0}, {"theta", 0.5}}},
      {"checks",
       {{"slope_target", 1.0},
        {"slope_tol", 0.3},
        {"r2_min", 0.98},
        {"expected_regime", "logarithmic"}}}});

  configs.push_back(json{
      {"name", "cesaro-heaviside-distance"},
      {"category", "distance"},
      {"grid_n", 2000},
      {"operator", {{"kind", "cesaro"}}},
      {"element", "heaviside"},
      {"mus", {{"max", 10.0}, {"min", 2e-11}, {"points", 36}}},
      {"checks",
       {{"kr_bound", 1.1},
        {"r_lo", 10.0},
        {"r_hi", 100.0},
        {"exponent_target", -1.0},
        {"exponent_tol", 0.15},
        {"p_target", 0.5},
        {"p_tol", 0.05},
        {"witness_R", 10.0},
        {"witness_norm_slack", 0.01}}}});

  configs.push_back(json{
      {"name", "cesaro-heaviside-rate"},
      {"category", "distance-rate"},
      {"grid_n", 1000},
      {"operator", {{"kind", "cesaro"}}},
      {"element", "heaviside"},
      {"mus", {{"max", 10.0}, {"min", 1e-8}, {"points", 37}}},
      {"r_lo", 2.0},
      {"r_hi", 40.0},
      {"seed", 2026},
      {"checks",
       {{"slope_target", 1.0 / 3.0},
        {"slope_tol", 0.1},
        {"r2_min", 0.98},
        {"bound_factor", 3.0},
        {"psi_bracket_delta", 1e-4}}}});

  for (double kappa : {0.5, 1.0, 2.0, 3.0}) {
    std::string name = "scalar-kappa-";
    name += (kappa == 0.5 ? "0.5" : std::to_string(static_cast<int>(kappa)));
    configs.push_back(json{
        {"name", name},
        {"category", "scalar-rate"},
        {"kappa", kappa},
        {"c", 1.0},
        {"deltas", {{"max", 1e-2}, {"min", 1e-6}, {"points", 9}}},
        {"solver_tol", 1e-12},
        {"checks",
         {{"slope_target", 1.0 / kappa},
          {"slope_tol", kappa == 0.5 ? 0.1 : 0.05},
          {"r2_min", 0.98}}}});
  }

  configs.push_back(json{
      {"name", "exp-bias-transfer"},
      {"category", "bias-transfer"},
      {"x_true", 0.2},
      {"x_bar", 0.0},
      {"ball_radius", 0.5},
      {"alphas", {{"max", 1.0}, {"min", 1e-6}, {"points", 13}}},
      {"solver_tol", 1e-12},
      {"checks", json::object()}});

  configs.push_back(json{
      {"name", "saturation-probe"},
      {"category", "saturation"},
      {"grid_n", 1000},
      {"alphas", {{"max", 1.0}, {"min", 1e-4}, {"points", 9}}},
      {"checks", {{"divergence_factor", 10.0}}}});

  std::vector<Scenario> out;
  for (auto& cfg : configs) out.push_back(parse_scenario(cfg));
  return out;
}

const Scenario& builtin_scenario(const std::string& name) {
  static const std::vector<Scenario> all = builtin_scenarios();
  for (const auto& s : all)
    if (s.name() == name) return s;
  fail(ErrorCode::invalid_argument, "no builtin scenario named '" + name + "'");
}

}  // namespace lavreg
