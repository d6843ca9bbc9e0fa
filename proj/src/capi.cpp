#include "lavreg.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "analysis.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "lavrentiev.hpp"
#include "linops.hpp"
#include "nonlinear.hpp"
#include "scenario.hpp"
#include "srcfit.hpp"

struct lavreg_grid {
  lavreg::GridPtr grid;
};
struct lavreg_func {
  lavreg::GridFunction f;
};
struct lavreg_operator {
  lavreg::LinearMonotoneOperator op;
};
struct lavreg_linear_problem {
  lavreg::LinearProblem p;
};
struct lavreg_noisy_data {
  lavreg::NoisyData d;
};
struct lavreg_distance_curve {
  lavreg::DistanceCurve c;
};
struct lavreg_map {
  lavreg::MonotoneMap m;
};
struct lavreg_nl_problem {
  lavreg::NonlinearProblem p;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
int guarded(Fn&& fn) noexcept {
  try {
    fn();
    return LAVREG_OK;
  } catch (const lavreg::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LAVREG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LAVREG_ERR_INTERNAL;
  }
}

void check(bool cond, const char* what) {
  lavreg::require(cond, lavreg::ErrorCode::invalid_argument, what);
}

int copy_string(const std::string& s, char* buf, int buflen) {
  check(buf != nullptr && buflen > 0, "null/empty output buffer");
  std::snprintf(buf, static_cast<size_t>(buflen), "%s", s.c_str());
  return LAVREG_OK;
}

std::vector<double> to_vector(const double* data, int n, const char* what) {
  check(data != nullptr && n > 0, what);
  return std::vector<double>(data, data + n);
}

lavreg::RunOverrides make_overrides(int grid_n, int64_t seed) {
  lavreg::RunOverrides o;
  if (grid_n > 0) o.grid_n = grid_n;
  if (seed >= 0) o.seed = static_cast<uint64_t>(seed);
  return o;
}

void report_checks(const lavreg::RunResult& result, lavreg_check_callback cb,
                   void* ctx) {
  if (!cb) return;
  for (const auto& c : result.checks)
    cb(result.name.c_str(), c.name.c_str(), c.pass ? 1 : 0, c.observed,
       c.requirement.c_str(), ctx);
}

}  // namespace

extern "C" {

const char* lavreg_status_name(int status) {
  switch (status) {
    case LAVREG_OK: return "ok";
    case LAVREG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LAVREG_ERR_GRID_MISMATCH: return "grid mismatch";
    case LAVREG_ERR_SINGULAR: return "numerically singular";
    case LAVREG_ERR_NO_CONVERGENCE: return "no convergence";
    case LAVREG_ERR_OUT_OF_RANGE: return "out of tabulated range";
    case LAVREG_ERR_UNSUPPORTED: return "unsupported";
    case LAVREG_ERR_IO: return "i/o error";
    case LAVREG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lavreg_last_error(void) { return g_last_error.c_str(); }

const char* lavreg_version(void) { return lavreg::kVersion; }

/* ---------------------------------------------------------------- grid */

int lavreg_grid_uniform(int n, lavreg_grid** out) {
  return guarded([&] {
    check(out != nullptr, "null output handle");
    *out = new lavreg_grid{lavreg::make_uniform_grid(n)};
  });
}

void lavreg_grid_free(lavreg_grid* grid) { delete grid; }

int lavreg_grid_size(const lavreg_grid* grid) {
  return grid ? grid->grid->size() : 0;
}

int lavreg_grid_nodes(const lavreg_grid* grid, double* out) {
  return guarded([&] {
    check(grid != nullptr && out != nullptr, "null argument");
    const auto& nodes = grid->grid->nodes();
    std::memcpy(out, nodes.data(), nodes.size() * sizeof(double));
  });
}

int lavreg_grid_weights(const lavreg_grid* grid, double* out) {
  return guarded([&] {
    check(grid != nullptr && out != nullptr, "null argument");
    const auto& wts = grid->grid->weights();
    std::memcpy(out, wts.data(), wts.size() * sizeof(double));
  });
}

/* ------------------------------------------------------- grid functions */

int lavreg_func_create(const lavreg_grid* grid, const double* values,
                       lavreg_func** out) {
  return guarded([&] {
    check(grid != nullptr && values != nullptr && out != nullptr,
          "null argument");
    Eigen::VectorXd v =
        Eigen::Map<const Eigen::VectorXd>(values, grid->grid->size());
    *out = new lavreg_func{lavreg::GridFunction(grid->grid, std::move(v))};
  });
}

int lavreg_func_constant(const lavreg_grid* grid, double value,
                         lavreg_func** out) {
  return guarded([&] {
    check(grid != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{lavreg::constant_function(grid->grid, value)};
  });
}

void lavreg_func_free(lavreg_func* f) { delete f; }

int lavreg_func_size(const lavreg_func* f) { return f ? f->f.size() : 0; }

int lavreg_func_values(const lavreg_func* f, double* out) {
  return guarded([&] {
    check(f != nullptr && out != nullptr, "null argument");
    std::memcpy(out, f->f.values.data(),
                static_cast<size_t>(f->f.size()) * sizeof(double));
  });
}

int lavreg_func_inner(const lavreg_func* f, const lavreg_func* g,
                      double* out) {
  return guarded([&] {
    check(f != nullptr && g != nullptr && out != nullptr, "null argument");
    *out = lavreg::inner(f->f, g->f);
  });
}

int lavreg_func_norm(const lavreg_func* f, double* out) {
  return guarded([&] {
    check(f != nullptr && out != nullptr, "null argument");
    *out = lavreg::norm(f->f);
  });
}

int lavreg_func_write_csv(const lavreg_func* f, const char* path) {
  return guarded([&] {
    check(f != nullptr && path != nullptr, "null argument");
    lavreg::write_csv(f->f, std::string(path));
  });
}

/* ------------------------------------------------------------- operators */

int lavreg_operator_multiplication(const lavreg_grid* grid,
                                   const char* multiplier,
                                   lavreg_operator** out) {
  return guarded([&] {
    check(grid != nullptr && multiplier != nullptr && out != nullptr,
          "null argument");
    const std::string name(multiplier);
    auto fn = [name](double t) -> double {
      if (name == "t") return t;
      if (name == "one-plus-t") return 1.0 + t;
      if (name == "exp-inv-sqrt") return std::exp(1.0 - 1.0 / std::sqrt(t));
      if (name == "one") return 1.0;
      lavreg::fail(lavreg::ErrorCode::invalid_argument,
                   "unknown multiplier '" + name + "'");
    };
    fn(0.5);  // validate the name before building the matrix
    *out = new lavreg_operator{lavreg::multiplication_operator(
        grid->grid, fn, "multiplication(" + name + ")")};
  });
}

int lavreg_operator_multiplication_fn(const lavreg_grid* grid,
                                      double (*multiplier)(double, void*),
                                      void* ctx, lavreg_operator** out) {
  return guarded([&] {
    check(grid != nullptr && multiplier != nullptr && out != nullptr,
          "null argument");
    *out = new lavreg_operator{lavreg::multiplication_operator(
        grid->grid, [multiplier, ctx](double t) { return multiplier(t, ctx); },
        "multiplication(custom)")};
  });
}

int lavreg_operator_volterra(const lavreg_grid* grid, lavreg_operator** out) {
  return guarded([&] {
    check(grid != nullptr && out != nullptr, "null argument");
    *out = new lavreg_operator{lavreg::volterra_operator(grid->grid)};
  });
}

int lavreg_operator_cesaro(const lavreg_grid* grid, lavreg_operator** out) {
  return guarded([&] {
    check(grid != nullptr && out != nullptr, "null argument");
    *out = new lavreg_operator{lavreg::cesaro_operator(grid->grid)};
  });
}

int lavreg_operator_skew(lavreg_operator** out) {
  return guarded([&] {
    check(out != nullptr, "null argument");
    *out = new lavreg_operator{lavreg::skew_example()};
  });
}

int lavreg_operator_identity(const lavreg_grid* grid, lavreg_operator** out) {
  return guarded([&] {
    check(grid != nullptr && out != nullptr, "null argument");
    *out = new lavreg_operator{lavreg::identity_operator(grid->grid)};
  });
}

int lavreg_operator_zero(const lavreg_grid* grid, lavreg_operator** out) {
  return guarded([&] {
    check(grid != nullptr && out != nullptr, "null argument");
    *out = new lavreg_operator{lavreg::zero_operator(grid->grid)};
  });
}

void lavreg_operator_free(lavreg_operator* op) { delete op; }

int lavreg_operator_size(const lavreg_operator* op) {
  return op ? op->op.size() : 0;
}

int lavreg_operator_label(const lavreg_operator* op, char* buf, int buflen) {
  return guarded([&] {
    check(op != nullptr, "null argument");
    copy_string(op->op.label(), buf, buflen);
  });
}

int lavreg_operator_apply(const lavreg_operator* op, const lavreg_func* x,
                          lavreg_func** out) {
  return guarded([&] {
    check(op != nullptr && x != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{op->op.apply(x->f)};
  });
}

int lavreg_operator_adjoint_apply(const lavreg_operator* op,
                                  const lavreg_func* x, lavreg_func** out) {
  return guarded([&] {
    check(op != nullptr && x != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{op->op.adjoint_apply(x->f)};
  });
}

int lavreg_operator_norm(const lavreg_operator* op, double* out) {
  return guarded([&] {
    check(op != nullptr && out != nullptr, "null argument");
    *out = lavreg::operator_norm(op->op);
  });
}

int lavreg_resolvent_solve(const lavreg_operator* op, double alpha,
                           const lavreg_func* rhs, lavreg_func** out) {
  return guarded([&] {
    check(op != nullptr && rhs != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{lavreg::resolvent_solve(op->op, alpha, rhs->f)};
  });
}

int lavreg_resolvent_norm(const lavreg_operator* op, double alpha,
                          double* out) {
  return guarded([&] {
    check(op != nullptr && out != nullptr, "null argument");
    *out = lavreg::estimate_resolvent_norm(op->op, alpha);
  });
}

int lavreg_contraction_norm(const lavreg_operator* op, double alpha,
                            double* out) {
  return guarded([&] {
    check(op != nullptr && out != nullptr, "null argument");
    *out = lavreg::estimate_contraction_norm(op->op, alpha);
  });
}

int lavreg_fractional_power_apply(const lavreg_operator* op, double p,
                                  const lavreg_func* x, lavreg_func** out) {
  return guarded([&] {
    check(op != nullptr && x != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{lavreg::fractional_power_apply(op->op, p, x->f)};
  });
}

int lavreg_monotonicity_defect(const lavreg_operator* op, int trials,
                               double* out) {
  return guarded([&] {
    check(op != nullptr && out != nullptr, "null argument");
    *out = lavreg::monotonicity_defect(op->op, trials);
  });
}

int lavreg_classify_posedness(const lavreg_operator* op, const double* alphas,
                              int n_alphas, int* classification, double* K,
                              double* norms) {
  return guarded([&] {
    check(op != nullptr && classification != nullptr && K != nullptr,
          "null argument");
    auto report = lavreg::classify_posedness(
        op->op, to_vector(alphas, n_alphas, "null alphas"));
    *classification = report.classification ==
                              lavreg::PosednessReport::Classification::ill_posed
                          ? 1
                          : 0;
    *K = report.K;
    if (norms)
      for (int i = 0; i < n_alphas; ++i)
        norms[i] = report.resolvent_norms[static_cast<size_t>(i)].second;
  });
}

int lavreg_operator_export(const lavreg_operator* op, const char* csv_path,
                           const char* json_path) {
  return guarded([&] {
    check(op != nullptr && csv_path != nullptr && json_path != nullptr,
          "null argument");
    lavreg::export_operator(op->op, csv_path, json_path);
  });
}

/* ------------------------------------------------- linear regularization */

int lavreg_linear_problem_create(const lavreg_operator* op,
                                 const lavreg_func* x_true,
                                 const lavreg_func* x_bar,
                                 lavreg_linear_problem** out) {
  return guarded([&] {
    check(op != nullptr && x_true != nullptr && x_bar != nullptr &&
              out != nullptr,
          "null argument");
    *out = new lavreg_linear_problem{
        lavreg::make_linear_problem(op->op, x_true->f, x_bar->f)};
  });
}

void lavreg_linear_problem_free(lavreg_linear_problem* p) { delete p; }

int lavreg_linear_problem_y(const lavreg_linear_problem* p,
                            lavreg_func** out) {
  return guarded([&] {
    check(p != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{p->p.y};
  });
}

int lavreg_noisy_data_create(const lavreg_linear_problem* p, double delta,
                             uint64_t seed, lavreg_noisy_data** out) {
  return guarded([&] {
    check(p != nullptr && out != nullptr, "null argument");
    *out = new lavreg_noisy_data{lavreg::make_noisy_data(p->p, delta, seed)};
  });
}

void lavreg_noisy_data_free(lavreg_noisy_data* d) { delete d; }

int lavreg_noisy_data_y(const lavreg_noisy_data* d, lavreg_func** out) {
  return guarded([&] {
    check(d != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{d->d.y_delta};
  });
}

int lavreg_regularize_linear(const lavreg_linear_problem* p,
                             const lavreg_noisy_data* d, double alpha,
                             lavreg_func** out) {
  return guarded([&] {
    check(p != nullptr && d != nullptr && out != nullptr, "null argument");
    *out = new lavreg_func{lavreg::regularize_linear(p->p, d->d, alpha)};
  });
}

int lavreg_bias_linear(const lavreg_linear_problem* p, double alpha,
                       double* out) {
  return guarded([&] {
    check(p != nullptr && out != nullptr, "null argument");
    *out = lavreg::bias_linear(p->p, alpha);
  });
}

int lavreg_noise_propagation_gap(const lavreg_linear_problem* p,
                                 const lavreg_noisy_data* d, double alpha,
                                 double* out) {
  return guarded([&] {
    check(p != nullptr && d != nullptr && out != nullptr, "null argument");
    *out = lavreg::noise_propagation_gap(p->p, d->d, alpha);
  });
}

int lavreg_total_error(const lavreg_linear_problem* p,
                       const lavreg_noisy_data* d, double alpha, double* out) {
  return guarded([&] {
    check(p != nullptr && d != nullptr && out != nullptr, "null argument");
    *out = lavreg::total_error(p->p, d->d, alpha);
  });
}

int lavreg_saturation_probe(const lavreg_linear_problem* p,
                            const double* alphas, int n_alphas, double* out) {
  return guarded([&] {
    check(p != nullptr && out != nullptr, "null argument");
    *out = lavreg::saturation_probe(p->p,
                                    to_vector(alphas, n_alphas, "null alphas"));
  });
}

int lavreg_apriori_alpha_linear(double delta, double c, double* out) {
  return guarded([&] {
    check(out != nullptr, "null argument");
    *out = lavreg::apriori_alpha(delta, lavreg::ParameterRule::linear_rule(c));
  });
}

int lavreg_apriori_alpha_power(double delta, double c, double theta,
                               double* out) {
  return guarded([&] {
    check(out != nullptr, "null argument");
    *out =
        lavreg::apriori_alpha(delta, lavreg::ParameterRule::power_rule(c, theta));
  });
}

/* -------------------------------------------------------- distance curve */

int lavreg_distance_function(const lavreg_operator* op, const lavreg_func* u,
                             const double* mus, int n_mus,
                             lavreg_distance_curve** out) {
  return guarded([&] {
    check(op != nullptr && u != nullptr && out != nullptr, "null argument");
    *out = new lavreg_distance_curve{lavreg::distance_function(
        op->op, u->f, to_vector(mus, n_mus, "null mu grid"))};
  });
}

void lavreg_distance_curve_free(lavreg_distance_curve* c) { delete c; }

int lavreg_distance_curve_size(const lavreg_distance_curve* c) {
  return c ? static_cast<int>(c->c.size()) : 0;
}

int lavreg_distance_curve_points(const lavreg_distance_curve* c, double* mu,
                                 double* R, double* d) {
  return guarded([&] {
    check(c != nullptr, "null argument");
    for (size_t i = 0; i < c->c.size(); ++i) {
      if (mu) mu[i] = c->c.mu_values[i];
      if (R) R[i] = c->c.radii[i];
      if (d) d[i] = c->c.distances[i];
    }
  });
}

int lavreg_distance_curve_write_csv(const lavreg_distance_curve* c,
                                    const char* path) {
  return guarded([&] {
    check(c != nullptr && path != nullptr, "null argument");
    lavreg::write_csv(c->c, std::string(path));
  });
}

int lavreg_fit_decay(const lavreg_distance_curve* c, int* kind,
                     double* exponent_or_q, double* constant, double* extra,
                     double* residual) {
  return guarded([&] {
    check(c != nullptr, "null argument");
    lavreg::DecayModel model = lavreg::fit_decay(c->c);
    if (kind) *kind = static_cast<int>(model.kind);
    if (exponent_or_q) *exponent_or_q = model.exponent;
    if (constant) *constant = model.constant;
    if (extra)
      *extra = model.kind == lavreg::DecayModel::Kind::benchmark
                   ? model.norm_w
                   : model.implied_p;
    if (residual) *residual = model.residual;
  });
}

int lavreg_bias_bound_from_distance(const lavreg_distance_curve* c,
                                    double alpha, double* out) {
  return guarded([&] {
    check(c != nullptr && out != nullptr, "null argument");
    *out = lavreg::bias_bound_from_distance(c->c, alpha);
  });
}

int lavreg_psi_parameter_choice(const lavreg_distance_curve* c, double delta,
                                double* out) {
  return guarded([&] {
    check(c != nullptr && out != nullptr, "null argument");
    *out = lavreg::psi_parameter_choice(c->c, delta);
  });
}

int lavreg_verify_cesaro_witness(const lavreg_grid* grid, double R,
                                 double* residual, double* witness_norm) {
  return guarded([&] {
    check(grid != nullptr && residual != nullptr, "null argument");
    lavreg::WitnessReport report =
        lavreg::verify_cesaro_witness(grid->grid, R);
    *residual = report.residual;
    if (witness_norm) *witness_norm = report.witness_norm;
  });
}

/* --------------------------------------------------------------- nonlinear */

int lavreg_map_power_link(double kappa, lavreg_map** out) {
  return guarded([&] {
    check(out != nullptr, "null argument");
    *out = new lavreg_map{lavreg::power_link_map(kappa)};
  });
}

int lavreg_map_exp_link(double ball_radius, lavreg_map** out) {
  return guarded([&] {
    check(out != nullptr, "null argument");
    *out = new lavreg_map{lavreg::exp_link_map(ball_radius)};
  });
}

int lavreg_map_custom_scalar(double (*f)(double, void*),
                             double (*df)(double, void*), void* ctx,
                             lavreg_map** out) {
  return guarded([&] {
    check(f != nullptr && df != nullptr && out != nullptr, "null argument");
    *out = new lavreg_map{lavreg::MonotoneMap::scalar(
        "custom", [f, ctx](double x) { return f(x, ctx); },
        [df, ctx](double x) { return df(x, ctx); })};
  });
}

void lavreg_map_free(lavreg_map* map) { delete map; }

int lavreg_map_eval_scalar(const lavreg_map* map, double x, double* out) {
  return guarded([&] {
    check(map != nullptr && out != nullptr, "null argument");
    *out = map->m.eval_scalar(x);
  });
}

int lavreg_map_derivative_scalar(const lavreg_map* map, double x,
                                 double* out) {
  return guarded([&] {
    check(map != nullptr && out != nullptr, "null argument");
    *out = map->m.derivative_scalar(x);
  });
}

int lavreg_map_k0_hint(const lavreg_map* map, double* out) {
  return guarded([&] {
    check(map != nullptr && out != nullptr, "null argument");
    lavreg::require(map->m.k0_hint().has_value(),
                    lavreg::ErrorCode::unsupported,
                    "map carries no k0 hint");
    *out = *map->m.k0_hint();
  });
}

int lavreg_nl_problem_create_scalar(const lavreg_map* map, double x_true,
                                    double x_bar, double ball_radius,
                                    lavreg_nl_problem** out) {
  return guarded([&] {
    check(map != nullptr && out != nullptr, "null argument");
    *out = new lavreg_nl_problem{
        lavreg::make_scalar_problem(map->m, x_true, x_bar, ball_radius)};
  });
}

void lavreg_nl_problem_free(lavreg_nl_problem* p) { delete p; }

int lavreg_solve_scalar(const lavreg_nl_problem* p, double y_delta,
                        double alpha, double tol, double* out) {
  return guarded([&] {
    check(p != nullptr && out != nullptr, "null argument");
    *out = lavreg::solve_scalar(p->p, y_delta, alpha, tol);
  });
}

int lavreg_bias_nonlinear(const lavreg_nl_problem* p, double alpha, double tol,
                          double* out) {
  return guarded([&] {
    check(p != nullptr && out != nullptr, "null argument");
    *out = lavreg::bias_nonlinear(p->p, alpha, tol);
  });
}

int lavreg_bias_transfer_check(const lavreg_nl_problem* p, double k0,
                               const double* alphas, int n_alphas, double tol,
                               double* ratios, double* C_out) {
  return guarded([&] {
    check(p != nullptr && ratios != nullptr, "null argument");
    lavreg::TransferCheck result = lavreg::bias_transfer_check(
        p->p, k0, to_vector(alphas, n_alphas, "null alphas"), tol);
    for (int i = 0; i < n_alphas; ++i)
      ratios[i] = result.ratios[static_cast<size_t>(i)].second;
    if (C_out) *C_out = result.C;
  });
}

int lavreg_conditional_stability_rate(double kappa, const double* deltas,
                                      int n_deltas, double c, double* errors,
                                      double* slope, double* r_squared) {
  return guarded([&] {
    check(slope != nullptr, "null argument");
    lavreg::RateTable table = lavreg::conditional_stability_rate(
        kappa, to_vector(deltas, n_deltas, "null deltas"), c);
    if (errors)
      for (int i = 0; i < n_deltas; ++i)
        errors[i] = table.records[static_cast<size_t>(i)].error;
    *slope = table.fitted_slope;
    if (r_squared) *r_squared = table.r_squared;
  });
}

/* ------------------------------------------------------------ rate fitting */

int lavreg_fit_power_rate(const double* drivers, const double* errors, int n,
                          double* slope, double* intercept,
                          double* r_squared) {
  return guarded([&] {
    check(drivers != nullptr && errors != nullptr && slope != nullptr,
          "null argument");
    std::vector<lavreg::RateRecord> records;
    for (int i = 0; i < n; ++i) records.push_back({drivers[i], errors[i]});
    lavreg::PowerFit fit = lavreg::fit_power_rate(records);
    *slope = fit.slope;
    if (intercept) *intercept = fit.intercept;
    if (r_squared) *r_squared = fit.r_squared;
  });
}

int lavreg_fit_log_rate(const double* drivers, const double* errors, int n,
                        double* q, double* K, double* r_squared) {
  return guarded([&] {
    check(drivers != nullptr && errors != nullptr && q != nullptr,
          "null argument");
    std::vector<lavreg::RateRecord> records;
    for (int i = 0; i < n; ++i) records.push_back({drivers[i], errors[i]});
    lavreg::LogFit fit = lavreg::fit_log_rate(records);
    *q = fit.q;
    if (K) *K = fit.K;
    if (r_squared) *r_squared = fit.r_squared;
  });
}

/* --------------------------------------------------------------- scenarios */

int lavreg_scenario_count(void) {
  static const int count = static_cast<int>(lavreg::builtin_scenarios().size());
  return count;
}

int lavreg_scenario_name(int index, char* buf, int buflen) {
  return guarded([&] {
    const auto all = lavreg::builtin_scenarios();
    check(index >= 0 && index < static_cast<int>(all.size()),
          "scenario index out of range");
    copy_string(all[static_cast<size_t>(index)].name(), buf, buflen);
  });
}

int lavreg_scenario_config_json(const char* name, char** out) {
  return guarded([&] {
    check(name != nullptr && out != nullptr, "null argument");
    const lavreg::Scenario& s = lavreg::builtin_scenario(name);
    std::string dump = s.config.dump(2);
    char* buf = static_cast<char*>(std::malloc(dump.size() + 1));
    lavreg::require(buf != nullptr, lavreg::ErrorCode::internal,
                    "allocation failed");
    std::memcpy(buf, dump.c_str(), dump.size() + 1);
    *out = buf;
  });
}

void lavreg_string_free(char* s) { std::free(s); }

int lavreg_run_scenario_file(const char* json_path, const char* out_dir,
                             int grid_n_override, int64_t seed_override,
                             lavreg_check_callback cb, void* ctx,
                             int* all_pass) {
  return guarded([&] {
    check(json_path != nullptr && out_dir != nullptr, "null argument");
    lavreg::Scenario s = lavreg::load_scenario(json_path);
    lavreg::RunResult result = lavreg::run_scenario(
        s, out_dir, make_overrides(grid_n_override, seed_override));
    report_checks(result, cb, ctx);
    if (all_pass) *all_pass = result.all_pass() ? 1 : 0;
  });
}

int lavreg_run_scenario_named(const char* name, const char* out_dir,
                              int grid_n_override, int64_t seed_override,
                              lavreg_check_callback cb, void* ctx,
                              int* all_pass) {
  return guarded([&] {
    check(name != nullptr && out_dir != nullptr, "null argument");
    const lavreg::Scenario& s = lavreg::builtin_scenario(name);
    lavreg::RunResult result = lavreg::run_scenario(
        s, out_dir, make_overrides(grid_n_override, seed_override));
    report_checks(result, cb, ctx);
    if (all_pass) *all_pass = result.all_pass() ? 1 : 0;
  });
}

int lavreg_run_suite(const char* out_dir, int grid_n_override,
                     int64_t seed_override, lavreg_check_callback cb,
                     void* ctx, int* all_pass) {
  return guarded([&] {
    check(out_dir != nullptr, "null argument");
    bool ok = true;
    for (const auto& s : lavreg::builtin_scenarios()) {
      try {
        lavreg::RunResult result = lavreg::run_scenario(
            s, out_dir, make_overrides(grid_n_override, seed_override));
        report_checks(result, cb, ctx);
        ok = ok && result.all_pass();
      } catch (const std::exception& e) {
        // One broken scenario (e.g. an override the scenario cannot satisfy)
        // must not silence the rest of the suite.
        ok = false;
        if (cb) cb(s.name().c_str(), "run-error", 0, 0.0, e.what(), ctx);
      }
    }
    if (all_pass) *all_pass = ok ? 1 : 0;
  });
}

}  // extern "C"
