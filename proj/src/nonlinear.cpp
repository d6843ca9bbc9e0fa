#include "nonlinear.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "errors.hpp"

namespace lavreg {

GridPtr make_scalar_grid() {
  static GridPtr grid = std::make_shared<Grid>(std::vector<double>{0.5},
                                               std::vector<double>{1.0});
  return grid;
}

MonotoneMap MonotoneMap::scalar(std::string label,
                                std::function<double(double)> f,
                                std::function<double(double)> df,
                                std::optional<double> lipschitz_hint,
                                std::optional<double> k0_hint) {
  MonotoneMap map;
  map.grid_ = make_scalar_grid();
  map.label_ = std::move(label);
  map.scalar_f_ = std::move(f);
  map.scalar_df_ = std::move(df);
  map.lipschitz_hint_ = lipschitz_hint;
  map.k0_hint_ = k0_hint;
  return map;
}

MonotoneMap MonotoneMap::on_grid(
    GridPtr grid, std::string label,
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f,
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian,
    std::optional<double> lipschitz_hint, std::optional<double> k0_hint) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  MonotoneMap map;
  map.grid_ = std::move(grid);
  map.label_ = std::move(label);
  map.grid_f_ = std::move(f);
  map.grid_jac_ = std::move(jacobian);
  map.lipschitz_hint_ = lipschitz_hint;
  map.k0_hint_ = k0_hint;
  return map;
}

MonotoneMap MonotoneMap::from_linear(const LinearMonotoneOperator& A) {
  Eigen::MatrixXd M = A.matrix();
  return on_grid(
      A.grid(), A.label(),
      [M](const Eigen::VectorXd& x) { return Eigen::VectorXd(M * x); },
      [M](const Eigen::VectorXd&) { return M; });
}

GridFunction MonotoneMap::evaluate(const GridFunction& x) const {
  require(same_grid(x.grid, grid_), ErrorCode::grid_mismatch,
          "map evaluate: x lives on a different grid");
  if (scalar_f_)
    return GridFunction(grid_, Eigen::VectorXd::Constant(1, scalar_f_(x.values[0])));
  return GridFunction(grid_, grid_f_(x.values));
}

LinearMonotoneOperator MonotoneMap::derivative_at(const GridFunction& x) const {
  require(same_grid(x.grid, grid_), ErrorCode::grid_mismatch,
          "derivative_at: x lives on a different grid");
  if (scalar_df_) {
    double d = scalar_df_(x.values[0]);
    require(std::isfinite(d), ErrorCode::invalid_argument,
            "derivative_at: derivative of '" + label_ +
                "' is unbounded at the requested point");
    Eigen::MatrixXd M(1, 1);
    M(0, 0) = d;
    return LinearMonotoneOperator(grid_, std::move(M), label_ + "'");
  }
  return LinearMonotoneOperator(grid_, grid_jac_(x.values), label_ + "'");
}

double MonotoneMap::eval_scalar(double x) const {
  require(static_cast<bool>(scalar_f_), ErrorCode::unsupported,
          "eval_scalar on a grid-dimension map");
  return scalar_f_(x);
}

double MonotoneMap::derivative_scalar(double x) const {
  require(static_cast<bool>(scalar_df_), ErrorCode::unsupported,
          "derivative_scalar on a grid-dimension map");
  return scalar_df_(x);
}

MonotoneMap power_link_map(double kappa) {
  require(kappa > 0.0, ErrorCode::invalid_argument,
          "power_link_map: kappa must be positive");
  auto f = [kappa](double x) {
    if (x < -1.0) return -1.0;
    if (x <= 0.0) return -std::pow(-x, kappa);
    if (x <= 1.0) return std::pow(x, kappa);
    return 1.0;
  };
  auto df = [kappa](double x) {
    if (x < -1.0 || x > 1.0) return 0.0;
    return kappa * std::pow(std::abs(x), kappa - 1.0);  // +inf at 0 for kappa<1
  };
  return MonotoneMap::scalar("power-link(kappa=" + std::to_string(kappa) + ")",
                             f, df);
}

MonotoneMap exp_link_map(double ball_radius) {
  require(ball_radius > 0.0, ErrorCode::invalid_argument,
          "exp_link_map: ball radius must be positive");
  double k0 = std::expm1(2.0 * ball_radius) / (2.0 * ball_radius);
  return MonotoneMap::scalar(
      "exp-link", [](double x) { return std::expm1(x); },
      [](double x) { return std::exp(x); }, std::nullopt, k0);
}

NonlinearProblem make_nonlinear_problem(MonotoneMap F, GridFunction x_true,
                                        GridFunction x_bar,
                                        double ball_radius) {
  require(same_grid(x_true.grid, F.grid()) && same_grid(x_bar.grid, F.grid()),
          ErrorCode::grid_mismatch,
          "make_nonlinear_problem: functions must live on the map's grid");
  require(ball_radius > norm(x_true - x_bar), ErrorCode::invalid_argument,
          "make_nonlinear_problem: ball radius must exceed ||x_true - x_bar||");
  GridFunction y = F.evaluate(x_true);
  return NonlinearProblem{std::move(F), std::move(x_true), std::move(x_bar),
                          std::move(y), ball_radius};
}

NonlinearProblem make_scalar_problem(MonotoneMap F, double x_true,
                                     double x_bar, double ball_radius) {
  require(F.is_scalar(), ErrorCode::invalid_argument,
          "make_scalar_problem: map is not scalar");
  GridPtr g = F.grid();
  return make_nonlinear_problem(
      std::move(F), GridFunction(g, Eigen::VectorXd::Constant(1, x_true)),
      GridFunction(g, Eigen::VectorXd::Constant(1, x_bar)), ball_radius);
}

namespace {

double solve_scalar_impl(const MonotoneMap& F, double x_bar, double y_delta,
                         double alpha, double tol, SolveInfo* info) {
  auto G = [&](double x) { return F.eval_scalar(x) + alpha * (x - x_bar) - y_delta; };
  const double target = tol * std::max(1.0, std::abs(y_delta));

  // G is strictly increasing and coercive through the alpha x term.
  double lo = x_bar - 1.0, hi = x_bar + 1.0;
  double glo = G(lo), ghi = G(hi);
  for (int k = 0; k < 200 && glo > 0.0; ++k) {
    lo = x_bar + 2.0 * (lo - x_bar);
    glo = G(lo);
  }
  for (int k = 0; k < 200 && ghi < 0.0; ++k) {
    hi = x_bar + 2.0 * (hi - x_bar);
    ghi = G(hi);
  }
  require(glo <= 0.0 && ghi >= 0.0, ErrorCode::no_convergence,
          "scalar solve: failed to bracket a root");

  double x = 0.5 * (lo + hi);
  int it = 0;
  for (; it < 500; ++it) {
    double g = G(x);
    if (std::abs(g) <= target) break;
    if (g > 0.0)
      hi = x;
    else
      lo = x;
    double d = F.derivative_scalar(x) + alpha;
    double next = x - g / d;
    if (!std::isfinite(next) || next <= lo || next >= hi)
      next = 0.5 * (lo + hi);  // bisection safeguard
    if (next == x) break;
    x = next;
  }
  double res = std::abs(G(x));
  require(res <= target, ErrorCode::no_convergence,
          "scalar solve: residual " + std::to_string(res) +
              " above tolerance after " + std::to_string(it) + " iterations");
  if (info) {
    info->iterations = it;
    info->residual = res;
    info->method = "bracketed-newton";
  }
  return x;
}

GridFunction solve_grid_impl(const NonlinearProblem& P,
                             const GridFunction& y_delta, double alpha,
                             double tol, SolveInfo* info) {
  const double target = tol * std::max(1.0, norm(y_delta));

  GridFunction x = P.x_bar;
  auto residual_of = [&](const GridFunction& xx) {
    return P.F.evaluate(xx) + alpha * (xx - P.x_bar) - y_delta;
  };
  GridFunction G = residual_of(x);
  double res = norm(G);
  int it = 0;
  bool stalled = false;
  for (; it < 200 && res > target; ++it) {
    LinearMonotoneOperator J = P.F.derivative_at(x);
    Eigen::MatrixXd Jm = J.matrix();
    Jm.diagonal().array() += alpha;
    Eigen::VectorXd step = Eigen::PartialPivLU<Eigen::MatrixXd>(Jm).solve(
        Eigen::VectorXd(-G.values));
    require(step.allFinite(), ErrorCode::no_convergence,
            "nonlinear solve: Newton step not finite");
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      GridFunction trial(x.grid, x.values + lambda * step);
      GridFunction Gt = residual_of(trial);
      double rt = norm(Gt);
      if (rt < res * (1.0 - 1e-4 * lambda)) {
        x = std::move(trial);
        G = std::move(Gt);
        res = rt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
  }

  std::string method = "newton";
  if (res > target) {
    // Picard fallback: F + alpha I is strongly monotone with modulus alpha
    // and Lipschitz constant L + alpha.
    require(P.F.lipschitz_hint().has_value(), ErrorCode::no_convergence,
            "nonlinear solve: Newton " +
                std::string(stalled ? "stalled" : "hit iteration cap") +
                " at residual " + std::to_string(res) +
                " and no Lipschitz hint for the Picard fallback");
    const double L = *P.F.lipschitz_hint();
    const double tau = alpha / ((L + alpha) * (L + alpha));
    method = "newton+picard";
    int picard = 0;
    for (; picard < 1000000 && res > target; ++picard) {
      x.values -= tau * G.values;
      G = residual_of(x);
      res = norm(G);
    }
    it += picard;
  }
  require(res <= target, ErrorCode::no_convergence,
          "nonlinear solve: residual " + std::to_string(res) +
              " above tolerance after " + std::to_string(it) + " iterations");
  if (info) {
    info->iterations = it;
    info->residual = res;
    info->method = method;
  }
  return x;
}

}  // namespace

GridFunction solve_lavrentiev_nonlinear(const NonlinearProblem& P,
                                        const GridFunction& y_delta,
                                        double alpha, double tol,
                                        SolveInfo* info) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "solve_lavrentiev_nonlinear: alpha must be positive");
  require(tol > 0.0, ErrorCode::invalid_argument,
          "solve_lavrentiev_nonlinear: tol must be positive");
  require(same_grid(y_delta.grid, P.F.grid()), ErrorCode::grid_mismatch,
          "solve_lavrentiev_nonlinear: data lives on a different grid");
  if (P.F.is_scalar()) {
    double x = solve_scalar_impl(P.F, P.x_bar.values[0], y_delta.values[0],
                                 alpha, tol, info);
    return GridFunction(P.F.grid(), Eigen::VectorXd::Constant(1, x));
  }
  return solve_grid_impl(P, y_delta, alpha, tol, info);
}

double solve_scalar(const NonlinearProblem& P, double y_delta, double alpha,
                    double tol, SolveInfo* info) {
  require(P.F.is_scalar(), ErrorCode::invalid_argument,
          "solve_scalar: problem is not scalar");
  require(alpha > 0.0 && tol > 0.0, ErrorCode::invalid_argument,
          "solve_scalar: alpha and tol must be positive");
  return solve_scalar_impl(P.F, P.x_bar.values[0], y_delta, alpha, tol, info);
}

double bias_nonlinear(const NonlinearProblem& P, double alpha, double tol,
                      SolveInfo* info) {
  GridFunction x = solve_lavrentiev_nonlinear(P, P.y, alpha, tol, info);
  return norm(x - P.x_true);
}

TransferCheck bias_transfer_check(const NonlinearProblem& P, double k0,
                                  const std::vector<double>& alphas,
                                  double tol) {
  const double gap = norm(P.x_true - P.x_bar);
  require(gap > 1e-14, ErrorCode::invalid_argument,
          "bias_transfer_check: x_true = x_bar gives zero linear bias");
  require(k0 > 0.0 && k0 * gap < 2.0, ErrorCode::invalid_argument,
          "bias_transfer_check: requires k0 ||x_true - x_bar|| < 2");

  LinearProblem linearized = make_linear_problem(
      P.F.derivative_at(P.x_true), P.x_true, P.x_bar);
  TransferCheck out;
  out.C = (2.0 + 2.0 * k0 * gap) / (2.0 - k0 * gap);
  for (double a : alphas) {
    double bf = bias_nonlinear(P, a, tol);
    double ba = bias_linear(linearized, a);
    require(ba > 0.0, ErrorCode::invalid_argument,
            "bias_transfer_check: zero linear bias at alpha = " +
                std::to_string(a));
    out.ratios.emplace_back(a, bf / ba);
  }
  return out;
}

RateTable conditional_stability_rate(double kappa,
                                     const std::vector<double>& deltas,
                                     double c) {
  require(kappa > 0.0, ErrorCode::invalid_argument,
          "conditional_stability_rate: kappa must be positive");
  require(c > 0.0, ErrorCode::invalid_argument,
          "conditional_stability_rate: c must be positive");
  for (size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] > 0.0, ErrorCode::invalid_argument,
            "conditional_stability_rate: deltas must be positive");
    if (i > 0)
      require(deltas[i] < deltas[i - 1], ErrorCode::invalid_argument,
              "conditional_stability_rate: deltas must be decreasing");
  }
  NonlinearProblem P = make_scalar_problem(power_link_map(kappa), 0.0, 0.0, 1.0);

  std::vector<RateRecord> records;
  const double tol = 1e-12;
  for (double d : deltas) {
    double alpha = c * d;
    double xp = std::abs(solve_scalar(P, d, alpha, tol));
    double xm = std::abs(solve_scalar(P, -d, alpha, tol));
    records.push_back({d, std::max(xp, xm)});
  }
  PowerFit fit = fit_power_rate(records);
  RateTable table;
  table.records = std::move(records);
  table.regime = RateTable::Regime::power;
  table.fitted_slope = fit.slope;
  table.fitted_intercept = fit.intercept;
  table.r_squared = fit.r_squared;
  return table;
}

InequalityChecks check_inequalities_nonlinear(const NonlinearProblem& P,
                                              const GridFunction& y_delta,
                                              double delta, double alpha,
                                              double tol) {
  InequalityChecks c;
  c.delta = delta;
  c.alpha = alpha;

  GridFunction x = solve_lavrentiev_nonlinear(P, y_delta, alpha, tol);
  GridFunction x_clean = solve_lavrentiev_nonlinear(P, P.y, alpha, tol);
  GridFunction err = x - P.x_true;
  GridFunction guess_gap = P.x_true - P.x_bar;
  const double err_norm = norm(err);
  const double noise_over_alpha = delta / alpha;

  c.ie1_lhs = err_norm * err_norm;
  c.ie1_rhs = inner(guess_gap, P.x_true - x) + noise_over_alpha * err_norm;
  c.ie2_lhs = err_norm;
  c.ie2_rhs = norm(guess_gap) + noise_over_alpha;
  c.ie3_lhs = norm(P.F.evaluate(x) - P.y);
  c.ie3_rhs = alpha * norm(guess_gap) + delta;
  c.gap = norm(x_clean - x);
  c.gap_bound = noise_over_alpha;
  c.equation_residual =
      norm(P.F.evaluate(x) + alpha * (x - P.x_bar) - y_delta);
  return c;
}

}  // namespace lavreg
