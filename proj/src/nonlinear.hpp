#ifndef LAVREG_NONLINEAR_HPP
#define LAVREG_NONLINEAR_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "grid.hpp"
#include "lavrentiev.hpp"
#include "linops.hpp"

namespace lavreg {

/// 1-point grid carrying scalar testbeds.
GridPtr make_scalar_grid();

/// Nonlinear monotone map with Frechet-derivative access. Scalar maps live
/// on the 1-point grid; evaluation must be reentrant.
class MonotoneMap {
public:
  static MonotoneMap scalar(std::string label, std::function<double(double)> f,
                            std::function<double(double)> df,
                            std::optional<double> lipschitz_hint = {},
                            std::optional<double> k0_hint = {});
  static MonotoneMap on_grid(
      GridPtr grid, std::string label,
      std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f,
      std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian,
      std::optional<double> lipschitz_hint = {},
      std::optional<double> k0_hint = {});
  static MonotoneMap from_linear(const LinearMonotoneOperator& A);

  const GridPtr& grid() const { return grid_; }
  const std::string& label() const { return label_; }
  bool is_scalar() const { return grid_->size() == 1; }
  std::optional<double> lipschitz_hint() const { return lipschitz_hint_; }
  std::optional<double> k0_hint() const { return k0_hint_; }

  GridFunction evaluate(const GridFunction& x) const;
  LinearMonotoneOperator derivative_at(const GridFunction& x) const;

  double eval_scalar(double x) const;
  double derivative_scalar(double x) const;

private:
  MonotoneMap() = default;

  GridPtr grid_;
  std::string label_;
  std::function<double(double)> scalar_f_, scalar_df_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grid_f_;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> grid_jac_;
  std::optional<double> lipschitz_hint_, k0_hint_;
};

/// The clipped power map: -1 below -1, sign(x)|x|^kappa on [-1,1], 1 above.
MonotoneMap power_link_map(double kappa);

/// F(x) = e^x - 1 with the conservative nonlinearity constant
/// k0 = (e^{2r} - 1)/(2r) for the given ball radius.
MonotoneMap exp_link_map(double ball_radius);

struct NonlinearProblem {
  MonotoneMap F;
  GridFunction x_true;
  GridFunction x_bar;
  GridFunction y;  // F(x_true)
  double ball_radius = 0.0;
};

NonlinearProblem make_nonlinear_problem(MonotoneMap F, GridFunction x_true,
                                        GridFunction x_bar,
                                        double ball_radius);
NonlinearProblem make_scalar_problem(MonotoneMap F, double x_true,
                                     double x_bar, double ball_radius);

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;
  std::string method;  // "newton", "newton+picard", "bracketed-newton"
};

/// Solves F(x) + alpha (x - x_bar) = y_delta to the stated residual.
/// Grid problems use damped Newton (Jacobian F'(x) + alpha I) with a Picard
/// fallback x <- x - tau G(x), tau = alpha/(L+alpha)^2, when a Lipschitz hint
/// is available; scalar problems use a bracketed Newton/bisection hybrid on
/// the strictly increasing G.
GridFunction solve_lavrentiev_nonlinear(const NonlinearProblem& P,
                                        const GridFunction& y_delta,
                                        double alpha, double tol,
                                        SolveInfo* info = nullptr);

double solve_scalar(const NonlinearProblem& P, double y_delta, double alpha,
                    double tol, SolveInfo* info = nullptr);

/// ||x_alpha - x_true|| for noise-free data.
double bias_nonlinear(const NonlinearProblem& P, double alpha, double tol,
                      SolveInfo* info = nullptr);

struct TransferCheck {
  std::vector<std::pair<double, double>> ratios;  // (alpha, B^F/B^A)
  double C = 0.0;  // (2 + 2 k0 ||x_true - x_bar||) / (2 - k0 ||x_true - x_bar||)
};

/// Ratio of the nonlinear bias to the linear bias of A = F'(x_true).
TransferCheck bias_transfer_check(const NonlinearProblem& P, double k0,
                                  const std::vector<double>& alphas,
                                  double tol);

/// Scalar conditional-stability experiment at x_true = 0: alpha = c delta,
/// worst-sign data y_delta = +-delta, fitted log-log slope (expected ~ 1/kappa).
RateTable conditional_stability_rate(double kappa,
                                     const std::vector<double>& deltas,
                                     double c);

/// IE1-IE3 and the noise-propagation bound for a nonlinear solve.
InequalityChecks check_inequalities_nonlinear(const NonlinearProblem& P,
                                              const GridFunction& y_delta,
                                              double delta, double alpha,
                                              double tol);

}  // namespace lavreg

#endif
