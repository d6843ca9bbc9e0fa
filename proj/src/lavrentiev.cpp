#include "lavrentiev.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace lavreg {

LinearProblem make_linear_problem(LinearMonotoneOperator A,
                                  GridFunction x_true, GridFunction x_bar) {
  require(same_grid(x_true.grid, A.grid()) && same_grid(x_bar.grid, A.grid()),
          ErrorCode::grid_mismatch,
          "make_linear_problem: solution and guess must live on the "
          "operator's grid");
  GridFunction y = A.apply(x_true);
  return LinearProblem{std::move(A), std::move(x_true), std::move(x_bar),
                       std::move(y)};
}

NoisyData make_noisy_data(const LinearProblem& P, double delta,
                          uint64_t seed) {
  require(delta >= 0.0, ErrorCode::invalid_argument,
          "make_noisy_data: delta must be nonnegative");
  if (delta == 0.0) return NoisyData{P.y, 0.0, seed};
  Eigen::VectorXd noise =
      detail::gaussian_vector(P.y.size(), seed ^ 0xA5A5A5A5A5A5A5A5ull);
  GridFunction nf(P.y.grid, std::move(noise));
  double nn = norm(nf);
  require(nn > 0.0, ErrorCode::internal, "degenerate noise draw");
  return NoisyData{P.y + (delta / nn) * nf, delta, seed};
}

GridFunction regularize_linear(const LinearProblem& P, const NoisyData& D,
                               double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "regularize_linear: alpha must be positive");
  GridFunction rhs = D.y_delta + alpha * P.x_bar;
  return resolvent_solve(P.A, alpha, rhs);
}

double bias_linear(const LinearProblem& P, double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "bias_linear: alpha must be positive");
  GridFunction diff = P.x_true - P.x_bar;
  return alpha * norm(resolvent_solve(P.A, alpha, diff));
}

double noise_propagation_gap(const LinearProblem& P, const NoisyData& D,
                             double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "noise_propagation_gap: alpha must be positive");
  NoisyData clean{P.y, 0.0, D.seed};
  return norm(regularize_linear(P, clean, alpha) -
              regularize_linear(P, D, alpha));
}

double total_error(const LinearProblem& P, const NoisyData& D, double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "total_error: alpha must be positive");
  return norm(regularize_linear(P, D, alpha) - P.x_true);
}

BiasCurve tabulate_bias(const LinearProblem& P,
                        const std::vector<double>& alphas) {
  require(!alphas.empty(), ErrorCode::invalid_argument,
          "tabulate_bias: empty alpha list");
  BiasCurve curve;
  curve.kind = BiasCurve::Kind::linear;
  curve.alphas = alphas;
  const double cap = norm(P.x_true - P.x_bar) + 1e-10;
  for (double a : alphas) {
    double b = bias_linear(P, a);
    require(b <= cap, ErrorCode::internal,
            "tabulate_bias: bias exceeds ||x_true - x_bar||");
    curve.values.push_back(b);
  }
  return curve;
}

ParameterRule ParameterRule::linear_rule(double c) {
  ParameterRule r;
  r.kind = Kind::linear;
  r.c = c;
  return r;
}

ParameterRule ParameterRule::power_rule(double c, double theta) {
  ParameterRule r;
  r.kind = Kind::power;
  r.c = c;
  r.theta = theta;
  return r;
}

ParameterRule ParameterRule::psi_rule(PsiTable table) {
  ParameterRule r;
  r.kind = Kind::psi_inverse;
  r.psi = std::move(table);
  return r;
}

double apriori_alpha(double delta, const ParameterRule& rule) {
  require(delta > 0.0, ErrorCode::invalid_argument,
          "apriori_alpha: delta must be positive");
  switch (rule.kind) {
    case ParameterRule::Kind::linear:
      require(rule.c > 0.0, ErrorCode::invalid_argument,
              "apriori_alpha: c must be positive");
      return rule.c * delta;
    case ParameterRule::Kind::power:
      require(rule.c > 0.0, ErrorCode::invalid_argument,
              "apriori_alpha: c must be positive");
      require(rule.theta > 0.0 && rule.theta <= 1.0,
              ErrorCode::invalid_argument,
              "apriori_alpha: power exponent must be in (0, 1]");
      return rule.c * std::pow(delta, rule.theta);
    case ParameterRule::Kind::psi_inverse: {
      require(rule.psi.has_value(), ErrorCode::invalid_argument,
              "apriori_alpha: psi_inverse rule needs a fitted distance model");
      const PsiTable& t = *rule.psi;
      require(t.alpha.size() >= 2 && t.alpha.size() == t.psi.size(),
              ErrorCode::invalid_argument,
              "apriori_alpha: psi table too short");
      require(delta >= t.psi.front() && delta <= t.psi.back(),
              ErrorCode::out_of_range,
              "apriori_alpha: delta outside tabulated Psi range");
      // Bisection on the sorted table, log-log interpolation in the bracket.
      auto it = std::lower_bound(t.psi.begin(), t.psi.end(), delta);
      size_t hi = std::min<size_t>(
          static_cast<size_t>(it - t.psi.begin()), t.psi.size() - 1);
      if (hi == 0) hi = 1;
      size_t lo = hi - 1;
      double s = (std::log(delta) - std::log(t.psi[lo])) /
                 (std::log(t.psi[hi]) - std::log(t.psi[lo]));
      return std::exp(std::log(t.alpha[lo]) +
                      s * (std::log(t.alpha[hi]) - std::log(t.alpha[lo])));
    }
  }
  fail(ErrorCode::internal, "apriori_alpha: unreachable");
}

double saturation_probe(const LinearProblem& P,
                        const std::vector<double>& alphas) {
  require(alphas.size() >= 4, ErrorCode::invalid_argument,
          "saturation_probe: need at least 4 alphas");
  for (size_t i = 1; i < alphas.size(); ++i)
    require(alphas[i] < alphas[i - 1] && alphas[i] > 0.0,
            ErrorCode::invalid_argument,
            "saturation_probe: alphas must be positive and decreasing");
  GridFunction diff = P.x_true - P.x_bar;
  require(norm(diff) > 1e-14, ErrorCode::invalid_argument,
          "saturation_probe: degenerate problem with x_true = x_bar");
  double lim = std::numeric_limits<double>::infinity();
  for (double a : alphas) lim = std::min(lim, bias_linear(P, a) / a);
  return lim;
}

InequalityChecks check_inequalities(const LinearProblem& P, const NoisyData& D,
                                    double alpha) {
  InequalityChecks c;
  c.delta = D.delta;
  c.alpha = alpha;

  GridFunction x = regularize_linear(P, D, alpha);
  GridFunction err = x - P.x_true;
  GridFunction guess_gap = P.x_true - P.x_bar;
  const double err_norm = norm(err);
  const double noise_over_alpha = D.delta / alpha;

  c.ie1_lhs = err_norm * err_norm;
  c.ie1_rhs = inner(guess_gap, P.x_true - x) + noise_over_alpha * err_norm;
  c.ie2_lhs = err_norm;
  c.ie2_rhs = norm(guess_gap) + noise_over_alpha;
  c.ie3_lhs = norm(P.A.apply(x) - P.y);
  c.ie3_rhs = alpha * norm(guess_gap) + D.delta;
  c.gap = noise_propagation_gap(P, D, alpha);
  c.gap_bound = noise_over_alpha;
  c.equation_residual =
      norm(P.A.apply(x) + alpha * (x - P.x_bar) - D.y_delta);
  return c;
}

}  // namespace lavreg
