#ifndef LAVREG_LAVRENTIEV_HPP
#define LAVREG_LAVRENTIEV_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "grid.hpp"
#include "linops.hpp"

namespace lavreg {

/// Linear problem A x = y with exact data generated from x_true.
struct LinearProblem {
  LinearMonotoneOperator A;
  GridFunction x_true;
  GridFunction x_bar;
  GridFunction y;  // A x_true, never supplied independently
};

LinearProblem make_linear_problem(LinearMonotoneOperator A,
                                  GridFunction x_true, GridFunction x_bar);

/// Noise scaled to have weighted norm exactly delta.
struct NoisyData {
  GridFunction y_delta;
  double delta = 0.0;
  uint64_t seed = 0;
};

NoisyData make_noisy_data(const LinearProblem& P, double delta, uint64_t seed);

/// x_alpha^delta = (A + alpha I)^{-1} (y_delta + alpha x_bar).
GridFunction regularize_linear(const LinearProblem& P, const NoisyData& D,
                               double alpha);

/// alpha * ||(A + alpha I)^{-1}(x_true - x_bar)||.
double bias_linear(const LinearProblem& P, double alpha);

/// ||x_alpha - x_alpha^delta||; bounded by delta/alpha.
double noise_propagation_gap(const LinearProblem& P, const NoisyData& D,
                             double alpha);

/// ||x_alpha^delta - x_true||.
double total_error(const LinearProblem& P, const NoisyData& D, double alpha);

struct BiasCurve {
  std::vector<double> alphas;  // decreasing
  std::vector<double> values;
  enum class Kind { linear, nonlinear } kind = Kind::linear;
};

BiasCurve tabulate_bias(const LinearProblem& P,
                        const std::vector<double>& alphas);

/// Monotone tabulation of Psi(alpha) = alpha * d(Phi^{-1}(alpha)),
/// both columns increasing. Produced by the srcfit module.
struct PsiTable {
  std::vector<double> alpha;
  std::vector<double> psi;
};

struct ParameterRule {
  enum class Kind { linear, power, psi_inverse } kind = Kind::linear;
  double c = 1.0;
  double theta = 1.0;  // power rule exponent, in (0, 1]
  std::optional<PsiTable> psi;

  static ParameterRule linear_rule(double c = 1.0);
  static ParameterRule power_rule(double c, double theta);
  static ParameterRule psi_rule(PsiTable table);
};

double apriori_alpha(double delta, const ParameterRule& rule);

/// liminf estimate of B(alpha)/alpha over the alpha list (its minimum).
double saturation_probe(const LinearProblem& P,
                        const std::vector<double>& alphas);

/// Per-solve record of the basic inequalities and the noise-propagation
/// bound; slack convention is lhs <= rhs + tol.
struct InequalityChecks {
  double delta = 0.0;
  double alpha = 0.0;
  double ie1_lhs = 0.0, ie1_rhs = 0.0;
  double ie2_lhs = 0.0, ie2_rhs = 0.0;
  double ie3_lhs = 0.0, ie3_rhs = 0.0;
  double gap = 0.0, gap_bound = 0.0;
  double equation_residual = 0.0;

  bool pass(double tol) const {
    return ie1_lhs <= ie1_rhs + tol && ie2_lhs <= ie2_rhs + tol &&
           ie3_lhs <= ie3_rhs + tol && gap <= gap_bound + tol;
  }
};

InequalityChecks check_inequalities(const LinearProblem& P, const NoisyData& D,
                                    double alpha);

}  // namespace lavreg

#endif
