#ifndef LAVREG_LINOPS_HPP
#define LAVREG_LINOPS_HPP

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace lavreg {

enum class OperatorKind {
  multiplication,
  volterra,
  cesaro,
  skew,
  zero,
  identity,
  custom,
};

std::string kind_name(OperatorKind kind);

/// Dense-matrix realization of a bounded monotone operator on a grid.
/// Monotonicity is with respect to the weighted inner product; it is
/// sample-checked at construction. Immutable afterwards.
class LinearMonotoneOperator {
public:
  LinearMonotoneOperator(GridPtr grid, Eigen::MatrixXd matrix,
                         std::string label,
                         OperatorKind kind = OperatorKind::custom);

  const GridPtr& grid() const { return grid_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }
  OperatorKind kind() const { return kind_; }
  int size() const { return static_cast<int>(matrix_.rows()); }

  bool diagonal() const { return diagonal_; }
  bool lower_triangular() const { return lower_triangular_; }

  GridFunction apply(const GridFunction& f) const;
  /// Adjoint in the weighted inner product: W^{-1} M^T W.
  GridFunction adjoint_apply(const GridFunction& f) const;

private:
  GridPtr grid_;
  Eigen::MatrixXd matrix_;
  std::string label_;
  OperatorKind kind_;
  bool diagonal_ = false;
  bool lower_triangular_ = false;
};

LinearMonotoneOperator multiplication_operator(
    const GridPtr& grid, const std::function<double(double)>& multiplier,
    const std::string& label = "multiplication");
LinearMonotoneOperator volterra_operator(const GridPtr& grid);
LinearMonotoneOperator cesaro_operator(const GridPtr& grid);
LinearMonotoneOperator skew_example();
LinearMonotoneOperator zero_operator(const GridPtr& grid);
LinearMonotoneOperator identity_operator(const GridPtr& grid);

/// Factorization of (M + alpha I) with structure-aware solves.
class ResolventSolver {
public:
  ResolventSolver(const LinearMonotoneOperator& A, double alpha);
  ~ResolventSolver();
  ResolventSolver(ResolventSolver&&) noexcept;
  ResolventSolver(const ResolventSolver&) = delete;
  ResolventSolver& operator=(const ResolventSolver&) = delete;

  bool singular() const { return singular_; }
  double condition_estimate() const { return condition_estimate_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& rhs) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool singular_ = false;
  double condition_estimate_ = 0.0;
};

/// Solves (A + alpha I) z = rhs, alpha > 0. Weighted residual is verified
/// against 1e-10 * norm(rhs) with one step of iterative refinement.
GridFunction resolvent_solve(const LinearMonotoneOperator& A, double alpha,
                             const GridFunction& rhs);

/// Weighted L2 -> L2 operator norm of (A + alpha I)^{-1}, computed as
/// 1/sigma_min(W^{1/2}(A+alpha I)W^{-1/2}) by power iteration on the inverse
/// Gram operator (relative tolerance 1e-6).
double estimate_resolvent_norm(const LinearMonotoneOperator& A, double alpha);

/// Weighted operator norm of (A + alpha I)^{-1} A.
double estimate_contraction_norm(const LinearMonotoneOperator& A,
                                 double alpha);

/// Weighted operator norm of A itself.
double operator_norm(const LinearMonotoneOperator& A);

struct PosednessReport {
  std::vector<std::pair<double, double>> resolvent_norms;  // (alpha, norm)
  enum class Classification { well_posed, ill_posed } classification;
  double K = 0.0;             // bound when well-posed
  double ceiling = 0.0;       // estimated ||A_h^{-1}||, inf when singular
  double smallest_resolvable_alpha = 0.0;  // 0 when none resolvable
};

/// Fits estimated resolvent norms against 1/alpha. Ill-posed when the norm
/// still tracks 1/alpha (ratio >= 0.5) at the smallest alpha the grid can
/// resolve; well-posed with plateau K otherwise.
PosednessReport classify_posedness(const LinearMonotoneOperator& A,
                                   const std::vector<double>& alphas);

/// Balakrishnan fractional power A^p x, 0 < p <= 1. The integral is taken
/// through s = e^u and evaluated by composite Gauss-Legendre on [-U, U];
/// U and the panel count are doubled until the result is stable to 1e-8.
GridFunction fractional_power_apply(const LinearMonotoneOperator& A, double p,
                                    const GridFunction& x);

/// Min over random unit vectors of inner(Af, f), also bounded by the exact
/// minimum eigenvalue of the symmetrized weighted matrix; returns the smaller.
double monotonicity_defect(const LinearMonotoneOperator& A, int trials);

/// Matrix as row-major full-precision CSV plus a JSON sidecar
/// {label, n, kind}.
void export_operator(const LinearMonotoneOperator& A,
                     const std::string& csv_path,
                     const std::string& json_path);

namespace detail {

/// Largest singular value of the weighted-metric representation
/// D M D^{-1} (D = diag(sqrt(w))) of a linear map given by its plain-coordinate
/// apply and transpose-apply, via power iteration on the Gram operator.
double weighted_norm_estimate(
    const Grid& grid,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_trans,
    double rel_tol = 1e-6, int max_iter = 20000);

/// Deterministic standard-normal vector (splitmix64 + Box-Muller).
Eigen::VectorXd gaussian_vector(int n, uint64_t seed);

}  // namespace detail

}  // namespace lavreg

#endif
