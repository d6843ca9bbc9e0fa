#include "linops.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "errors.hpp"
#include "json.hpp"

namespace lavreg {

namespace detail {

namespace {
uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(uint64_t& state) {
  return (splitmix64(state) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}
}  // namespace

Eigen::VectorXd gaussian_vector(int n, uint64_t seed) {
  uint64_t state = seed;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; i += 2) {
    double u1 = uniform01(state);
    double u2 = uniform01(state);
    double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < n) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  return v;
}

double weighted_norm_estimate(
    const Grid& grid,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_trans,
    double rel_tol, int max_iter) {
  const int n = grid.size();
  const Eigen::ArrayXd d = grid.weight_vector().array().sqrt();

  // Gram operator of S = D M D^{-1}: v -> D^{-1} M^T D^2 M D^{-1} v.
  auto gram = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd u = (v.array() / d).matrix();
    u = apply(u);
    u = (u.array() * d * d).matrix();
    u = apply_trans(u);
    return Eigen::VectorXd((u.array() / d).matrix());
  };

  Eigen::VectorXd v = gaussian_vector(n, 0x5EEDBA5Eull);
  v.normalize();
  double lambda = 0.0, lambda_old = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Eigen::VectorXd z = gram(v);
    lambda = z.norm();
    if (lambda <= 1e-300 || !std::isfinite(lambda)) return 0.0;
    v = z / lambda;
    if (k >= 3 && std::abs(lambda - lambda_old) <= rel_tol * lambda)
      return std::sqrt(lambda);
    lambda_old = lambda;
  }
  return std::sqrt(lambda);
}

}  // namespace detail

std::string kind_name(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::multiplication: return "multiplication";
    case OperatorKind::volterra: return "volterra";
    case OperatorKind::cesaro: return "cesaro";
    case OperatorKind::skew: return "skew";
    case OperatorKind::zero: return "zero";
    case OperatorKind::identity: return "identity";
    case OperatorKind::custom: return "custom";
  }
  return "custom";
}

LinearMonotoneOperator::LinearMonotoneOperator(GridPtr grid,
                                               Eigen::MatrixXd matrix,
                                               std::string label,
                                               OperatorKind kind)
    : grid_(std::move(grid)),
      matrix_(std::move(matrix)),
      label_(std::move(label)),
      kind_(kind) {
  require(grid_ != nullptr, ErrorCode::invalid_argument, "operator: null grid");
  require(matrix_.rows() == grid_->size() && matrix_.cols() == grid_->size(),
          ErrorCode::invalid_argument,
          "operator: matrix must be n x n for the grid");
  require(matrix_.allFinite(), ErrorCode::invalid_argument,
          "operator: matrix entries must be finite");

  const int n = size();
  diagonal_ = true;
  lower_triangular_ = true;
  for (int i = 0; i < n && (diagonal_ || lower_triangular_); ++i)
    for (int j = 0; j < n; ++j) {
      if (i != j && matrix_(i, j) != 0.0) diagonal_ = false;
      if (j > i && matrix_(i, j) != 0.0) lower_triangular_ = false;
    }
  if (diagonal_) lower_triangular_ = true;

  // Sampled monotonicity check in the weighted inner product.
  const Eigen::VectorXd& w = grid_->weight_vector();
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::VectorXd f =
        detail::gaussian_vector(n, 0xC0FFEEull + static_cast<uint64_t>(trial));
    double nf2 = (w.array() * f.array().square()).sum();
    if (nf2 <= 0.0) continue;
    f /= std::sqrt(nf2);
    double q = (w.array() * (matrix_ * f).array() * f.array()).sum();
    require(q >= -1e-10, ErrorCode::invalid_argument,
            "operator '" + label_ + "' fails the monotonicity sample check");
  }
}

GridFunction LinearMonotoneOperator::apply(const GridFunction& f) const {
  require(same_grid(f.grid, grid_), ErrorCode::grid_mismatch,
          "apply: function lives on a different grid");
  return GridFunction(grid_, matrix_ * f.values);
}

GridFunction LinearMonotoneOperator::adjoint_apply(const GridFunction& f) const {
  require(same_grid(f.grid, grid_), ErrorCode::grid_mismatch,
          "adjoint_apply: function lives on a different grid");
  const Eigen::ArrayXd w = grid_->weight_vector().array();
  Eigen::VectorXd v = matrix_.transpose() * (w * f.values.array()).matrix();
  return GridFunction(grid_, (v.array() / w).matrix());
}

LinearMonotoneOperator multiplication_operator(
    const GridPtr& grid, const std::function<double(double)>& multiplier,
    const std::string& label) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  const int n = grid->size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double m = multiplier(grid->node(i));
    require(std::isfinite(m), ErrorCode::invalid_argument,
            "multiplication_operator: multiplier not finite at a node");
    require(m >= 0.0, ErrorCode::invalid_argument,
            "multiplication_operator: multiplier negative at a node");
    M(i, i) = m;
  }
  return LinearMonotoneOperator(grid, std::move(M), label,
                                OperatorKind::multiplication);
}

namespace {
void require_uniform(const GridPtr& grid, const char* who) {
  const int n = grid->size();
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    require(std::abs(grid->weight(i) - h) <= 1e-14 &&
                std::abs(grid->node(i) - (i + 0.5) * h) <= 1e-14,
            ErrorCode::invalid_argument,
            std::string(who) + " requires the uniform midpoint grid");
  }
}
}  // namespace

LinearMonotoneOperator volterra_operator(const GridPtr& grid) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  require_uniform(grid, "volterra_operator");
  const int n = grid->size();
  const double h = 1.0 / n;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) V(i, j) = h;
    V(i, i) = 0.5 * h;
  }
  return LinearMonotoneOperator(grid, std::move(V), "volterra",
                                OperatorKind::volterra);
}

LinearMonotoneOperator cesaro_operator(const GridPtr& grid) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  require_uniform(grid, "cesaro_operator");
  const int n = grid->size();
  Eigen::MatrixXd C = volterra_operator(grid).matrix();
  for (int i = 0; i < n; ++i) C.row(i) /= grid->node(i);
  return LinearMonotoneOperator(grid, std::move(C), "cesaro",
                                OperatorKind::cesaro);
}

LinearMonotoneOperator skew_example() {
  GridPtr grid = make_uniform_grid(2);
  Eigen::MatrixXd A(2, 2);
  A << 0.0, -1.0, 1.0, 0.0;
  return LinearMonotoneOperator(grid, std::move(A), "skew",
                                OperatorKind::skew);
}

LinearMonotoneOperator zero_operator(const GridPtr& grid) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  return LinearMonotoneOperator(
      grid, Eigen::MatrixXd::Zero(grid->size(), grid->size()), "zero",
      OperatorKind::zero);
}

LinearMonotoneOperator identity_operator(const GridPtr& grid) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  return LinearMonotoneOperator(
      grid, Eigen::MatrixXd::Identity(grid->size(), grid->size()), "identity",
      OperatorKind::identity);
}

struct ResolventSolver::Impl {
  enum class Mode { diagonal, triangular, dense } mode;
  Eigen::VectorXd diag;          // diagonal mode
  Eigen::MatrixXd shifted;       // triangular mode
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // dense mode
};

ResolventSolver::ResolventSolver(const LinearMonotoneOperator& A, double alpha)
    : impl_(new Impl) {
  require(alpha >= 0.0, ErrorCode::invalid_argument,
          "resolvent: alpha must be nonnegative");
  const int n = A.size();
  if (A.diagonal()) {
    impl_->mode = Impl::Mode::diagonal;
    impl_->diag = A.matrix().diagonal().array() + alpha;
    double lo = impl_->diag.array().abs().minCoeff();
    double hi = impl_->diag.array().abs().maxCoeff();
    singular_ = lo <= 0.0;
    condition_estimate_ =
        singular_ ? std::numeric_limits<double>::infinity() : hi / lo;
  } else if (A.lower_triangular()) {
    impl_->mode = Impl::Mode::triangular;
    impl_->shifted = A.matrix();
    impl_->shifted.diagonal().array() += alpha;
    double lo = impl_->shifted.diagonal().array().abs().minCoeff();
    double hi = impl_->shifted.diagonal().array().abs().maxCoeff();
    singular_ = lo <= 0.0;
    condition_estimate_ =
        singular_ ? std::numeric_limits<double>::infinity() : hi / lo;
  } else {
    impl_->mode = Impl::Mode::dense;
    Eigen::MatrixXd shifted = A.matrix();
    shifted.diagonal().array() += alpha;
    impl_->lu.compute(shifted);
    double rcond = impl_->lu.rcond();
    singular_ = !(rcond > 1e4 * std::numeric_limits<double>::epsilon() / n);
    condition_estimate_ = rcond > 0.0
                              ? 1.0 / rcond
                              : std::numeric_limits<double>::infinity();
  }
}

ResolventSolver::~ResolventSolver() = default;
ResolventSolver::ResolventSolver(ResolventSolver&&) noexcept = default;

Eigen::VectorXd ResolventSolver::solve(const Eigen::VectorXd& rhs) const {
  require(!singular_, ErrorCode::singular,
          "resolvent solve on numerically singular operator, condition ~ " +
              std::to_string(condition_estimate_));
  switch (impl_->mode) {
    case Impl::Mode::diagonal:
      return (rhs.array() / impl_->diag.array()).matrix();
    case Impl::Mode::triangular:
      return impl_->shifted.triangularView<Eigen::Lower>().solve(rhs);
    case Impl::Mode::dense:
      return impl_->lu.solve(rhs);
  }
  return rhs;
}

Eigen::VectorXd ResolventSolver::solve_transposed(
    const Eigen::VectorXd& rhs) const {
  require(!singular_, ErrorCode::singular,
          "resolvent solve on numerically singular operator, condition ~ " +
              std::to_string(condition_estimate_));
  switch (impl_->mode) {
    case Impl::Mode::diagonal:
      return (rhs.array() / impl_->diag.array()).matrix();
    case Impl::Mode::triangular:
      return impl_->shifted.transpose()
          .triangularView<Eigen::Upper>()
          .solve(rhs);
    case Impl::Mode::dense:
      return impl_->lu.transpose().solve(rhs);
  }
  return rhs;
}

GridFunction resolvent_solve(const LinearMonotoneOperator& A, double alpha,
                             const GridFunction& rhs) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "resolvent_solve: alpha must be positive");
  require(same_grid(rhs.grid, A.grid()), ErrorCode::grid_mismatch,
          "resolvent_solve: rhs lives on a different grid");
  ResolventSolver solver(A, alpha);
  Eigen::VectorXd z = solver.solve(rhs.values);

  auto residual = [&](const Eigen::VectorXd& zz) {
    Eigen::VectorXd r = A.matrix() * zz + alpha * zz - rhs.values;
    return std::sqrt(
        (A.grid()->weight_vector().array() * r.array().square()).sum());
  };
  const double tol = 1e-10 * norm(rhs);
  if (residual(z) > tol) {
    Eigen::VectorXd r = rhs.values - (A.matrix() * z + alpha * z);
    z += solver.solve(r);
    require(residual(z) <= tol, ErrorCode::internal,
            "resolvent_solve: residual above 1e-10 after refinement, "
            "condition ~ " +
                std::to_string(solver.condition_estimate()));
  }
  return GridFunction(A.grid(), std::move(z));
}

double estimate_resolvent_norm(const LinearMonotoneOperator& A, double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "estimate_resolvent_norm: alpha must be positive");
  ResolventSolver solver(A, alpha);
  return detail::weighted_norm_estimate(
      *A.grid(), [&](const Eigen::VectorXd& v) { return solver.solve(v); },
      [&](const Eigen::VectorXd& v) { return solver.solve_transposed(v); });
}

double estimate_contraction_norm(const LinearMonotoneOperator& A,
                                 double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "estimate_contraction_norm: alpha must be positive");
  ResolventSolver solver(A, alpha);
  const Eigen::MatrixXd& M = A.matrix();
  return detail::weighted_norm_estimate(
      *A.grid(),
      [&](const Eigen::VectorXd& v) { return solver.solve(M * v); },
      [&](const Eigen::VectorXd& v) {
        return Eigen::VectorXd(M.transpose() * solver.solve_transposed(v));
      });
}

double operator_norm(const LinearMonotoneOperator& A) {
  const Eigen::MatrixXd& M = A.matrix();
  return detail::weighted_norm_estimate(
      *A.grid(), [&](const Eigen::VectorXd& v) { return M * v; },
      [&](const Eigen::VectorXd& v) { return M.transpose() * v; });
}

PosednessReport classify_posedness(const LinearMonotoneOperator& A,
                                   const std::vector<double>& alphas) {
  require(alphas.size() >= 3, ErrorCode::invalid_argument,
          "classify_posedness: need at least 3 alphas");
  for (size_t i = 0; i < alphas.size(); ++i) {
    require(alphas[i] > 0.0, ErrorCode::invalid_argument,
            "classify_posedness: alphas must be positive");
    if (i > 0)
      require(alphas[i] < alphas[i - 1], ErrorCode::invalid_argument,
              "classify_posedness: alphas must be decreasing");
  }
  require(alphas.front() / alphas.back() >= 100.0 * (1.0 - 1e-12),
          ErrorCode::invalid_argument,
          "classify_posedness: alphas must span at least 2 decades");

  PosednessReport report;
  for (double a : alphas) {
    double nrm = estimate_resolvent_norm(A, a);
    require(nrm <= (1.0 + 1e-8) / a, ErrorCode::internal,
            "classify_posedness: estimated norm exceeds 1/alpha bound");
    report.resolvent_norms.emplace_back(a, nrm);
  }

  // Grid ceiling ||A_h^{-1}||: beyond it a 1/alpha trend cannot be resolved.
  {
    ResolventSolver inv(A, 0.0);
    if (inv.singular()) {
      report.ceiling = std::numeric_limits<double>::infinity();
    } else {
      report.ceiling = detail::weighted_norm_estimate(
          *A.grid(), [&](const Eigen::VectorXd& v) { return inv.solve(v); },
          [&](const Eigen::VectorXd& v) { return inv.solve_transposed(v); });
    }
  }

  report.smallest_resolvable_alpha = 0.0;
  for (const auto& [a, nrm] : report.resolvent_norms) {
    (void)nrm;
    if (1.0 / a <= 0.5 * report.ceiling) report.smallest_resolvable_alpha = a;
  }

  if (report.smallest_resolvable_alpha > 0.0) {
    double nrm = 0.0;
    for (const auto& [a, v] : report.resolvent_norms)
      if (a == report.smallest_resolvable_alpha) nrm = v;
    double ratio = report.smallest_resolvable_alpha * nrm;
    if (ratio >= 0.5) {
      report.classification = PosednessReport::Classification::ill_posed;
      report.K = 0.0;
      return report;
    }
  }
  report.classification = PosednessReport::Classification::well_posed;
  report.K = 0.0;
  for (const auto& [a, v] : report.resolvent_norms)
    report.K = std::max(report.K, v);
  return report;
}

namespace {

// 10-point Gauss-Legendre abscissae/weights on [-1, 1].
constexpr double kGL10X[5] = {0.14887433898163121, 0.43339539412924719,
                              0.67940956829902441, 0.86506336668898451,
                              0.97390652851717172};
constexpr double kGL10W[5] = {0.29552422471475287, 0.26926671930999635,
                              0.21908636251598204, 0.14945134915058059,
                              0.066671344308688138};

Eigen::VectorXd balakrishnan_level(const LinearMonotoneOperator& A, double p,
                                   const Eigen::VectorXd& Ax, double U,
                                   int panels) {
  const int n = static_cast<int>(Ax.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  const double width = 2.0 * U / panels;
  for (int panel = 0; panel < panels; ++panel) {
    const double mid = -U + (panel + 0.5) * width;
    for (int k = 0; k < 5; ++k) {
      for (double sign : {-1.0, 1.0}) {
        const double u = mid + sign * 0.5 * width * kGL10X[k];
        const double wq = 0.5 * width * kGL10W[k];
        ResolventSolver solver(A, std::exp(u));
        acc += wq * std::exp(u * p) * solver.solve(Ax);
      }
    }
  }
  return std::sin(M_PI * p) / M_PI * acc;
}

}  // namespace

GridFunction fractional_power_apply(const LinearMonotoneOperator& A, double p,
                                    const GridFunction& x) {
  require(p > 0.0 && p <= 1.0, ErrorCode::invalid_argument,
          "fractional_power_apply: p must be in (0, 1]");
  require(same_grid(x.grid, A.grid()), ErrorCode::grid_mismatch,
          "fractional_power_apply: x lives on a different grid");
  if (p == 1.0) return A.apply(x);

  const Eigen::VectorXd Ax = A.matrix() * x.values;
  const Eigen::VectorXd& w = A.grid()->weight_vector();
  auto wnorm = [&](const Eigen::VectorXd& v) {
    return std::sqrt((w.array() * v.array().square()).sum());
  };

  double U = 12.0;
  int panels = 12;
  Eigen::VectorXd prev = balakrishnan_level(A, p, Ax, U, panels);
  for (int level = 0; level < 8; ++level) {
    U *= 2.0;
    panels *= 2;
    Eigen::VectorXd cur = balakrishnan_level(A, p, Ax, U, panels);
    double change = wnorm(cur - prev);
    if (change <= 1e-8 * std::max(1.0, wnorm(cur)))
      return GridFunction(A.grid(), std::move(cur));
    prev = std::move(cur);
  }
  fail(ErrorCode::no_convergence,
       "fractional_power_apply: quadrature refinement did not stabilize");
}

double monotonicity_defect(const LinearMonotoneOperator& A, int trials) {
  require(trials >= 1, ErrorCode::invalid_argument,
          "monotonicity_defect: trials must be >= 1");
  const int n = A.size();
  const Eigen::VectorXd& w = A.grid()->weight_vector();
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd f =
        detail::gaussian_vector(n, 0xDEF4C7ull + static_cast<uint64_t>(trial));
    double nf = std::sqrt((w.array() * f.array().square()).sum());
    if (nf <= 0.0) continue;
    f /= nf;
    worst = std::min(worst,
                     (w.array() * (A.matrix() * f).array() * f.array()).sum());
  }
  // Exact floor: min eigenvalue of the symmetrized weighted similarity.
  const Eigen::ArrayXd d = w.array().sqrt();
  Eigen::MatrixXd S = d.matrix().asDiagonal() * A.matrix() *
                      (1.0 / d).matrix().asDiagonal();
  Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym,
                                                     Eigen::EigenvaluesOnly);
  return std::min(worst, eig.eigenvalues().minCoeff());
}

void export_operator(const LinearMonotoneOperator& A,
                     const std::string& csv_path,
                     const std::string& json_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  require(csv.good(), ErrorCode::io, "cannot open " + csv_path);
  const int n = A.size();
  char buf[32];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", A.matrix()(i, j));
      csv << buf << (j + 1 < n ? "," : "\n");
    }
  }
  require(csv.good(), ErrorCode::io, "write failed for " + csv_path);

  nlohmann::json sidecar{
      {"label", A.label()}, {"n", n}, {"kind", kind_name(A.kind())}};
  std::ofstream js(json_path, std::ios::binary);
  require(js.good(), ErrorCode::io, "cannot open " + json_path);
  js << sidecar.dump(2) << "\n";
  require(js.good(), ErrorCode::io, "write failed for " + json_path);
}

}  // namespace lavreg
