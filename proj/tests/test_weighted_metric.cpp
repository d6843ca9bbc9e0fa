// Non-uniform quadrature weights: the weighted-metric code paths must not
// rely on the uniform case where diagonal scalings cancel.

#include <cmath>

#include "doctest.h"
#include "grid.hpp"
#include "linops.hpp"
#include "oracles.hpp"
#include "srcfit.hpp"

using namespace lavreg;

namespace {

// strictly increasing nodes, weights proportional to 1 + node, normalized
GridPtr lopsided_grid(int n) {
  std::vector<double> nodes(n), weights(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    nodes[i] = (i + 0.5) / n;
    weights[i] = 1.0 + nodes[i];
    sum += weights[i];
  }
  for (int i = 0; i < n; ++i) weights[i] /= sum;
  return std::make_shared<Grid>(std::move(nodes), std::move(weights));
}

}  // namespace

TEST_CASE("weighted norms and inner products on a lopsided grid") {
  GridPtr g = lopsided_grid(64);
  GridFunction one = constant_function(g, 1.0);
  CHECK(norm(one) == doctest::Approx(1.0).epsilon(1e-14));

  GridFunction f(g, detail::gaussian_vector(64, 4));
  double manual = 0.0;
  for (int i = 0; i < 64; ++i)
    manual += g->weight(i) * f.values[i] * f.values[i];
  CHECK(inner(f, f) == doctest::Approx(manual).epsilon(1e-14));
}

TEST_CASE("adjoint identity holds with non-uniform weights") {
  GridPtr g = lopsided_grid(40);
  Eigen::MatrixXd M = oracles::random_monotone_matrix(40, 17);
  LinearMonotoneOperator A(g, M, "random-monotone");
  for (int trial = 0; trial < 10; ++trial) {
    GridFunction f(g, detail::gaussian_vector(40, 60 + trial));
    GridFunction h(g, detail::gaussian_vector(40, 90 + trial));
    CHECK(inner(A.apply(f), h) ==
          doctest::Approx(inner(f, A.adjoint_apply(h))).epsilon(1e-12));
  }
}

TEST_CASE("diagonal operator norms are exact in any weighting") {
  GridPtr g = lopsided_grid(50);
  auto M = multiplication_operator(g, [](double t) { return 0.3 + t * t; });
  double m_max = 0.0, m_min = 1e9;
  for (int i = 0; i < 50; ++i) {
    m_max = std::max(m_max, M.matrix()(i, i));
    m_min = std::min(m_min, M.matrix()(i, i));
  }
  // multiplication operators are normal in the weighted metric, so the norm
  // is the largest symbol value and the resolvent norm is 1/(m_min + alpha);
  // 1e-3 slack for power-iteration convergence on the clustered spectrum
  CHECK(operator_norm(M) == doctest::Approx(m_max).epsilon(1e-3));
  for (double alpha : {1.0, 1e-2}) {
    CHECK(estimate_resolvent_norm(M, alpha) ==
          doctest::Approx(1.0 / (m_min + alpha)).epsilon(1e-3));
    CHECK(estimate_contraction_norm(M, alpha) ==
          doctest::Approx(m_max / (m_max + alpha)).epsilon(1e-3));
  }
}

TEST_CASE("resolvent solve and monotonicity respect the weighting") {
  GridPtr g = lopsided_grid(32);
  Eigen::MatrixXd M = oracles::random_monotone_matrix(32, 23);
  LinearMonotoneOperator A(g, M, "random-monotone");
  CHECK(monotonicity_defect(A, 200) >= 0.0);  // spectrum floor 0.05

  GridFunction rhs(g, detail::gaussian_vector(32, 7));
  GridFunction z = resolvent_solve(A, 0.05, rhs);
  GridFunction residual = A.apply(z) + 0.05 * z - rhs;
  CHECK(norm(residual) <= 1e-10 * norm(rhs));
  CHECK(estimate_resolvent_norm(A, 0.05) <= (1.0 + 1e-8) / 0.05);
}

TEST_CASE("distance sweep matches the oracle with non-uniform weights") {
  GridPtr g = lopsided_grid(20);
  Eigen::MatrixXd M = oracles::random_monotone_matrix(20, 31);
  LinearMonotoneOperator A(g, M, "random-monotone");
  GridFunction u(g, detail::gaussian_vector(20, 44));
  DistanceCurve curve = distance_function(A, u, {1e-2, 1e-3, 1e-4, 1e-6, 1e-8});
  for (size_t i = 0; i < curve.size(); ++i) {
    double pg = oracles::projected_gradient_residual(
        M, u.values, g->weight_vector(), curve.radii[i], 20000);
    CHECK(std::abs(pg - curve.distances[i]) <= 1e-6);
  }
}
