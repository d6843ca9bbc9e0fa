#include <cmath>

#include "doctest.h"
#include "errors.hpp"
#include "grid.hpp"
#include "lavrentiev.hpp"
#include "linops.hpp"
#include "nonlinear.hpp"
#include "oracles.hpp"

using namespace lavreg;

namespace {

// monotone grid map F(x) = Vx + x^3 (componentwise cube)
MonotoneMap cubic_volterra_map(const GridPtr& g) {
  Eigen::MatrixXd V = volterra_operator(g).matrix();
  return MonotoneMap::on_grid(
      g, "volterra-plus-cube",
      [V](const Eigen::VectorXd& x) {
        return Eigen::VectorXd(V * x + x.array().cube().matrix());
      },
      [V](const Eigen::VectorXd& x) {
        Eigen::MatrixXd J = V;
        J.diagonal() += 3.0 * x.array().square().matrix();
        return J;
      },
      /*lipschitz_hint=*/5.0);
}

}  // namespace

TEST_CASE("power link map values") {
  MonotoneMap F1 = power_link_map(1.0);
  CHECK(F1.eval_scalar(0.5) == doctest::Approx(0.5).epsilon(1e-15));

  MonotoneMap F2 = power_link_map(2.0);
  CHECK(F2.eval_scalar(-0.5) == doctest::Approx(-0.25).epsilon(1e-15));

  for (double kappa : {0.5, 1.0, 2.0, 3.0}) {
    MonotoneMap F = power_link_map(kappa);
    CHECK(F.eval_scalar(2.0) == 1.0);
    CHECK(F.eval_scalar(-7.0) == -1.0);
    // continuity across the clipping points
    CHECK(F.eval_scalar(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(F.eval_scalar(-1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(power_link_map(0.0), Error);
  CHECK_THROWS_AS(power_link_map(-1.0), Error);
}

TEST_CASE("exp link map") {
  MonotoneMap F = exp_link_map(0.5);
  CHECK(F.eval_scalar(0.0) == 0.0);
  CHECK(F.eval_scalar(1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(F.derivative_scalar(0.0) == 1.0);
  REQUIRE(F.k0_hint().has_value());
  CHECK(*F.k0_hint() ==
        doctest::Approx(std::expm1(1.0) / 1.0).epsilon(1e-14));
}

TEST_CASE("scalar maps are monotone on sampled pairs") {
  for (double kappa : {0.5, 1.0, 3.0}) {
    MonotoneMap F = power_link_map(kappa);
    uint64_t state = 99;
    auto next = [&state] {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      return 4.0 * ((state >> 11) * 0x1.0p-53) - 2.0;
    };
    for (int i = 0; i < 200; ++i) {
      double a = next(), b = next();
      CHECK((F.eval_scalar(a) - F.eval_scalar(b)) * (a - b) >= -1e-10);
    }
  }
}

TEST_CASE("grid map monotonicity and derivative consistency") {
  GridPtr g = make_uniform_grid(24);
  MonotoneMap F = cubic_volterra_map(g);

  for (int trial = 0; trial < 20; ++trial) {
    GridFunction x(g, 0.5 * detail::gaussian_vector(24, 300 + trial));
    GridFunction y(g, 0.5 * detail::gaussian_vector(24, 700 + trial));
    CHECK(inner(F.evaluate(x) - F.evaluate(y), x - y) >= -1e-10);

    // finite-difference directional derivative
    GridFunction dir(g, detail::gaussian_vector(24, 1100 + trial));
    dir = (1.0 / norm(dir)) * dir;
    const double step = 1e-6;
    GridFunction fd =
        (1.0 / step) * (F.evaluate(x + step * dir) - F.evaluate(x));
    GridFunction jac = F.derivative_at(x).apply(dir);
    CHECK(norm(fd - jac) <= 1e-4 * std::max(1.0, norm(jac)));
  }
}

TEST_CASE("nonlinear solve reduces to the linear one for linear maps") {
  GridPtr g = make_uniform_grid(50);
  auto V = volterra_operator(g);
  MonotoneMap F = MonotoneMap::from_linear(V);
  GridFunction xt = sample_function(g, [](double t) { return std::sin(3.0 * t); });
  GridFunction xb = constant_function(g, 0.0);

  NonlinearProblem P = make_nonlinear_problem(F, xt, xb, 2.0 * norm(xt) + 1.0);
  LinearProblem PL = make_linear_problem(V, xt, xb);
  NoisyData D = make_noisy_data(PL, 1e-3, 7);
  for (double alpha : {1.0, 1e-2}) {
    GridFunction xn = solve_lavrentiev_nonlinear(P, D.y_delta, alpha, 1e-12);
    GridFunction xl = regularize_linear(PL, D, alpha);
    CHECK(norm(xn - xl) <= 1e-9);
  }
}

TEST_CASE("scalar solve closed form for the identity link") {
  NonlinearProblem P = make_scalar_problem(power_link_map(1.0), 0.0, 0.0, 1.0);
  for (double alpha : {1.0, 0.1}) {
    double delta = 1e-3;
    double x = solve_scalar(P, delta, alpha, 1e-13);
    CHECK(x == doctest::Approx(delta / (1.0 + alpha)).epsilon(1e-9));
  }
}

TEST_CASE("scalar solve matches the bisection oracle for kappa = 3") {
  NonlinearProblem P = make_scalar_problem(power_link_map(3.0), 0.0, 0.0, 1.0);
  const double delta = 1e-3, alpha = 1e-3;
  double x = solve_scalar(P, delta, alpha, 1e-13);
  double oracle = oracles::bisect(
      [&](double t) { return t * t * t + alpha * t - delta; }, 0.0, 1.0, 200);
  CHECK(x == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("grid newton solve meets the residual contract") {
  GridPtr g = make_uniform_grid(32);
  MonotoneMap F = cubic_volterra_map(g);
  GridFunction xt = sample_function(g, [](double t) { return 0.5 * t; });
  NonlinearProblem P = make_nonlinear_problem(F, xt, constant_function(g, 0.0),
                                              1.0);
  SolveInfo info;
  GridFunction x = solve_lavrentiev_nonlinear(P, P.y, 1e-2, 1e-11, &info);
  GridFunction residual = F.evaluate(x) + 1e-2 * (x - P.x_bar) - P.y;
  CHECK(norm(residual) <= 1e-11 * std::max(1.0, norm(P.y)));
  CHECK(info.method == "newton");
  CHECK(info.iterations < 50);

  // independent fixed-point oracle x <- x - tau G(x); run at a moderate
  // alpha where the contraction 1 - alpha^2/(L+alpha)^2 converges quickly
  const double alpha = 0.5, L = 5.0;
  const double tau = alpha / ((L + alpha) * (L + alpha));
  GridFunction xa = solve_lavrentiev_nonlinear(P, P.y, alpha, 1e-12);
  Eigen::VectorXd z = P.x_bar.values;
  for (int k = 0; k < 20000; ++k) {
    GridFunction zf(g, z);
    z -= tau * (F.evaluate(zf) + alpha * (zf - P.x_bar) - P.y).values;
  }
  CHECK(norm(xa - GridFunction(g, z)) <= 1e-6);
}

TEST_CASE("picard fallback engages when newton stalls") {
  // evaluate is genuinely nonlinear but the advertised jacobian is a huge
  // diagonal, so newton steps make no measurable progress and stall
  GridPtr g = make_uniform_grid(4);
  MonotoneMap F = MonotoneMap::on_grid(
      g, "exp-with-bogus-jacobian",
      [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd(x.array().exp() - 1.0);
      },
      [](const Eigen::VectorXd& x) {
        return Eigen::MatrixXd(1e6 * Eigen::MatrixXd::Identity(x.size(), x.size()));
      },
      /*lipschitz_hint=*/3.0);
  GridFunction xt = constant_function(g, 0.3);
  NonlinearProblem P = make_nonlinear_problem(F, xt, constant_function(g, 0.0),
                                              1.0);
  SolveInfo info;
  GridFunction x = solve_lavrentiev_nonlinear(P, P.y, 0.5, 1e-9, &info);
  CHECK(info.method == "newton+picard");
  GridFunction residual = F.evaluate(x) + 0.5 * (x - P.x_bar) - P.y;
  CHECK(norm(residual) <= 1e-9 * std::max(1.0, norm(P.y)));
}

TEST_CASE("nonlinear bias") {
  // exact guess: zero bias up to the solver tolerance
  NonlinearProblem Pexact =
      make_scalar_problem(exp_link_map(0.5), 0.2, 0.2, 0.5);
  CHECK(bias_nonlinear(Pexact, 1e-2, 1e-12) <= 1e-10);

  // linear map: equals the linear bias
  GridPtr g = make_uniform_grid(40);
  auto V = volterra_operator(g);
  GridFunction xt = sample_function(g, [](double t) { return t; });
  GridFunction xb = constant_function(g, 0.0);
  NonlinearProblem PF = make_nonlinear_problem(MonotoneMap::from_linear(V), xt,
                                               xb, 2.0);
  LinearProblem PL = make_linear_problem(V, xt, xb);
  for (double alpha : {1e-1, 1e-3})
    CHECK(std::abs(bias_nonlinear(PF, alpha, 1e-12) - bias_linear(PL, alpha)) <=
          1e-8);

  // exp link against a scalar root-finding oracle
  NonlinearProblem PE = make_scalar_problem(exp_link_map(0.6), 0.5, 0.0, 0.6);
  const double alpha = 1e-2;
  double y = std::expm1(0.5);
  double oracle_root = oracles::bisect(
      [&](double x) { return std::expm1(x) + alpha * x - y; }, 0.0, 1.0, 200);
  double bias = bias_nonlinear(PE, alpha, 1e-13);
  CHECK(bias == doctest::Approx(std::abs(oracle_root - 0.5)).epsilon(1e-8));
  CHECK(bias > 0.0);
  CHECK(bias <= 0.5);
}

TEST_CASE("nonlinear bias stays below ||x_true - x_bar|| and converges") {
  NonlinearProblem P = make_scalar_problem(exp_link_map(0.5), 0.3, 0.0, 0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    double b = bias_nonlinear(P, alpha, 1e-13);
    CHECK(b <= 0.3 + 1e-12);
    CHECK(b <= prev + 1e-12);
    prev = b;
  }
  CHECK(prev <= 1e-5);
}

TEST_CASE("bias transfer check") {
  // linear reduction: ratio 1 for any admissible k0
  GridPtr g = make_uniform_grid(30);
  auto V = volterra_operator(g);
  GridFunction xt = sample_function(g, [](double t) { return t; });
  NonlinearProblem PF = make_nonlinear_problem(
      MonotoneMap::from_linear(V), xt, constant_function(g, 0.0), 2.0);
  TransferCheck linear_check =
      bias_transfer_check(PF, 0.5, {1.0, 1e-1, 1e-2}, 1e-12);
  for (const auto& [alpha, ratio] : linear_check.ratios) {
    (void)alpha;
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(ratio <= linear_check.C);
  }

  // constant from the theorem at k0 ||x_true - x_bar|| = 1
  NonlinearProblem PE = make_scalar_problem(exp_link_map(0.5), 0.2, 0.0, 0.5);
  TransferCheck at_one = bias_transfer_check(PE, 5.0, {1.0, 0.1}, 1e-12);
  CHECK(at_one.C == doctest::Approx(4.0).epsilon(1e-14));

  // analytic hint keeps every ratio below C
  double k0 = *PE.F.k0_hint();
  std::vector<double> alphas;
  for (int i = 0; i <= 12; ++i) alphas.push_back(std::pow(10.0, -i / 2.0));
  TransferCheck t = bias_transfer_check(PE, k0, alphas, 1e-12);
  for (const auto& [alpha, ratio] : t.ratios) {
    (void)alpha;
    CHECK(ratio <= t.C + 1e-9);
  }

  // rejections
  CHECK_THROWS_AS(bias_transfer_check(PE, 11.0, {1.0}, 1e-12), Error);
  NonlinearProblem degenerate =
      make_scalar_problem(exp_link_map(0.5), 0.2, 0.2, 0.5);
  CHECK_THROWS_AS(bias_transfer_check(degenerate, 1.0, {1.0}, 1e-12), Error);
}

TEST_CASE("conditional stability rates") {
  std::vector<double> deltas;
  for (int i = 0; i <= 8; ++i) deltas.push_back(std::pow(10.0, -2.0 - 0.5 * i));
  struct Case {
    double kappa, slope;
  };
  for (auto [kappa, slope] : {Case{0.5, 2.0}, Case{1.0, 1.0}, Case{2.0, 0.5},
                              Case{3.0, 1.0 / 3.0}}) {
    RateTable t = conditional_stability_rate(kappa, deltas, 1.0);
    CHECK(std::abs(t.fitted_slope - slope) <= 0.02);
    CHECK(t.r_squared >= 0.999);
    CHECK(t.regime == RateTable::Regime::power);
  }
  CHECK_THROWS_AS(conditional_stability_rate(-1.0, deltas, 1.0), Error);
  CHECK_THROWS_AS(conditional_stability_rate(1.0, {1e-2, 1e-2}, 1.0), Error);
}

TEST_CASE("nonlinear inequalities and noise propagation") {
  NonlinearProblem P = make_scalar_problem(exp_link_map(0.6), 0.4, 0.0, 0.6);
  GridPtr g = P.F.grid();
  const double tol = 1e-12;
  for (double delta : {0.0, 1e-3, 1e-2}) {
    for (double alpha : {1.0, 1e-1, 1e-2}) {
      for (double sign : {1.0, -1.0}) {
        GridFunction yd(
            g, Eigen::VectorXd::Constant(1, P.y.values[0] + sign * delta));
        InequalityChecks c =
            check_inequalities_nonlinear(P, yd, delta, alpha, tol);
        CHECK(c.pass(std::max(1e-9, 10.0 * tol)));
      }
    }
  }
}

TEST_CASE("problem construction validates the ball radius") {
  CHECK_THROWS_AS(make_scalar_problem(exp_link_map(0.5), 0.5, 0.0, 0.4), Error);
  CHECK_THROWS_AS(solve_scalar(
                      make_scalar_problem(exp_link_map(0.5), 0.1, 0.0, 0.5),
                      0.0, -1.0, 1e-10),
                  Error);
}
