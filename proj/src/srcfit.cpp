#include "srcfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "analysis.hpp"
#include "errors.hpp"

namespace lavreg {

DistanceCurve distance_function(const LinearMonotoneOperator& A,
                                const GridFunction& u,
                                const std::vector<double>& mu_grid) {
  require(same_grid(u.grid, A.grid()), ErrorCode::grid_mismatch,
          "distance_function: u lives on a different grid");
  require(mu_grid.size() >= 2, ErrorCode::invalid_argument,
          "distance_function: mu grid too short");
  for (size_t i = 0; i < mu_grid.size(); ++i) {
    require(mu_grid[i] > 0.0, ErrorCode::invalid_argument,
            "distance_function: mu values must be positive");
    if (i > 0)
      require(mu_grid[i] < mu_grid[i - 1], ErrorCode::invalid_argument,
              "distance_function: mu values must be decreasing");
  }
  require(mu_grid.front() / mu_grid.back() >= 1e6 * (1.0 - 1e-12),
          ErrorCode::invalid_argument,
          "distance_function: mu grid must span at least 6 decades");

  const Eigen::VectorXd& w = A.grid()->weight_vector();
  const Eigen::MatrixXd& M = A.matrix();

  // Normal equations in the weighted metric: (M^T W M + mu W) x = M^T W u.
  Eigen::MatrixXd WM = w.asDiagonal() * M;
  Eigen::MatrixXd G = M.transpose() * WM;
  Eigen::VectorXd rhs = M.transpose() * (w.array() * u.values.array()).matrix();

  auto wnorm = [&](const Eigen::VectorXd& v) {
    return std::sqrt((w.array() * v.array().square()).sum());
  };

  DistanceCurve curve;
  curve.element_label = "u";
  for (double mu : mu_grid) {
    Eigen::MatrixXd H = G;
    H.diagonal() += mu * w;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd wm = ldlt.solve(rhs);
    bool ok = ldlt.info() == Eigen::Success && wm.allFinite();
    if (ok) {
      // One refinement step; the normal equations get stiff for tiny mu.
      wm += ldlt.solve(rhs - H * wm);
      ok = wm.allFinite();
    }
    require(ok, ErrorCode::singular,
            "distance_function: singular normal equations at mu = " +
                std::to_string(mu) + ", condition ~ " +
                std::to_string((G.diagonal().maxCoeff() + mu) / mu));
    curve.mu_values.push_back(mu);
    curve.radii.push_back(wnorm(wm));
    curve.distances.push_back(wnorm(u.values - M * wm));
  }

  // Duality monotonicity along decreasing mu; degenerate trailing points
  // (R stalled at machine level) are dropped rather than reported.
  DistanceCurve clean;
  clean.element_label = curve.element_label;
  for (size_t i = 0; i < curve.size(); ++i) {
    if (!clean.radii.empty()) {
      if (curve.radii[i] <= clean.radii.back() * (1.0 + 1e-12)) continue;
      require(curve.distances[i] <= clean.distances.back() + 1e-12,
              ErrorCode::internal,
              "distance_function: distances not decreasing along the sweep");
    }
    clean.mu_values.push_back(curve.mu_values[i]);
    clean.radii.push_back(curve.radii[i]);
    clean.distances.push_back(curve.distances[i]);
  }
  require(clean.size() >= 1, ErrorCode::internal,
          "distance_function: sweep produced no usable points");

  // d(R) is the distance to the expanding ball A B_R, hence convex in R:
  // chord slopes must be nondecreasing.
  for (size_t i = 0; i + 2 < clean.size(); ++i) {
    double s0 = (clean.distances[i + 1] - clean.distances[i]) /
                (clean.radii[i + 1] - clean.radii[i]);
    double s1 = (clean.distances[i + 2] - clean.distances[i + 1]) /
                (clean.radii[i + 2] - clean.radii[i + 1]);
    require(s1 >= s0 - 1e-10, ErrorCode::internal,
            "distance_function: curve violates convexity in R");
  }
  return clean;
}

namespace {

struct LogFitResult {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
  bool valid = false;
};

LogFitResult ols_log(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  LogFitResult out;
  const size_t n = xs.size();
  if (n < 3) return out;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double r = ys[i] - (out.intercept + out.slope * xs[i]);
    ss += r * r;
  }
  out.rms = std::sqrt(ss / static_cast<double>(n));
  out.valid = true;
  return out;
}

}  // namespace

DecayModel fit_decay(const DistanceCurve& curve) {
  require(curve.size() >= 2, ErrorCode::invalid_argument,
          "fit_decay: curve too short");

  // Benchmark elements: the distance collapses at finite radius.
  for (size_t i = 0; i < curve.size(); ++i) {
    if (curve.distances[i] <= 1e-8) {
      DecayModel model;
      model.kind = DecayModel::Kind::benchmark;
      model.norm_w = curve.radii[i];
      model.fit_range_min = curve.radii.front();
      model.fit_range_max = curve.radii[i];
      return model;
    }
  }

  std::vector<double> lR, ld, R;
  for (size_t i = 0; i < curve.size(); ++i) {
    if (curve.distances[i] > 1e-10) {
      R.push_back(curve.radii[i]);
      lR.push_back(std::log(curve.radii[i]));
      ld.push_back(std::log(curve.distances[i]));
    }
  }
  require(lR.size() >= 10, ErrorCode::invalid_argument,
          "fit_decay: need at least 10 usable points with d > 1e-10");

  const double mid = 0.5 * (lR.front() + lR.back());
  std::vector<double> xs_pow, ys, xs_log, ys_log, Rs;
  for (size_t i = 0; i < lR.size(); ++i) {
    if (lR[i] < mid) continue;
    xs_pow.push_back(lR[i]);
    ys.push_back(ld[i]);
    Rs.push_back(R[i]);
    if (R[i] > 1.0) {
      xs_log.push_back(std::log(std::log(R[i])));
      ys_log.push_back(ld[i]);
    }
  }
  LogFitResult power = ols_log(xs_pow, ys);
  LogFitResult logfit = ols_log(xs_log, ys_log);
  require(power.valid, ErrorCode::invalid_argument,
          "fit_decay: degenerate fit window");

  const double e = power.slope;
  const double q = logfit.valid ? -logfit.slope : 0.0;
  require(e < -0.01 || q > 0.01, ErrorCode::invalid_argument,
          "fit_decay: no decay detected (neither model fits)");

  DecayModel model;
  model.fit_range_min = Rs.front();
  model.fit_range_max = Rs.back();
  if (logfit.valid && logfit.rms < power.rms && q > 0.01) {
    model.kind = DecayModel::Kind::logarithmic;
    model.exponent = q;
    model.constant = std::exp(logfit.intercept);
    model.residual = logfit.rms;
  } else {
    require(e < 0.0, ErrorCode::invalid_argument,
            "fit_decay: power model has nonnegative exponent");
    model.kind = DecayModel::Kind::power;
    model.exponent = e;
    model.constant = std::exp(power.intercept);
    model.implied_p = e / (e - 1.0);
    model.residual = power.rms;
  }
  return model;
}

GridFunction heaviside_element(const GridPtr& grid) {
  return sample_function(grid, [](double t) { return t < 0.5 ? 0.0 : 1.0; });
}

GridFunction cesaro_witness(const GridPtr& grid, double R) {
  require(R >= 2.0, ErrorCode::invalid_argument,
          "cesaro_witness: R must be >= 2");
  const double spike = 1.0 / (2.0 * R * R);
  require(spike >= 3.0 / grid->size(), ErrorCode::invalid_argument,
          "cesaro_witness: witness spike narrower than 3 grid cells");
  return sample_function(grid, [R, spike](double t) {
    if (t < 0.5) return 0.0;
    if (t <= 0.5 + spike) return R * R;
    return 1.0;
  });
}

WitnessReport verify_cesaro_witness(const GridPtr& grid, double R) {
  GridFunction w = cesaro_witness(grid, R);
  GridFunction u = heaviside_element(grid);
  LinearMonotoneOperator C = cesaro_operator(grid);
  WitnessReport report;
  report.residual = norm(u - C.apply(w));
  report.witness_norm = norm(w);
  return report;
}

namespace {

// Usable sub-curve for Phi/Psi processing: d > 1e-12, Phi = d/R strictly
// decreasing along increasing R.
struct PhiTable {
  std::vector<double> R, d, phi;  // R increasing, phi decreasing
};

PhiTable phi_table(const DistanceCurve& curve) {
  PhiTable t;
  for (size_t i = 0; i < curve.size(); ++i) {
    if (curve.distances[i] <= 1e-12) break;
    double phi = curve.distances[i] / curve.radii[i];
    if (!t.phi.empty() && phi >= t.phi.back()) continue;
    t.R.push_back(curve.radii[i]);
    t.d.push_back(curve.distances[i]);
    t.phi.push_back(phi);
  }
  require(t.R.size() >= 2, ErrorCode::invalid_argument,
          "distance curve has no usable Phi range (degenerate or benchmark "
          "element)");
  return t;
}

double interp_loglog(double x, const std::vector<double>& xs,
                     const std::vector<double>& ys, bool xs_decreasing) {
  // xs strictly monotone; returns exp of the piecewise-linear interpolant
  // of (log xs, log ys).
  size_t lo = 0, hi = xs.size() - 1;
  auto before = [&](double a, double b) {
    return xs_decreasing ? a > b : a < b;
  };
  require(!before(x, xs[0]) && !before(xs[hi], x), ErrorCode::out_of_range,
          "value outside tabulated range; extrapolation refused");
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (before(x, xs[mid]))
      hi = mid;
    else
      lo = mid;
  }
  double s = (std::log(x) - std::log(xs[lo])) /
             (std::log(xs[hi]) - std::log(xs[lo]));
  return std::exp(std::log(ys[lo]) + s * (std::log(ys[hi]) - std::log(ys[lo])));
}

}  // namespace

double bias_bound_from_distance(const DistanceCurve& curve, double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument,
          "bias_bound_from_distance: alpha must be positive");
  PhiTable t = phi_table(curve);
  // d at Phi^{-1}(alpha), interpolated along the curve parametrization.
  return 2.0 * interp_loglog(alpha, t.phi, t.d, /*xs_decreasing=*/true);
}

PsiTable psi_table(const DistanceCurve& curve) {
  PhiTable t = phi_table(curve);
  PsiTable out;
  // Curve points run toward large R, i.e. decreasing alpha = Phi(R);
  // reverse to an increasing table.
  for (size_t k = t.R.size(); k-- > 0;) {
    out.alpha.push_back(t.phi[k]);
    out.psi.push_back(t.phi[k] * t.d[k]);
  }
  for (size_t i = 1; i < out.psi.size(); ++i)
    require(out.psi[i] > out.psi[i - 1], ErrorCode::internal,
            "psi_table: Psi not strictly increasing");
  return out;
}

double psi_parameter_choice(const DistanceCurve& curve, double delta) {
  require(delta > 0.0, ErrorCode::invalid_argument,
          "psi_parameter_choice: delta must be positive");
  PsiTable t = psi_table(curve);
  return interp_loglog(delta, t.psi, t.alpha, /*xs_decreasing=*/false);
}

DistanceCurve least_concave_majorant(const DistanceCurve& curve) {
  require(curve.size() >= 2, ErrorCode::invalid_argument,
          "least_concave_majorant: curve too short");
  // Upper hull in (R, d): keep chord slopes strictly decreasing.
  std::vector<size_t> hull;
  for (size_t i = 0; i < curve.size(); ++i) {
    while (hull.size() >= 2) {
      size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      double s1 = (curve.distances[b] - curve.distances[a]) /
                  (curve.radii[b] - curve.radii[a]);
      double s2 = (curve.distances[i] - curve.distances[b]) /
                  (curve.radii[i] - curve.radii[b]);
      if (s2 <= s1) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  DistanceCurve out;
  out.element_label = curve.element_label + " (concave majorant)";
  size_t seg = 0, next_vertex = 0;
  for (size_t i = 0; i < curve.size(); ++i) {
    while (seg + 1 < hull.size() && curve.radii[hull[seg + 1]] < curve.radii[i])
      ++seg;
    double d = curve.distances[i];
    if (next_vertex < hull.size() && hull[next_vertex] == i) {
      ++next_vertex;  // hull vertices keep their exact value
    } else if (seg + 1 < hull.size()) {
      size_t a = hull[seg], b = hull[seg + 1];
      double s = (curve.radii[i] - curve.radii[a]) /
                 (curve.radii[b] - curve.radii[a]);
      d = curve.distances[a] +
          s * (curve.distances[b] - curve.distances[a]);
    }
    out.mu_values.push_back(curve.mu_values[i]);
    out.radii.push_back(curve.radii[i]);
    out.distances.push_back(std::max(d, curve.distances[i]));
  }
  return out;
}

void write_csv(const DistanceCurve& curve, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open " + path);
  out << "mu,R,d\n";
  char buf[96];
  for (size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", curve.mu_values[i],
                  curve.radii[i], curve.distances[i]);
    out << buf;
  }
  require(out.good(), ErrorCode::io, "write failed for " + path);
}

}  // namespace lavreg
