#include "analysis.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace lavreg {

namespace {

struct Ols {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0, rms = 0.0;
};

Ols ols(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
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
  require(sxx > 0.0, ErrorCode::invalid_argument,
          "rate fit: degenerate records (drivers not distinct)");
  Ols out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double pred = out.intercept + out.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - my) * (ys[i] - my);
  }
  out.rms = std::sqrt(ss_res / static_cast<double>(n));
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot
                               : (ss_res <= 1e-28 ? 1.0 : 0.0);
  return out;
}

void validate_records(const std::vector<RateRecord>& records) {
  require(records.size() >= 3, ErrorCode::invalid_argument,
          "rate fit: need at least 3 records");
  for (const auto& r : records) {
    require(r.driver > 0.0 && std::isfinite(r.driver),
            ErrorCode::invalid_argument, "rate fit: drivers must be positive");
    require(r.error > 0.0 && std::isfinite(r.error),
            ErrorCode::invalid_argument, "rate fit: errors must be positive");
  }
}

}  // namespace

PowerFit fit_power_rate(const std::vector<RateRecord>& records) {
  validate_records(records);
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    xs.push_back(std::log(r.driver));
    ys.push_back(std::log(r.error));
  }
  Ols fit = ols(xs, ys);
  return PowerFit{fit.slope, fit.intercept, fit.r_squared, fit.rms};
}

LogFit fit_log_rate(const std::vector<RateRecord>& records) {
  validate_records(records);
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    require(r.driver < 1.0, ErrorCode::invalid_argument,
            "fit_log_rate: drivers must be < 1 (log log undefined)");
    xs.push_back(std::log(std::log(1.0 / r.driver)));
    ys.push_back(std::log(r.error));
  }
  Ols fit = ols(xs, ys);
  return LogFit{-fit.slope, std::exp(fit.intercept), fit.r_squared, fit.rms};
}

RateTable make_rate_table(std::vector<RateRecord> records) {
  validate_records(records);
  std::sort(records.begin(), records.end(),
            [](const RateRecord& a, const RateRecord& b) {
              return a.driver > b.driver;
            });
  RateTable table;
  PowerFit power = fit_power_rate(records);
  bool log_applicable = true;
  for (const auto& r : records)
    if (r.driver >= 1.0) log_applicable = false;

  if (log_applicable) {
    LogFit lg = fit_log_rate(records);
    if (lg.rms_residual < power.rms_residual) {
      table.regime = RateTable::Regime::logarithmic;
      table.fitted_slope = lg.q;
      table.fitted_intercept = lg.K;
      table.r_squared = lg.r_squared;
      table.records = std::move(records);
      return table;
    }
  }
  table.regime = RateTable::Regime::power;
  table.fitted_slope = power.slope;
  table.fitted_intercept = power.intercept;
  table.r_squared = power.r_squared;
  table.records = std::move(records);
  return table;
}

CompareReport compare_bound(const std::vector<RateRecord>& observed,
                            const std::vector<std::pair<double, double>>& bound,
                            double tol_abs) {
  require(observed.size() == bound.size() && !observed.empty(),
          ErrorCode::invalid_argument, "compare_bound: size mismatch");
  CompareReport report;
  report.pass = true;
  for (size_t i = 0; i < observed.size(); ++i) {
    const double d1 = observed[i].driver, d2 = bound[i].first;
    require(std::abs(d1 - d2) <= 1e-12 * std::max(std::abs(d1), std::abs(d2)),
            ErrorCode::invalid_argument, "compare_bound: drivers mismatch");
    require(bound[i].second > 0.0, ErrorCode::invalid_argument,
            "compare_bound: bound values must be positive");
    double ratio = observed[i].error / bound[i].second;
    report.max_ratio = std::max(report.max_ratio, ratio);
    if (observed[i].error > bound[i].second * (1.0 + 1e-6) + tol_abs)
      report.pass = false;
  }
  return report;
}

}  // namespace lavreg
