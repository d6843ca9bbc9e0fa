#ifndef LAVREG_ANALYSIS_HPP
#define LAVREG_ANALYSIS_HPP

#include <utility>
#include <vector>

namespace lavreg {

struct RateRecord {
  double driver;  // delta or alpha
  double error;
};

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

struct LogFit {
  double q = 0.0;
  double K = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

/// (driver, error) records with the fitted decay model. For the power regime
/// fitted_slope/fitted_intercept are the log-log OLS coefficients; for the
/// logarithmic regime they carry q and K.
struct RateTable {
  std::vector<RateRecord> records;  // sorted by decreasing driver
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  enum class Regime { power, logarithmic } regime = Regime::power;
  double r_squared = 0.0;
};

/// OLS of log error against log driver; the slope is the empirical order.
PowerFit fit_power_rate(const std::vector<RateRecord>& records);

/// OLS of log error against log log(1/driver); q = -slope, K = exp(intercept).
/// Drivers must be < 1.
LogFit fit_log_rate(const std::vector<RateRecord>& records);

/// Fits both regimes and keeps the one with the smaller residual in
/// log-error coordinates.
RateTable make_rate_table(std::vector<RateRecord> records);

struct CompareReport {
  double max_ratio = 0.0;
  bool pass = false;
};

/// Max observed/bound ratio over matched drivers; pass iff observed stays
/// within bound*(1+1e-6) + tol_abs everywhere.
CompareReport compare_bound(const std::vector<RateRecord>& observed,
                            const std::vector<std::pair<double, double>>& bound,
                            double tol_abs = 0.0);

}  // namespace lavreg

#endif
