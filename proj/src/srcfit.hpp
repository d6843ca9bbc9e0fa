#ifndef LAVREG_SRCFIT_HPP
#define LAVREG_SRCFIT_HPP

#include <string>
#include <vector>

#include "grid.hpp"
#include "lavrentiev.hpp"
#include "linops.hpp"

namespace lavreg {

/// Parametric tabulation of the distance function
/// d(R) = min { ||u - Aw|| : ||w|| <= R }, one point per Lagrange parameter.
struct DistanceCurve {
  std::vector<double> mu_values;  // decreasing
  std::vector<double> radii;      // increasing
  std::vector<double> distances;  // decreasing
  std::string element_label;

  size_t size() const { return radii.size(); }
};

/// Sweeps the Lagrange parameter: for each mu solves the weighted normal
/// equations (A*A + mu I) w = A*u and records (||w||, ||u - Aw||). Each point
/// is the exact constrained optimum at R = ||w_mu||.
DistanceCurve distance_function(const LinearMonotoneOperator& A,
                                const GridFunction& u,
                                const std::vector<double>& mu_grid);

struct DecayModel {
  enum class Kind { power, logarithmic, benchmark } kind = Kind::power;
  double exponent = 0.0;   // e < 0 (power) or q > 0 (logarithmic)
  double constant = 0.0;   // C (power) or K (logarithmic)
  double implied_p = 0.0;  // p = e/(e-1), power kind only
  double norm_w = 0.0;     // benchmark kind only
  double fit_range_min = 0.0, fit_range_max = 0.0;
  double residual = 0.0;   // RMS in log coordinates
};

/// Fits power and logarithmic decay on the largest-R half of the curve and
/// returns the model with the smaller residual. Elements reaching
/// d <= 1e-8 are classified as benchmark.
DecayModel fit_decay(const DistanceCurve& curve);

/// Heaviside element: 0 on [0,1/2), 1 on [1/2,1].
GridFunction heaviside_element(const GridPtr& grid);

/// The explicit Cesaro witness taking the value R^2 on [1/2, 1/2 + 1/(2R^2)].
GridFunction cesaro_witness(const GridPtr& grid, double R);

struct WitnessReport {
  double residual = 0.0;      // ||u - C w_R||
  double witness_norm = 0.0;  // ||w_R||
};

/// Evaluates the explicit witness for the Heaviside element; the residual is
/// bounded by 1.1/R on grids fine enough to resolve the spike.
WitnessReport verify_cesaro_witness(const GridPtr& grid, double R);

/// Bias bound 2 d(Phi^{-1}(alpha)) with Phi(R) = d(R)/R, inverted by
/// monotone log-log interpolation. Refuses alpha outside the tabulated range.
double bias_bound_from_distance(const DistanceCurve& curve, double alpha);

/// Psi(alpha) = alpha d(Phi^{-1}(alpha)) tabulated at the curve's own points
/// (Psi_i = d_i^2 / R_i at alpha_i = d_i / R_i), increasing in alpha.
PsiTable psi_table(const DistanceCurve& curve);

/// alpha(delta) = Psi^{-1}(delta); refuses delta outside the tabulated range.
double psi_parameter_choice(const DistanceCurve& curve, double delta);

/// Upper concave envelope of (R, d); smoothing option for noisy curves.
DistanceCurve least_concave_majorant(const DistanceCurve& curve);

/// CSV with header `mu,R,d`.
void write_csv(const DistanceCurve& curve, const std::string& path);

}  // namespace lavreg

#endif
