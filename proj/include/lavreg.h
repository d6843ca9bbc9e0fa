/*
 * lavreg - Lavrentiev regularization of monotone operator equations on a
 * quadrature discretization of L2(0,1).
 *
 * C API: opaque handles, integer status codes. Every function returning
 * `int` yields LAVREG_OK (0) on success; on failure the handle/output is
 * untouched and lavreg_last_error() carries a thread-local message.
 * All norms and inner products are weighted by the grid quadrature weights.
 */

#ifndef LAVREG_H
#define LAVREG_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32
#define LAVREG_API __declspec(dllexport)
#else
#define LAVREG_API __attribute__((visibility("default")))
#endif

typedef enum lavreg_status {
  LAVREG_OK = 0,
  LAVREG_ERR_INVALID_ARGUMENT = 1,
  LAVREG_ERR_GRID_MISMATCH = 2,
  LAVREG_ERR_SINGULAR = 3,
  LAVREG_ERR_NO_CONVERGENCE = 4,
  LAVREG_ERR_OUT_OF_RANGE = 5,
  LAVREG_ERR_UNSUPPORTED = 6,
  LAVREG_ERR_IO = 7,
  LAVREG_ERR_INTERNAL = 8
} lavreg_status;

LAVREG_API const char* lavreg_status_name(int status);
LAVREG_API const char* lavreg_last_error(void);
LAVREG_API const char* lavreg_version(void);

/* ------------------------------------------------------------------ grid */

typedef struct lavreg_grid lavreg_grid;

/* Composite midpoint rule with n >= 2 nodes. */
LAVREG_API int lavreg_grid_uniform(int n, lavreg_grid** out);
LAVREG_API void lavreg_grid_free(lavreg_grid* grid);
LAVREG_API int lavreg_grid_size(const lavreg_grid* grid);
/* Buffers must hold lavreg_grid_size(grid) doubles. */
LAVREG_API int lavreg_grid_nodes(const lavreg_grid* grid, double* out);
LAVREG_API int lavreg_grid_weights(const lavreg_grid* grid, double* out);

/* -------------------------------------------------------- grid functions */

typedef struct lavreg_func lavreg_func;

LAVREG_API int lavreg_func_create(const lavreg_grid* grid,
                                  const double* values, lavreg_func** out);
LAVREG_API int lavreg_func_constant(const lavreg_grid* grid, double value,
                                    lavreg_func** out);
LAVREG_API void lavreg_func_free(lavreg_func* f);
LAVREG_API int lavreg_func_size(const lavreg_func* f);
LAVREG_API int lavreg_func_values(const lavreg_func* f, double* out);
LAVREG_API int lavreg_func_inner(const lavreg_func* f, const lavreg_func* g,
                                 double* out);
LAVREG_API int lavreg_func_norm(const lavreg_func* f, double* out);
/* CSV with header `t,value`, 17 significant digits. */
LAVREG_API int lavreg_func_write_csv(const lavreg_func* f, const char* path);

/* -------------------------------------------------------------- operators */

typedef struct lavreg_operator lavreg_operator;

/* Named multipliers: "t", "one-plus-t", "exp-inv-sqrt" (exp(1-1/sqrt(t))),
 * "one". */
LAVREG_API int lavreg_operator_multiplication(const lavreg_grid* grid,
                                              const char* multiplier,
                                              lavreg_operator** out);
LAVREG_API int lavreg_operator_multiplication_fn(
    const lavreg_grid* grid, double (*multiplier)(double t, void* ctx),
    void* ctx, lavreg_operator** out);
LAVREG_API int lavreg_operator_volterra(const lavreg_grid* grid,
                                        lavreg_operator** out);
LAVREG_API int lavreg_operator_cesaro(const lavreg_grid* grid,
                                      lavreg_operator** out);
/* The 2x2 rotation example on its own 2-point grid. */
LAVREG_API int lavreg_operator_skew(lavreg_operator** out);
LAVREG_API int lavreg_operator_identity(const lavreg_grid* grid,
                                        lavreg_operator** out);
LAVREG_API int lavreg_operator_zero(const lavreg_grid* grid,
                                    lavreg_operator** out);
LAVREG_API void lavreg_operator_free(lavreg_operator* op);

LAVREG_API int lavreg_operator_size(const lavreg_operator* op);
LAVREG_API int lavreg_operator_label(const lavreg_operator* op, char* buf,
                                     int buflen);
LAVREG_API int lavreg_operator_apply(const lavreg_operator* op,
                                     const lavreg_func* x, lavreg_func** out);
LAVREG_API int lavreg_operator_adjoint_apply(const lavreg_operator* op,
                                             const lavreg_func* x,
                                             lavreg_func** out);
LAVREG_API int lavreg_operator_norm(const lavreg_operator* op, double* out);
/* Solves (A + alpha I) z = rhs, alpha > 0. */
LAVREG_API int lavreg_resolvent_solve(const lavreg_operator* op, double alpha,
                                      const lavreg_func* rhs,
                                      lavreg_func** out);
LAVREG_API int lavreg_resolvent_norm(const lavreg_operator* op, double alpha,
                                     double* out);
/* ||(A + alpha I)^{-1} A||. */
LAVREG_API int lavreg_contraction_norm(const lavreg_operator* op, double alpha,
                                       double* out);
/* Balakrishnan power A^p x, 0 < p <= 1. */
LAVREG_API int lavreg_fractional_power_apply(const lavreg_operator* op,
                                             double p, const lavreg_func* x,
                                             lavreg_func** out);
LAVREG_API int lavreg_monotonicity_defect(const lavreg_operator* op,
                                          int trials, double* out);

/* classification: 0 = well-posed (K set), 1 = ill-posed. norms may be NULL;
 * otherwise it must hold n_alphas doubles and receives the estimated
 * resolvent norms. */
LAVREG_API int lavreg_classify_posedness(const lavreg_operator* op,
                                         const double* alphas, int n_alphas,
                                         int* classification, double* K,
                                         double* norms);
/* Row-major full-precision matrix CSV plus JSON sidecar {label, n, kind}. */
LAVREG_API int lavreg_operator_export(const lavreg_operator* op,
                                      const char* csv_path,
                                      const char* json_path);

/* -------------------------------------------------- linear regularization */

typedef struct lavreg_linear_problem lavreg_linear_problem;
typedef struct lavreg_noisy_data lavreg_noisy_data;

/* Exact data y = A x_true is generated internally. */
LAVREG_API int lavreg_linear_problem_create(const lavreg_operator* op,
                                            const lavreg_func* x_true,
                                            const lavreg_func* x_bar,
                                            lavreg_linear_problem** out);
LAVREG_API void lavreg_linear_problem_free(lavreg_linear_problem* p);
LAVREG_API int lavreg_linear_problem_y(const lavreg_linear_problem* p,
                                       lavreg_func** out);

/* Gaussian noise rescaled to weighted norm exactly delta; deterministic in
 * seed. delta = 0 reproduces the exact data. */
LAVREG_API int lavreg_noisy_data_create(const lavreg_linear_problem* p,
                                        double delta, uint64_t seed,
                                        lavreg_noisy_data** out);
LAVREG_API void lavreg_noisy_data_free(lavreg_noisy_data* d);
LAVREG_API int lavreg_noisy_data_y(const lavreg_noisy_data* d,
                                   lavreg_func** out);

LAVREG_API int lavreg_regularize_linear(const lavreg_linear_problem* p,
                                        const lavreg_noisy_data* d,
                                        double alpha, lavreg_func** out);
LAVREG_API int lavreg_bias_linear(const lavreg_linear_problem* p, double alpha,
                                  double* out);
LAVREG_API int lavreg_noise_propagation_gap(const lavreg_linear_problem* p,
                                            const lavreg_noisy_data* d,
                                            double alpha, double* out);
LAVREG_API int lavreg_total_error(const lavreg_linear_problem* p,
                                  const lavreg_noisy_data* d, double alpha,
                                  double* out);
/* liminf estimate of B(alpha)/alpha over a decreasing alpha list (>= 4). */
LAVREG_API int lavreg_saturation_probe(const lavreg_linear_problem* p,
                                       const double* alphas, int n_alphas,
                                       double* out);

/* A priori parameter choices. */
LAVREG_API int lavreg_apriori_alpha_linear(double delta, double c,
                                           double* out);
LAVREG_API int lavreg_apriori_alpha_power(double delta, double c, double theta,
                                          double* out);

/* --------------------------------------------------------- distance curve */

typedef struct lavreg_distance_curve lavreg_distance_curve;

/* mu grid: positive, decreasing, spanning >= 6 decades. */
LAVREG_API int lavreg_distance_function(const lavreg_operator* op,
                                        const lavreg_func* u,
                                        const double* mus, int n_mus,
                                        lavreg_distance_curve** out);
LAVREG_API void lavreg_distance_curve_free(lavreg_distance_curve* c);
LAVREG_API int lavreg_distance_curve_size(const lavreg_distance_curve* c);
/* Arrays of lavreg_distance_curve_size entries; any may be NULL. */
LAVREG_API int lavreg_distance_curve_points(const lavreg_distance_curve* c,
                                            double* mu, double* R, double* d);
/* CSV with header `mu,R,d`. */
LAVREG_API int lavreg_distance_curve_write_csv(const lavreg_distance_curve* c,
                                               const char* path);

/* kind: 0 = power, 1 = logarithmic, 2 = benchmark. Out-pointers may be
 * NULL. For power: exponent_or_q = e < 0, extra = implied p. For
 * logarithmic: exponent_or_q = q > 0, extra = 0. For benchmark:
 * extra = norm of the source element. */
LAVREG_API int lavreg_fit_decay(const lavreg_distance_curve* c, int* kind,
                                double* exponent_or_q, double* constant,
                                double* extra, double* residual);
/* 2 d(Phi^{-1}(alpha)); refuses alpha outside the tabulated Phi range. */
LAVREG_API int lavreg_bias_bound_from_distance(const lavreg_distance_curve* c,
                                               double alpha, double* out);
/* Psi^{-1}(delta); refuses delta outside the tabulated Psi range. */
LAVREG_API int lavreg_psi_parameter_choice(const lavreg_distance_curve* c,
                                           double delta, double* out);
/* Residual and norm of the explicit Heaviside witness at radius R. */
LAVREG_API int lavreg_verify_cesaro_witness(const lavreg_grid* grid, double R,
                                            double* residual,
                                            double* witness_norm);

/* -------------------------------------------------------------- nonlinear */

typedef struct lavreg_map lavreg_map;
typedef struct lavreg_nl_problem lavreg_nl_problem;

LAVREG_API int lavreg_map_power_link(double kappa, lavreg_map** out);
LAVREG_API int lavreg_map_exp_link(double ball_radius, lavreg_map** out);
LAVREG_API int lavreg_map_custom_scalar(double (*f)(double x, void* ctx),
                                        double (*df)(double x, void* ctx),
                                        void* ctx, lavreg_map** out);
LAVREG_API void lavreg_map_free(lavreg_map* map);
LAVREG_API int lavreg_map_eval_scalar(const lavreg_map* map, double x,
                                      double* out);
LAVREG_API int lavreg_map_derivative_scalar(const lavreg_map* map, double x,
                                            double* out);
/* Fails with LAVREG_ERR_UNSUPPORTED when the map carries no hint. */
LAVREG_API int lavreg_map_k0_hint(const lavreg_map* map, double* out);

LAVREG_API int lavreg_nl_problem_create_scalar(const lavreg_map* map,
                                               double x_true, double x_bar,
                                               double ball_radius,
                                               lavreg_nl_problem** out);
LAVREG_API void lavreg_nl_problem_free(lavreg_nl_problem* p);

/* Solves F(x) + alpha (x - x_bar) = y_delta. */
LAVREG_API int lavreg_solve_scalar(const lavreg_nl_problem* p, double y_delta,
                                   double alpha, double tol, double* out);
LAVREG_API int lavreg_bias_nonlinear(const lavreg_nl_problem* p, double alpha,
                                     double tol, double* out);
/* ratios must hold n_alphas doubles; receives B^F/B^A per alpha. */
LAVREG_API int lavreg_bias_transfer_check(const lavreg_nl_problem* p,
                                          double k0, const double* alphas,
                                          int n_alphas, double tol,
                                          double* ratios, double* C_out);
/* errors may be NULL or hold n_deltas doubles. */
LAVREG_API int lavreg_conditional_stability_rate(double kappa,
                                                 const double* deltas,
                                                 int n_deltas, double c,
                                                 double* errors, double* slope,
                                                 double* r_squared);

/* ------------------------------------------------------------ rate fitting */

LAVREG_API int lavreg_fit_power_rate(const double* drivers,
                                     const double* errors, int n,
                                     double* slope, double* intercept,
                                     double* r_squared);
LAVREG_API int lavreg_fit_log_rate(const double* drivers, const double* errors,
                                   int n, double* q, double* K,
                                   double* r_squared);

/* --------------------------------------------------------------- scenarios */

LAVREG_API int lavreg_scenario_count(void);
LAVREG_API int lavreg_scenario_name(int index, char* buf, int buflen);
/* Serialized config of a builtin scenario; free with lavreg_string_free. */
LAVREG_API int lavreg_scenario_config_json(const char* name, char** out);
LAVREG_API void lavreg_string_free(char* s);

typedef void (*lavreg_check_callback)(const char* scenario, const char* check,
                                      int pass, double observed,
                                      const char* required, void* ctx);

/* grid_n_override <= 0 and seed_override < 0 leave the scenario untouched.
 * all_pass receives 1 iff every acceptance check passed. */
LAVREG_API int lavreg_run_scenario_file(const char* json_path,
                                        const char* out_dir,
                                        int grid_n_override,
                                        int64_t seed_override,
                                        lavreg_check_callback cb, void* ctx,
                                        int* all_pass);
LAVREG_API int lavreg_run_scenario_named(const char* name, const char* out_dir,
                                         int grid_n_override,
                                         int64_t seed_override,
                                         lavreg_check_callback cb, void* ctx,
                                         int* all_pass);
LAVREG_API int lavreg_run_suite(const char* out_dir, int grid_n_override,
                                int64_t seed_override,
                                lavreg_check_callback cb, void* ctx,
                                int* all_pass);

#ifdef __cplusplus
}
#endif

#endif /* LAVREG_H */
