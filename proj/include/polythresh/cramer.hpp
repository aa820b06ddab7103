#pragma once

// Log-MGF, its derivatives, the inverse h = (Lambda')^{-1} and the
// Legendre transform Lambda* of an even measure.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "polythresh/measures.hpp"
#include "polythresh/rng.hpp"

namespace polythresh {

struct CramerOptions {
  double tol_newton = 1e-10;
  double tol_quad = 1e-12;
  double tail_log_cap = 60.0;   // x_max_eval = largest x with m(x) <= cap
  double compact_clip = 1e-12;  // and x_max_eval <= x* (1 - clip)
  bool use_closed_forms = true; // false forces quadrature everywhere
  std::size_t table_nodes = 2049;
};

/// Lambda(t) = t * anchor + log_z, Lambda'(t) = anchor + mean_offset,
/// Lambda''(t) = variance. The anchor keeps large-t evaluations free of
/// cancellation.
struct TiltedMoments {
  double t = 0.0;
  double anchor = 0.0;
  double log_z = 0.0;
  double mean_offset = 0.0;
  double variance = 0.0;

  double lambda() const { return t * anchor + log_z; }
  double mean() const { return anchor + mean_offset; }
};

struct CramerEval {
  double x = 0.0;
  double lambda_star = 0.0;
  double h_of_x = 0.0;
  double tail_m = 0.0;
  double ratio = 0.0;  // tail_m / lambda_star; NaN when lambda_star < 1e-12
};

class CramerProfile {
 public:
  explicit CramerProfile(MeasureSpec spec, CramerOptions options = {});

  const MeasureSpec& spec() const { return spec_; }
  const CramerOptions& options() const { return options_; }
  double x_max_eval() const { return x_max_eval_; }
  double tol_newton() const { return options_.tol_newton; }
  double tol_quad() const { return options_.tol_quad; }

  /// Symmetric grid in (-t*, t*) and cached Lambda, Lambda', Lambda''.
  std::span<const double> t_grid() const { return t_grid_; }
  std::span<const double> lambda_grid() const { return lambda_grid_; }
  std::span<const double> dlambda_grid() const { return dlambda_grid_; }
  std::span<const double> d2lambda_grid() const { return d2lambda_grid_; }

  /// Tilted moments at t; |t| < t*.
  TiltedMoments moments(double t) const;

  /// Lambda*(x) and h(x) by Newton for any |x| < x* (no x_max_eval check).
  /// Rademacher uses the closed form and accepts |x| <= 1.
  std::pair<double, double> legendre(double x, std::optional<double> warm_start = {}) const;

  /// Lambda* from a Hermite table; falls back to legendre() off the table.
  /// Intended for Monte Carlo inner loops.
  double lambda_star_fast(double x) const;

 private:
  double solve_h(double ax, std::optional<double> warm_start) const;
  void build_grid();
  void build_table() const;

  MeasureSpec spec_;
  CramerOptions options_;
  double x_max_eval_ = 0.0;
  std::vector<double> t_grid_, lambda_grid_, dlambda_grid_, d2lambda_grid_;
  std::vector<double> pos_t_, pos_mean_;  // t > 0 part, for bracketing

  // Hermite table of Lambda* in u = x (unbounded) or u = -ln(1 - x/x*),
  // built on first use.
  struct Table;
  std::shared_ptr<Table> table_;
};

double log_mgf(const CramerProfile& profile, double t);
std::pair<double, double> log_mgf_derivs(const CramerProfile& profile, double t);
double h_inverse(const CramerProfile& profile, double x, std::optional<double> warm_start = {});
CramerEval cramer_transform(const CramerProfile& profile, double x);
std::vector<CramerEval> lambda_star_condition_scan(const CramerProfile& profile,
                                                   std::span<const double> x_grid);

struct PNormAsymptotics {
  double p = 2.0;
  double q = 2.0;
  std::vector<double> t, lambda_ratio;  // Lambda(t) p^q / ((p-1) t^q)
  std::vector<double> x, h_ratio, lambda_star_ratio, tail_ratio;
};

/// Asymptotic ratios for nu_p; each tends to 1. `options` lets the caller
/// widen x_max_eval for far-out grids.
PNormAsymptotics pnorm_asymptotics_report(double p, std::span<const double> t_grid,
                                          std::span<const double> x_grid,
                                          CramerOptions options = {});

/// 2 * integral over [0, x_max_eval] of g(x, Lambda*(x)) dx. For compact
/// support the variable is s = -ln(1 - x/x*) so the endpoint blow-up is
/// resolved.
double integrate_half_support(const CramerProfile& profile,
                              const std::function<double(double, double)>& g,
                              double relative_tol = 1e-11);

/// Integral of exp(Lambda*/2) dmu over [-x_max_eval, x_max_eval].
double exp_half_lambda_star_integral(const CramerProfile& profile);

/// x >= 0 with Lambda*(x) = level, solved in the tilt variable.
double lambda_star_inverse(const CramerProfile& profile, double level);

/// Draws from the exponentially tilted measure e^{tx - Lambda(t)} dmu(x)
/// with importance weights. The weight is 1 when the tilt is sampled
/// exactly (two-sided exponential), otherwise it is the likelihood ratio
/// against mu, to be self-normalized.
class TiltedSampler {
 public:
  TiltedSampler(const CramerProfile& profile, double t);
  struct Draw {
    double x;
    double weight;
  };
  Draw operator()(RandomStream& stream) const;
  bool exact() const { return exact_; }

 private:
  const CramerProfile* profile_;
  double t_;
  double lambda_;
  bool exact_ = false;
  double right_prob_ = 0.5;
};

}  // namespace polythresh
