#pragma once

// Threshold constants, the level sets B_r of the product rate function and
// the bounds built from them.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polythresh/cramer.hpp"
#include "polythresh/stats.hpp"

namespace polythresh {

struct ThresholdConstants {
  double t1 = 0.0;        // E Lambda*(X)
  double var_star = 0.0;  // Var Lambda*(X)
  double beta = 0.0;      // var_star / t1^2
  std::optional<double> kappa_vol;  // (2x*)^{-1} * integral of Lambda* over [-x*, x*]
  Admissibility admissible = Admissibility::Yes;
  std::vector<std::string> warnings;
};

ThresholdConstants constants(const CramerProfile& profile);

struct LevelSetResult {
  double value = 0.0;  // sum of Lambda*(x_i)
  bool inside = false; // value <= r
};

/// Sum of Lambda*(x_i) and the comparison with r. `fast` uses the tabulated
/// Lambda* (Monte Carlo use); otherwise each term is solved by Newton.
LevelSetResult level_set_log_indicator(const CramerProfile& profile, std::span<const double> x,
                                       double r, bool fast = false);

/// exp(-sum Lambda*(x_i)), an upper bound on the half-space depth.
double depth_upper_bound(const CramerProfile& profile, std::span<const double> x);

struct UpperBoundRow {
  double r = 0.0;
  double level_set_measure = 0.0;  // Monte Carlo estimate of mu_n(B_r)
  double ci_half = 0.0;            // Wilson 95%
  double n_exp_minus_r = 0.0;      // N e^{-r}
  double total = 0.0;
};

/// Rows (r, mu_n(B_r), N e^{-r}, total) with mu_n(B_r) estimated from
/// `draws` samples of mu_n.
std::vector<UpperBoundRow> upper_bound_curve(const ThresholdConstants& consts,
                                             const CramerProfile& profile, int n,
                                             std::span<const double> r_grid, double N,
                                             std::size_t draws, std::uint64_t seed);

struct TheoreticalWindow {
  double rho1_lower = 0.0;
  double rho2_upper = 0.0;
  double epsilon = 0.1;
  double zeta_lower = 0.0;  // sqrt(2 beta / (n delta))
  double zeta_upper = 0.0;  // t1 eps / (3 t1 + 4)
  bool chebyshev_ok = false;  // beta / (zeta_upper^2 n) <= delta / 2
};

/// Throws NotApplicable when 8 beta / n >= delta.
TheoreticalWindow theoretical_window(const ThresholdConstants& consts, int n, double delta,
                                     double epsilon = 0.1);

/// A point x on the boundary of B_r along the direction `direction`
/// (scaled so that sum Lambda*(x_i) = r).
std::vector<double> level_set_boundary_point(const CramerProfile& profile,
                                             std::span<const double> direction, double r);

struct ChernoffCheck {
  std::vector<double> point;
  double lambda_star_sum = 0.0;
  double bound = 0.0;  // exp(-lambda_star_sum)
  double empirical = 0.0;
  double se = 0.0;
  bool ok = false;     // empirical <= bound + 3 se
};

/// For `points` random boundary points x of B_r, estimates
/// P(sum h(x_i)(X_i - x_i) >= 0) from `draws` samples of mu_n.
std::vector<ChernoffCheck> chernoff_direction_check(const CramerProfile& profile, int n, double r,
                                                    int points, std::size_t draws,
                                                    std::uint64_t seed);

}  // namespace polythresh
