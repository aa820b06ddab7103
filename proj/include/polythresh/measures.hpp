#pragma once

// Even probability measures on the real line: built-in families plus
// user-supplied tabulated densities.

#include <cmath>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "polythresh/rng.hpp"

namespace polythresh {

enum class MeasureKind { Rademacher, Uniform, SymExponential, PNorm, Tabulated };

enum class Admissibility { Yes, No, Unknown };

/// Which closed-form expression (if any) gives the log-MGF.
enum class ClosedLambda {
  None,
  LogCosh,       // Rademacher: ln cosh t
  LogSinhc,      // Uniform(a): ln(sinh(at)/(at))
  NegLogOneMinusSq,  // symmetric exponential: -ln(1 - t^2)
};

/// Piecewise-linear even density, stored on a non-negative grid 0 = x_0 < ... < x_K.
struct TabulatedDensity {
  std::vector<double> x;
  std::vector<double> f;
  std::vector<double> tail_mass;  // mass of [x_i, x_K], already halved (one side)
  double second_moment = 0.0;
};

/// Immutable description of an even probability measure. Cheap to copy.
class MeasureSpec {
 public:
  static MeasureSpec rademacher();
  static MeasureSpec uniform(double half_width = 1.0);
  static MeasureSpec sym_exponential();
  static MeasureSpec pnorm(double p);
  /// Builds a tabulated measure from samples of a density on any grid
  /// (one- or two-sided). The input is symmetrized and renormalized.
  static MeasureSpec tabulated(std::span<const double> x, std::span<const double> f);
  /// Two-column CSV `x,f` with a mandatory header row.
  static MeasureSpec from_csv(const std::filesystem::path& path);

  MeasureKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double half_width() const { return half_width_; }
  double p() const { return p_; }

  double x_star() const { return x_star_; }
  double t_star() const { return t_star_; }
  double atom_at_x_star() const { return atom_at_x_star_; }
  bool is_atomic() const { return kind_ == MeasureKind::Rademacher; }
  bool has_closed_lambda() const { return closed_lambda_ != ClosedLambda::None; }
  ClosedLambda closed_lambda() const { return closed_lambda_; }
  Admissibility admissible() const { return admissible_; }
  bool lambda_star_condition() const { return lambda_star_condition_; }
  double variance() const { return variance_; }
  bool compact_support() const { return std::isfinite(x_star_); }

  /// Log of the density; -inf outside the support.
  double log_density(double x) const;
  /// log_density(x* - gap) for compact support, accurate for tiny gaps.
  double log_density_from_end(double gap) const;
  /// Non-negative points where the density is not smooth, always including 0
  /// and, for compact support, x*.
  std::vector<double> density_breakpoints() const;

  const TabulatedDensity* table() const { return table_.get(); }

 private:
  MeasureSpec() = default;

  MeasureKind kind_ = MeasureKind::Uniform;
  std::string name_;
  double half_width_ = 1.0;
  double p_ = 1.0;
  double log_norm_ = 0.0;  // log of the density normalizer
  double x_star_ = 1.0;
  double t_star_ = INFINITY;
  double atom_at_x_star_ = 0.0;
  ClosedLambda closed_lambda_ = ClosedLambda::None;
  Admissibility admissible_ = Admissibility::Yes;
  bool lambda_star_condition_ = true;
  double variance_ = 0.0;
  std::shared_ptr<const TabulatedDensity> table_;
};

/// Density f(x); even. Throws AtomicMeasure for Rademacher.
double density(const MeasureSpec& spec, double x);

/// One draw from the measure.
double sample(const MeasureSpec& spec, RandomStream& stream);

/// Gamma(shape, 1) variate (Marsaglia-Tsang squeeze; boosted for shape < 1).
double sample_gamma(double shape, RandomStream& stream);

/// m(x) = -ln mu([x, inf)) for 0 <= x <= x*. Returns +inf at x = x* for an
/// atomless compactly supported measure. Throws DomainError otherwise.
double tail_log(const MeasureSpec& spec, double x);

/// mu((-inf, x]); used by diagnostics and goodness-of-fit tests.
double cdf(const MeasureSpec& spec, double x);

std::string to_string(MeasureKind kind);
std::string to_string(Admissibility a);

}  // namespace polythresh
