#include "polythresh/thresholds.hpp"

#include <algorithm>
#include <cmath>

#include "polythresh/errors.hpp"
#include "polythresh/roots.hpp"

namespace polythresh {

namespace {

constexpr std::uint64_t kUpperBoundStream = 0x75b0;
constexpr std::uint64_t kChernoffStream = 0xc4e7;

void check_support(const CramerProfile& profile, std::span<const double> x, const char* op) {
  const auto& spec = profile.spec();
  for (double xi : x) {
    if (!std::isfinite(xi)) throw DomainError(op, "coordinate is not finite");
    const double ax = std::abs(xi);
    if (spec.is_atomic() ? ax > spec.x_star() : ax >= spec.x_star())
      throw DomainError(op, "coordinate outside the support");
  }
}

}  // namespace

ThresholdConstants constants(const CramerProfile& profile) {
  const auto& spec = profile.spec();
  ThresholdConstants c;
  c.admissible = spec.admissible();
  if (spec.is_atomic()) {
    // Atoms of mass 1/2 at +-x*.
    c.t1 = profile.legendre(spec.x_star()).first;
    c.var_star = 0.0;
    c.warnings.push_back("admissible=false: the measure has an atom at x*");
  } else {
    c.t1 = integrate_half_support(profile, [&](double x, double ls) { return ls * density(spec, x); });
    const double second =
        integrate_half_support(profile, [&](double x, double ls) { return ls * ls * density(spec, x); });
    c.var_star = std::max(0.0, second - c.t1 * c.t1);
    if (c.admissible == Admissibility::Unknown)
      c.warnings.push_back("admissible=unknown: log-concavity of tabulated input is not checked");
  }
  c.beta = c.t1 > 0.0 ? c.var_star / (c.t1 * c.t1) : 0.0;
  if (spec.compact_support())
    c.kappa_vol = integrate_half_support(profile, [](double, double ls) { return ls; }) /
                  (2.0 * spec.x_star());
  return c;
}

LevelSetResult level_set_log_indicator(const CramerProfile& profile, std::span<const double> x,
                                       double r, bool fast) {
  check_support(profile, x, "level_set_log_indicator");
  LevelSetResult out;
  for (double xi : x) out.value += fast ? profile.lambda_star_fast(xi) : profile.legendre(xi).first;
  out.inside = out.value <= r;
  return out;
}

double depth_upper_bound(const CramerProfile& profile, std::span<const double> x) {
  check_support(profile, x, "depth_upper_bound");
  double sum = 0.0;
  for (double xi : x) sum += profile.legendre(xi).first;
  return std::exp(-sum);
}

std::vector<UpperBoundRow> upper_bound_curve(const ThresholdConstants& consts,
                                             const CramerProfile& profile, int n,
                                             std::span<const double> r_grid, double N,
                                             std::size_t draws, std::uint64_t seed) {
  (void)consts;
  if (n < 1) throw ValidationError("upper_bound_curve", "n must be >= 1");
  if (!(N > n)) throw ValidationError("upper_bound_curve", "N must exceed n");
  if (draws == 0) throw ValidationError("upper_bound_curve", "draws must be positive");
  const auto& spec = profile.spec();
  profile.lambda_star_fast(0.0);  // build the table before going parallel

  std::vector<double> sums(draws);
  const SeedKey key = SeedKey{seed, kUpperBoundStream};
  const auto count = static_cast<std::int64_t>(draws);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    RandomStream stream(key.split(static_cast<std::uint64_t>(i)));
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += profile.lambda_star_fast(sample(spec, stream));
    sums[static_cast<std::size_t>(i)] = s;
  }

  std::vector<UpperBoundRow> rows;
  for (double r : r_grid) {
    std::size_t hits = 0;
    for (double s : sums) hits += s <= r ? 1 : 0;
    UpperBoundRow row;
    row.r = r;
    row.level_set_measure = static_cast<double>(hits) / static_cast<double>(draws);
    row.ci_half = wilson_interval(hits, draws).half_width;
    row.n_exp_minus_r = N * std::exp(-r);
    row.total = row.level_set_measure + row.n_exp_minus_r;
    rows.push_back(row);
  }
  return rows;
}

TheoreticalWindow theoretical_window(const ThresholdConstants& consts, int n, double delta,
                                     double epsilon) {
  if (n < 1) throw ValidationError("theoretical_window", "n must be >= 1");
  if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("theoretical_window", "delta must lie in (0, 1/2)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("theoretical_window", "epsilon must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  if (8.0 * consts.beta / nn >= delta)
    throw NotApplicable("theoretical_window", "8 beta / n >= delta: n is below the proof threshold");
  TheoreticalWindow w;
  w.epsilon = epsilon;
  w.zeta_lower = std::sqrt(2.0 * consts.beta / (nn * delta));
  w.rho1_lower = (1.0 - std::sqrt(8.0 * consts.beta / (nn * delta))) * consts.t1;
  w.rho2_upper = (1.0 + epsilon) * consts.t1;
  w.zeta_upper = consts.t1 * epsilon / (3.0 * consts.t1 + 4.0);
  w.chebyshev_ok = consts.beta / (w.zeta_upper * w.zeta_upper * nn) <= 0.5 * delta;
  return w;
}

std::vector<double> level_set_boundary_point(const CramerProfile& profile,
                                             std::span<const double> direction, double r) {
  if (!(r > 0.0)) throw DomainError("level_set_boundary_point", "r must be positive");
  double wmax = 0.0;
  for (double w : direction) wmax = std::max(wmax, std::abs(w));
  if (!(wmax > 0.0)) throw DomainError("level_set_boundary_point", "direction must be nonzero");
  const double reach = profile.spec().is_atomic() ? profile.spec().x_star() : profile.x_max_eval();
  const double s_max = reach / wmax;

  auto eval = [&](double s) {
    double f = -r, df = 0.0;
    for (double w : direction) {
      const auto [ls, h] = profile.legendre(s * w);
      f += ls;
      df += w * h;
    }
    return std::pair<double, double>{f, df};
  };
  if (eval(s_max).first < 0.0)
    throw DomainError("level_set_boundary_point", "r is beyond the evaluable part of the support");
  const auto res = roots::newton_bisect(eval, 0.0, s_max, 0.5 * s_max, 1e-12 * std::max(1.0, r));
  if (!res.converged) throw ConvergenceFailure("level_set_boundary_point", "no convergence");
  std::vector<double> x(direction.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = res.root * direction[i];
  return x;
}

std::vector<ChernoffCheck> chernoff_direction_check(const CramerProfile& profile, int n, double r,
                                                    int points, std::size_t draws,
                                                    std::uint64_t seed) {
  if (n < 1 || points < 1 || draws == 0)
    throw ValidationError("chernoff_direction_check", "n, points and draws must be positive");
  const auto& spec = profile.spec();
  const SeedKey base{seed, kChernoffStream};
  std::vector<ChernoffCheck> out;
  for (int k = 0; k < points; ++k) {
    const SeedKey key = base.split(static_cast<std::uint64_t>(k));
    RandomStream dir_stream(key.split(0));
    std::vector<double> dir(static_cast<std::size_t>(n));
    for (double& d : dir) d = dir_stream.normal();

    ChernoffCheck c;
    c.point = level_set_boundary_point(profile, dir, r);
    std::vector<double> h(c.point.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto [ls, hi] = profile.legendre(c.point[i]);
      c.lambda_star_sum += ls;
      h[i] = hi;
    }
    c.bound = std::exp(-c.lambda_star_sum);

    const SeedKey draw_key = key.split(1);
    const auto count = static_cast<std::int64_t>(draws);
    std::int64_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (std::int64_t i = 0; i < count; ++i) {
      RandomStream stream(draw_key.split(static_cast<std::uint64_t>(i)));
      double stat = 0.0;
      for (std::size_t j = 0; j < h.size(); ++j) stat += h[j] * (sample(spec, stream) - c.point[j]);
      hits += stat >= 0.0 ? 1 : 0;
    }
    const double nd = static_cast<double>(draws);
    c.empirical = static_cast<double>(hits) / nd;
    c.se = std::sqrt(c.empirical * (1.0 - c.empirical) / nd);
    c.ok = c.empirical <= c.bound + 3.0 * c.se;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace polythresh
