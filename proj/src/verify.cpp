#include "polythresh/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "polythresh/cramer.hpp"
#include "polythresh/hull.hpp"
#include "polythresh/polytope_sim.hpp"
#include "polythresh/quadrature.hpp"
#include "polythresh/stats.hpp"
#include "polythresh/thresholds.hpp"

namespace polythresh {

namespace {

constexpr double kLn2 = 0.693147180559945309417;
// The two sweeps of criterion 10 need N_max * M * R around 1e11.
constexpr double kSuiteOperationCap = 1e12;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) { return mix64(seed ^ mix64(tag)); }

std::string fd(double v) { return format_double(v); }

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// 1/u - 1/(e^u - 1), with a series near 0.
double bose_gap(double u) {
  if (u < 1e-2) {
    const double u2 = u * u;
    return 0.5 - u / 12.0 + u * u2 / 720.0 - u * u2 * u2 / 30240.0;
  }
  return 1.0 / u - 1.0 / std::expm1(u);
}

// Area of the convex hull of planar points (monotone chain + shoelace).
double hull_area_2d(const HullSample& hull) {
  std::vector<std::pair<double, double>> p(hull.N);
  for (std::size_t j = 0; j < hull.N; ++j) p[j] = {hull.point(j)[0], hull.point(j)[1]};
  std::sort(p.begin(), p.end());
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  double a = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& u = h[i];
    const auto& v = h[(i + 1) % h.size()];
    a += u.first * v.second - v.first * u.second;
  }
  return 0.5 * std::abs(a);
}

CriterionOutcome c1_rademacher() {
  Timer timer;
  CramerProfile profile(MeasureSpec::rademacher());
  const ThresholdConstants c = constants(profile);
  const double err = std::abs(*c.kappa_vol - (kLn2 - 0.5));
  const double s = timer.seconds();
  const bool fast = s < 1.0;
  return {1, "rademacher volume constant", err < 1e-8 && fast,
          "kappa_vol=" + fd(*c.kappa_vol) + " error=" + fd(err) + " runtime_under_1s=" + (fast ? "yes" : "no"),
          s};
}

CriterionOutcome c2_uniform() {
  Timer timer;
  CramerProfile profile(MeasureSpec::uniform(1.0));
  const ThresholdConstants c = constants(profile);
  const double legendre_half = 0.5 * integrate_half_support(profile, [](double, double ls) { return ls; });
  // The integrand is 1/u^2 - 2e^{-u}/u + ... beyond 40; the tail is 1/40 to
  // well below 1e-15.
  const double cut = 40.0;
  const std::vector<double> bp = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, cut};
  const auto q = quad::integrate_scalar(
      [](double u) {
        const double g = bose_gap(u);
        return g * g;
      },
      std::span<const double>(bp), quad::Tolerance{1e-15, 1e-14});
  const double u_integral = q.value[0] + 1.0 / cut;
  const double err_u = std::abs(legendre_half - u_integral);
  const double err_t1 = std::abs(c.t1 - *c.kappa_vol);
  const double s = timer.seconds();
  const bool fast = s < 5.0;
  return {2, "uniform cross-check", err_u < 1e-8 && err_t1 < 1e-8 && fast,
          "half_integral=" + fd(legendre_half) + " u_integral=" + fd(u_integral) + " error=" + fd(err_u) +
              " t1=" + fd(c.t1) + " kappa_vol=" + fd(*c.kappa_vol) + " t1_error=" + fd(err_t1) +
              " runtime_under_5s=" + (fast ? "yes" : "no"),
          s};
}

CriterionOutcome c3_exponential() {
  Timer timer;
  CramerOptions opt;
  opt.use_closed_forms = false;  // Lambda from quadrature, not the closed form
  CramerProfile profile(MeasureSpec::sym_exponential(), opt);
  double worst = 0.0;
  std::optional<double> warm;
  for (int k = 0; k <= 300; ++k) {
    const double x = 0.1 * k;
    const auto [ls, h] = profile.legendre(x, warm);
    warm = h;
    const double r = std::sqrt(1.0 + x * x);
    const double exact = r - 1.0 - std::log((r + 1.0) / 2.0);
    worst = std::max(worst, std::abs(ls - exact));
  }
  const double s = timer.seconds();
  const bool fast = s < 5.0;
  return {3, "exponential closed form", worst < 1e-7 && fast,
          "max_error=" + fd(worst) + " points=301 runtime_under_5s=" + std::string(fast ? "yes" : "no"), s};
}

CriterionOutcome c4_gaussian() {
  Timer timer;
  CramerOptions opt;
  opt.tail_log_cap = 120.0;  // x up to 10 needs m(x) near 50; keep headroom
  opt.tol_newton = 1e-13;
  CramerProfile profile(MeasureSpec::pnorm(2.0), opt);
  double worst_lambda = 0.0, worst_h = 0.0;
  std::optional<double> warm;
  for (int k = 0; k <= 100; ++k) {
    const double v = 0.1 * k;
    worst_lambda = std::max(worst_lambda, std::abs(log_mgf(profile, v) - 0.25 * v * v));
    const double h = h_inverse(profile, v, warm);
    warm = h;
    worst_h = std::max(worst_h, std::abs(h - 2.0 * v));
  }
  return {4, "gaussian-type exactness", worst_lambda < 1e-10 && worst_h < 1e-10,
          "max_lambda_error=" + fd(worst_lambda) + " max_h_error=" + fd(worst_h), timer.seconds()};
}

CriterionOutcome c5_tilting(std::uint64_t seed) {
  Timer timer;
  const std::vector<MeasureSpec> specs = {MeasureSpec::rademacher(), MeasureSpec::uniform(1.0),
                                          MeasureSpec::sym_exponential(), MeasureSpec::pnorm(1.5),
                                          MeasureSpec::pnorm(2.0), MeasureSpec::pnorm(3.0)};
  constexpr std::size_t draws = 100000;
  bool pass = true;
  double worst_z = 0.0;
  int cases = 0;
  std::ostringstream failures;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    CramerProfile profile(specs[m]);
    std::vector<double> ts = {0.2, 0.5};
    if (std::isfinite(specs[m].t_star())) ts.push_back(0.9 * specs[m].t_star());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const TiltedSampler sampler(profile, ts[i]);
      const SeedKey key{sub_seed(seed, 5), m * 16 + i};
      std::vector<double> w(draws), wx(draws), xs(draws);
#pragma omp parallel for schedule(static)
      for (std::size_t j = 0; j < draws; ++j) {
        RandomStream stream(key.split(j));
        const auto d = sampler(stream);
        xs[j] = d.x;
        w[j] = d.weight;
        wx[j] = d.weight * d.x;
      }
      const double sw = pairwise_sum(w);
      const double est = pairwise_sum(wx) / sw;
      std::vector<double> dev(draws);
      for (std::size_t j = 0; j < draws; ++j) dev[j] = w[j] * w[j] * (xs[j] - est) * (xs[j] - est);
      const double se = std::sqrt(pairwise_sum(dev)) / sw;
      const double target = profile.moments(ts[i]).mean();
      const double z = std::abs(est - target) / se;
      worst_z = std::max(worst_z, z);
      ++cases;
      if (!(z <= 4.0)) {
        pass = false;
        failures << ' ' << specs[m].name() << "@t=" << fd(ts[i]);
      }
    }
  }
  std::string detail = "cases=" + std::to_string(cases) + " worst_z=" + fd(worst_z);
  if (!pass) detail += " failed:" + failures.str();
  return {5, "tilting identity", pass, detail, timer.seconds()};
}

CriterionOutcome c6_exp_half() {
  Timer timer;
  const std::vector<MeasureSpec> specs = {MeasureSpec::uniform(1.0), MeasureSpec::sym_exponential(),
                                          MeasureSpec::pnorm(1.5), MeasureSpec::pnorm(2.0),
                                          MeasureSpec::pnorm(3.0)};
  bool pass = true;
  std::string detail;
  for (const auto& spec : specs) {
    CramerProfile profile(spec);
    const double v = exp_half_lambda_star_integral(profile);
    pass = pass && v <= 4.0;
    detail += (detail.empty() ? "" : " ") + spec.name() + "=" + fd(v);
  }
  return {6, "exp(Lambda*/2) integral bound", pass, detail, timer.seconds()};
}

CriterionOutcome c7_condition() {
  Timer timer;
  bool pass = true;
  std::string detail;
  for (double p : {1.0, 2.0, 3.0}) {
    CramerProfile profile(MeasureSpec::pnorm(p));
    const double x_last = p == 1.0 ? 50.0 : profile.x_max_eval();
    std::vector<double> grid;
    for (int k = 0; k < 50; ++k) grid.push_back(0.5 + (x_last - 0.5) * k / 49.0);
    const auto rows = lambda_star_condition_scan(profile, grid);
    double min_ratio = INFINITY;
    bool monotone = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      min_ratio = std::min(min_ratio, rows[k].ratio);
      if (k > 0 && rows[k].ratio > rows[k - 1].ratio * (1.0 + 1e-9)) monotone = false;
    }
    const double last = rows.back().ratio;
    const bool ok = min_ratio >= 1.0 - 1e-9 && last < 1.15 && monotone;
    pass = pass && ok;
    detail += (detail.empty() ? "" : " ") + std::string("p=") + fd(p) + ":x_last=" + fd(x_last) +
              ",min_ratio=" + fd(min_ratio) + ",last_ratio=" + fd(last) +
              ",monotone=" + (monotone ? "yes" : "no");
  }
  return {7, "Lambda*-condition diagnostics", pass, detail, timer.seconds()};
}

CriterionOutcome c8_chernoff(std::uint64_t seed) {
  Timer timer;
  bool pass = true;
  std::string detail;
  int tag = 0;
  for (const auto& spec : {MeasureSpec::uniform(1.0), MeasureSpec::sym_exponential()}) {
    CramerProfile profile(spec);
    const double t1 = constants(profile).t1;
    for (int n : {4, 8}) {
      const auto checks = chernoff_direction_check(profile, n, t1 * n, 20, 100000, sub_seed(seed, 80 + tag++));
      int ok = 0;
      for (const auto& c : checks) ok += c.ok ? 1 : 0;
      pass = pass && ok == static_cast<int>(checks.size());
      detail += (detail.empty() ? "" : " ") + spec.name() + "/n=" + std::to_string(n) + ":" +
                std::to_string(ok) + "/" + std::to_string(checks.size());
    }
  }
  const double s = timer.seconds();
  const bool fast = s < 120.0;
  detail += std::string(" runtime_under_2min=") + (fast ? "yes" : "no");
  return {8, "Chernoff depth bound", pass && fast, detail, s};
}

CriterionOutcome c9_oracle(std::uint64_t seed) {
  Timer timer;
  const MeasureSpec spec = MeasureSpec::uniform(1.0);
  constexpr std::size_t M = 20000;
  const std::size_t Ns[] = {5, 10, 50};
  bool pass = true;
  std::string detail;
  double worst_z = 0.0;
  for (std::size_t N : Ns) {
    int agree = 0;
    for (int s = 0; s < 50; ++s) {
      const std::uint64_t tag = N * 1000 + static_cast<std::uint64_t>(s);
      const HullSample hull = draw_hull(spec, 2, N, SeedKey{sub_seed(seed, 9), tag});
      const double p = hull_area_2d(hull) / 4.0;
      const EstimateResult est = estimate_measure(spec, hull, M, sub_seed(seed, 90000 + tag));
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(M));
      const double z = std::abs(est.mean - p) / se;
      worst_z = std::max(worst_z, z);
      if (z <= 3.0 && est.unverified == 0) ++agree;
    }
    pass = pass && agree == 50;
    detail += "N=" + std::to_string(N) + ":" + std::to_string(agree) + "/50 ";
  }
  detail += "worst_z=" + fd(worst_z);
  return {9, "2D oracle equivalence", pass, detail, timer.seconds()};
}

std::vector<double> scaled_grid(double lo, double hi, int steps, double t1) {
  std::vector<double> g;
  for (int k = 0; k < steps; ++k) g.push_back(t1 * (lo + (hi - lo) * k / (steps - 1)));
  return g;
}

std::string opt_str(const std::optional<double>& v) { return v ? fd(*v) : std::string("null"); }

CriterionOutcome c10_sweep(std::uint64_t seed) {
  Timer timer;
  const MeasureSpec spec = MeasureSpec::uniform(1.0);
  const double t1 = constants(CramerProfile(spec)).t1;
  SweepOptions opt;
  opt.delta = 0.25;
  opt.operation_cap = kSuiteOperationCap;

  const auto grid10 = scaled_grid(0.2, 2.0, 10, t1);
  const SweepGrid g10 = sweep(spec, 10, grid10, 20, 2000, sub_seed(seed, 10), opt);
  const double main_seconds = timer.seconds();
  const bool fast = main_seconds < 600.0;
  const double at04 = g10.rows[1].mean;
  const double at18 = g10.rows[8].mean;
  bool pass = at04 < 0.25 && at18 > 0.75 && fast && g10.unverified == 0;
  double width10 = NAN;
  if (g10.rho_hat_low && g10.rho_hat_high) {
    const double lo = *g10.rho_hat_low, hi = *g10.rho_hat_high;
    width10 = hi - lo;
    pass = pass && lo < hi && t1 >= lo - 0.5 * t1 && t1 <= hi + 0.5 * t1;
  } else {
    pass = false;
  }

  // Companion at n = 14 on the part of the grid around the crossings.
  const auto grid14 = scaled_grid(0.8, 1.6, 9, t1);
  const SweepGrid g14 = sweep(spec, 14, grid14, 4, 1000, sub_seed(seed, 14), opt);
  double width14 = NAN;
  if (g14.rho_hat_low && g14.rho_hat_high) width14 = *g14.rho_hat_high - *g14.rho_hat_low;
  const bool narrower = std::isfinite(width14) && std::isfinite(width10) && width14 < width10;
  pass = pass && narrower && g14.unverified == 0;

  const std::string detail =
      "n=10: mean@0.4T1=" + fd(at04) + " mean@1.8T1=" + fd(at18) + " rho_hat_low=" + opt_str(g10.rho_hat_low) +
      " rho_hat_high=" + opt_str(g10.rho_hat_high) + " t1=" + fd(t1) +
      " runtime_under_10min=" + (fast ? "yes" : "no") + "; n=14: rho_hat_low=" + opt_str(g14.rho_hat_low) +
      " rho_hat_high=" + opt_str(g14.rho_hat_high) + " width14=" + fd(width14) + " width10=" + fd(width10) +
      " narrower=" + (narrower ? "yes" : "no");
  return {10, "sharp-threshold sweep", pass, detail, timer.seconds()};
}

CriterionOutcome c11_upper(std::uint64_t seed) {
  Timer timer;
  const MeasureSpec spec = MeasureSpec::uniform(1.0);
  CramerProfile profile(spec);
  const ThresholdConstants consts = constants(profile);
  const int n = 8;
  const std::size_t N = vertex_count(0.8 * consts.t1, n);
  const double r = 0.9 * consts.t1 * n;
  constexpr int hulls = 100;
  std::vector<double> est(hulls);
  for (int h = 0; h < hulls; ++h) {
    const HullSample hull = draw_hull(spec, n, N, SeedKey{sub_seed(seed, 11), static_cast<std::uint64_t>(h)});
    est[static_cast<std::size_t>(h)] = estimate_measure(spec, hull, 2000, sub_seed(seed, 1100 + h)).mean;
  }
  const MeanSe hull_measure = mean_se(est);
  const double r_grid[] = {r};
  const auto row = upper_bound_curve(consts, profile, n, r_grid, static_cast<double>(N), 100000,
                                     sub_seed(seed, 111))
                       .front();
  const double se_level = row.ci_half / 1.959963984540054;
  const double se = std::sqrt(hull_measure.se * hull_measure.se + se_level * se_level);
  const double bound = row.level_set_measure + row.n_exp_minus_r + 3.0 * se;
  return {11, "upper-bound curve", hull_measure.mean <= bound,
          "N=" + std::to_string(N) + " r=" + fd(r) + " E_hull_measure=" + fd(hull_measure.mean) +
              " level_set_measure=" + fd(row.level_set_measure) + " N_exp_minus_r=" + fd(row.n_exp_minus_r) +
              " bound_plus_3se=" + fd(bound),
          timer.seconds()};
}

}  // namespace

bool AcceptanceReport::all_pass() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.pass; });
}

std::string format_outcome(const CriterionOutcome& o) {
  return std::string(o.pass ? "PASS" : "FAIL") + " [" + std::to_string(o.id) + "] " + o.name + ": " + o.detail;
}

std::string AcceptanceReport::text() const {
  std::string out;
  for (const auto& o : outcomes) out += format_outcome(o) + '\n';
  return out;
}

AcceptanceReport run_acceptance(const AcceptanceOptions& options) {
  const std::uint64_t seed = options.seed;
  const std::vector<std::function<CriterionOutcome()>> criteria = {
      [] { return c1_rademacher(); },       [] { return c2_uniform(); },
      [] { return c3_exponential(); },      [] { return c4_gaussian(); },
      [seed] { return c5_tilting(seed); },  [] { return c6_exp_half(); },
      [] { return c7_condition(); },        [seed] { return c8_chernoff(seed); },
      [seed] { return c9_oracle(seed); },   [seed] { return c10_sweep(seed); },
      [seed] { return c11_upper(seed); },
  };
  AcceptanceReport report;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    CriterionOutcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0.0};
    }
    if (options.on_result) options.on_result(o);
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

}  // namespace polythresh
