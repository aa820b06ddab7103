#include "polythresh/cramer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "polythresh/errors.hpp"
#include "polythresh/quadrature.hpp"
#include "polythresh/roots.hpp"

namespace polythresh {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kTruncate = 46.0;  // e^-46 ~ 1e-20 of the peak

TiltedMoments mirror(TiltedMoments m, double t) {
  m.t = t;
  m.anchor = -m.anchor;
  m.mean_offset = -m.mean_offset;
  return m;
}

// ---- closed forms, t > 0 ---------------------------------------------------

TiltedMoments log_cosh_moments(double t) {
  TiltedMoments m;
  m.t = t;
  if (t < 1.0) {
    const double s = std::sinh(0.5 * t);
    m.log_z = std::log1p(2.0 * s * s);
    m.mean_offset = std::tanh(t);
    const double c = std::cosh(t);
    m.variance = 1.0 / (c * c);
  } else {
    const double e = std::exp(-2.0 * t);
    m.anchor = 1.0;
    m.log_z = -kLn2 + std::log1p(e);
    m.mean_offset = -2.0 * e / (1.0 + e);
    m.variance = 4.0 * e / ((1.0 + e) * (1.0 + e));
  }
  return m;
}

TiltedMoments log_sinhc_moments(double a, double t) {
  TiltedMoments m;
  m.t = t;
  const double u = a * t;
  const double u2 = u * u;
  if (u < 0.1) {
    m.log_z = u2 * (1.0 / 6 + u2 * (-1.0 / 180 + u2 * (1.0 / 2835 + u2 * (-1.0 / 37800 + u2 / 467775))));
    m.mean_offset = a * u *
                    (1.0 / 3 + u2 * (-1.0 / 45 + u2 * (2.0 / 945 + u2 * (-1.0 / 4725 + u2 * 2.0 / 93555))));
    m.variance = a * a *
                 (1.0 / 3 + u2 * (-1.0 / 15 + u2 * (2.0 / 189 + u2 * (-1.0 / 675 +
                                                               u2 * (2.0 / 10395 - u2 * 15202.0 / 638512875)))));
    return m;
  }
  if (u < 1.0) {
    m.log_z = std::log(std::sinh(u) / u);
    m.mean_offset = a * (1.0 / std::tanh(u) - 1.0 / u);
    const double s = std::sinh(u);
    m.variance = a * a * (1.0 / u2 - 1.0 / (s * s));
    return m;
  }
  const double e = std::exp(-2.0 * u);
  m.anchor = a;
  m.log_z = std::log1p(-e) - std::log(2.0 * u);
  m.mean_offset = 2.0 * a / std::expm1(2.0 * u) - 1.0 / t;
  const double inv_sinh2 = 4.0 * e / ((1.0 - e) * (1.0 - e));
  m.variance = a * a * (1.0 / u2 - inv_sinh2);
  return m;
}

TiltedMoments neg_log_one_minus_sq_moments(double t) {
  TiltedMoments m;
  m.t = t;
  const double gap = (1.0 - t) * (1.0 + t);
  m.log_z = -std::log1p(-t * t);
  m.mean_offset = 2.0 * t / gap;
  m.variance = 2.0 * (1.0 + t * t) / (gap * gap);
  return m;
}

// ---- quadrature route, t > 0 -----------------------------------------------

// Accepts a non-converged result when its own error estimate is still
// small; rounding noise in tabulated densities can stall the refinement.
bool usable(const quad::Result<3>& r) {
  if (r.converged) return true;
  return r.error[0] <= 1e-9 * r.value[0] && r.error[1] <= 1e-9 * std::abs(r.value[1]) + 1e-300 &&
         r.error[2] <= 1e-7 * r.value[2];
}

TiltedMoments finish(double t, double anchor, double shift, const quad::Result<3>& r) {
  if (!usable(r) || !(r.value[0] > 0.0))
    throw QuadratureFailure("log_mgf", "tilted moment quadrature did not converge");
  TiltedMoments m;
  m.t = t;
  m.anchor = anchor;
  const double z = r.value[0];
  m.log_z = shift + std::log(z);
  m.mean_offset = r.value[1] / z;
  m.variance = r.value[2] / z - m.mean_offset * m.mean_offset;
  if (!(m.variance > 0.0))
    throw QuadratureFailure("log_mgf_derivs", "tilted variance is not positive");
  return m;
}

quad::Tolerance moment_tolerance() {
  quad::Tolerance tol;
  tol.absolute = 1e-300;
  tol.relative = 1e-13;
  tol.max_intervals = 6000;
  return tol;
}

TiltedMoments quadrature_moments_compact(const MeasureSpec& spec, double t) {
  const double xs = spec.x_star();
  std::vector<double> nodes;
  for (double b : spec.density_breakpoints()) {
    nodes.push_back(b);
    nodes.push_back(-b);
  }
  double lf_max = -INFINITY;
  double shift = -INFINITY;
  for (double b : nodes) {
    const double lf = spec.log_density(b);
    lf_max = std::max(lf_max, lf);
    shift = std::max(shift, t * (b - xs) + lf);
  }
  // A density vanishing at x* peaks near d = -1/t instead of at a node.
  for (double k : {0.25, 0.5, 1.0, 2.0, 4.0})
    if (k / t < 2.0 * xs) shift = std::max(shift, -k + spec.log_density_from_end(k / t));
  // Integrate in d = x - x*, which keeps full precision next to x* at large t.
  const double d_lo = std::max(-2.0 * xs, -(kTruncate + lf_max - shift) / t);
  std::vector<double> bp = {d_lo, 0.0};
  for (double b : nodes)
    if (b - xs > d_lo && b < xs) bp.push_back(b - xs);
  for (double k : {1.0, 4.0, 16.0})
    if (-k / t > d_lo) bp.push_back(-k / t);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  auto f = [&](double d) {
    const double w = std::exp(t * d + spec.log_density_from_end(-d) - shift);
    return std::array<double, 3>{w, d * w, d * d * w};
  };
  return finish(t, xs, shift, quad::integrate<3>(f, std::span<const double>(bp), moment_tolerance()));
}

TiltedMoments quadrature_moments_unbounded(const MeasureSpec& spec, double t) {
  const double p = spec.kind() == MeasureKind::PNorm ? spec.p() : 1.0;
  const double anchor = p > 1.0 ? std::pow(t / p, 1.0 / (p - 1.0)) : 0.0;
  const double shift = spec.log_density(anchor);
  auto phi = [&](double x) { return t * (x - anchor) + spec.log_density(x) - shift; };

  double right = 1.0;
  while (phi(anchor + right) > -kTruncate) right *= 2.0;
  double left = 1.0;
  while (phi(-left) > -kTruncate) left *= 2.0;

  std::vector<double> bp = {-left, 0.0, anchor + right};
  if (anchor > 0.0) {
    bp.push_back(anchor);
    const double curv = p * (p - 1.0) * std::pow(anchor, p - 2.0);
    const double w = 3.0 / std::sqrt(curv);
    if (anchor - w > 0.0) bp.push_back(anchor - w);
    if (w < right) bp.push_back(anchor + w);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  auto f = [&](double x) {
    const double d = x - anchor;
    const double w = std::exp(phi(x));
    return std::array<double, 3>{w, d * w, d * d * w};
  };
  return finish(t, anchor, shift, quad::integrate<3>(f, std::span<const double>(bp), moment_tolerance()));
}

TiltedMoments positive_moments(const MeasureSpec& spec, double t, bool closed) {
  if (closed && spec.has_closed_lambda()) {
    switch (spec.closed_lambda()) {
      case ClosedLambda::LogCosh: return log_cosh_moments(t);
      case ClosedLambda::LogSinhc: return log_sinhc_moments(spec.half_width(), t);
      case ClosedLambda::NegLogOneMinusSq: return neg_log_one_minus_sq_moments(t);
      case ClosedLambda::None: break;
    }
  }
  if (spec.is_atomic()) return log_cosh_moments(t);
  return spec.compact_support() ? quadrature_moments_compact(spec, t)
                                : quadrature_moments_unbounded(spec, t);
}

double rademacher_lambda_star(double ax) {
  if (ax >= 1.0) return kLn2;
  return 0.5 * ((1.0 + ax) * std::log1p(ax) + (1.0 - ax) * std::log1p(-ax));
}

}  // namespace

// ---- profile ---------------------------------------------------------------

struct CramerProfile::Table {
  std::once_flag once;
  double step = 0.0;
  double u_max = 0.0;
  std::vector<double> value, slope;
};

CramerProfile::CramerProfile(MeasureSpec spec, CramerOptions options)
    : spec_(std::move(spec)), options_(options), table_(std::make_shared<Table>()) {
  if (!(options_.tol_newton > 0.0) || !(options_.tol_quad > 0.0) || !(options_.tail_log_cap > 0.0))
    throw ValidationError("cramer", "tolerances and the tail cap must be positive");
  if (options_.table_nodes < 3) throw ValidationError("cramer", "table needs at least 3 nodes");

  const double xs = spec_.x_star();
  if (spec_.is_atomic()) {
    x_max_eval_ = xs * (1.0 - 1e-6);
  } else {
    const double clip = spec_.compact_support() ? xs * (1.0 - options_.compact_clip) : INFINITY;
    const double cap = options_.tail_log_cap;
    if (spec_.compact_support() && tail_log(spec_, clip) <= cap) {
      x_max_eval_ = clip;
    } else {
      double lo = 0.0, hi = std::min(1.0, clip);
      while (tail_log(spec_, hi) <= cap) {
        lo = hi;
        hi *= 2.0;
      }
      for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (tail_log(spec_, mid) <= cap ? lo : hi) = mid;
      }
      x_max_eval_ = lo;
    }
  }
  build_grid();
}

TiltedMoments CramerProfile::moments(double t) const {
  if (!std::isfinite(t) || std::abs(t) >= spec_.t_star())
    throw DomainError("log_mgf", "|t| must be below t*");
  if (t == 0.0) {
    TiltedMoments m;
    m.variance = spec_.variance();
    return m;
  }
  const TiltedMoments m = positive_moments(spec_, std::abs(t), options_.use_closed_forms);
  return t > 0.0 ? m : mirror(m, t);
}

void CramerProfile::build_grid() {
  const double scale = 1.0 / std::sqrt(spec_.variance());
  const double ts = spec_.t_star();
  std::vector<double> ts_pos;
  double t = 0.05 * scale;
  if (std::isfinite(ts)) {
    while (t < 0.15 * ts) {
      ts_pos.push_back(t);
      t *= 1.25;
    }
    for (int k = 1; k < 400; ++k) {
      const double gap = ts * std::pow(0.85, k);
      if (gap < 1e-14 * ts) break;
      const double tk = ts - gap;
      if (!ts_pos.empty() && tk <= ts_pos.back()) continue;
      ts_pos.push_back(tk);
      if (moments(tk).mean() >= x_max_eval_) break;
    }
  } else {
    for (int k = 0; k < 800; ++k) {
      ts_pos.push_back(t);
      if (moments(t).mean() >= x_max_eval_) break;
      t *= 1.25;
    }
  }

  pos_t_.clear();
  pos_mean_.clear();
  std::vector<TiltedMoments> pos;
  for (double tk : ts_pos) {
    const TiltedMoments m = moments(tk);
    if (!(m.variance > 0.0))
      throw NumericalFailure("cramer", "Lambda'' is not positive on the grid");
    if (!pos_mean_.empty() && !(m.mean() > pos_mean_.back())) break;  // saturated in double
    pos_t_.push_back(tk);
    pos_mean_.push_back(m.mean());
    pos.push_back(m);
  }

  const std::size_t k = pos.size();
  t_grid_.assign(2 * k + 1, 0.0);
  lambda_grid_.assign(2 * k + 1, 0.0);
  dlambda_grid_.assign(2 * k + 1, 0.0);
  d2lambda_grid_.assign(2 * k + 1, spec_.variance());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t up = k + 1 + i, down = k - 1 - i;
    t_grid_[up] = pos[i].t;
    t_grid_[down] = -pos[i].t;
    lambda_grid_[up] = lambda_grid_[down] = pos[i].lambda();
    dlambda_grid_[up] = pos[i].mean();
    dlambda_grid_[down] = -pos[i].mean();
    d2lambda_grid_[up] = d2lambda_grid_[down] = pos[i].variance;
  }
}

double CramerProfile::solve_h(double ax, std::optional<double> warm_start) const {
  if (ax == 0.0) return 0.0;
  const double ts = spec_.t_star();
  auto mean_at = [&](double t) { return moments(t).mean(); };

  const auto idx = static_cast<std::size_t>(
      std::upper_bound(pos_mean_.begin(), pos_mean_.end(), ax) - pos_mean_.begin());
  double lo = idx == 0 ? 0.0 : pos_t_[idx - 1];
  double lo_mean = idx == 0 ? 0.0 : pos_mean_[idx - 1];
  double hi, hi_mean;
  if (idx < pos_t_.size()) {
    hi = pos_t_[idx];
    hi_mean = pos_mean_[idx];
  } else {
    hi = lo;
    hi_mean = lo_mean;
    for (int i = 0; i < 2000 && hi_mean < ax; ++i) {
      lo = hi;
      lo_mean = hi_mean;
      hi = std::isfinite(ts) ? 0.5 * (lo + ts) : std::max(2.0 * lo, 1.0);
      if (!(hi > lo)) break;
      hi_mean = mean_at(hi);
    }
    if (!(hi_mean >= ax))
      throw ConvergenceFailure("h_inverse", "could not bracket h(x); x is too close to x*");
  }

  double guess = lo + (hi - lo) * (ax - lo_mean) / (hi_mean - lo_mean);
  if (warm_start && *warm_start > lo && *warm_start < hi) guess = *warm_start;

  double tol = options_.tol_newton * std::max(1.0, ax);
  if (spec_.compact_support()) tol = std::min(tol, options_.tol_newton * (spec_.x_star() - ax));
  auto eval = [&](double t) {
    const TiltedMoments m = moments(t);
    return std::pair<double, double>{m.mean_offset - (ax - m.anchor), m.variance};
  };
  const auto res = roots::newton_bisect(eval, lo, hi, guess, tol);
  if (!res.converged) throw ConvergenceFailure("h_inverse", "Newton iteration did not converge");
  return res.root;
}

std::pair<double, double> CramerProfile::legendre(double x, std::optional<double> warm_start) const {
  const double ax = std::abs(x);
  const double sign = x < 0.0 ? -1.0 : 1.0;
  std::optional<double> warm;
  if (warm_start) warm = std::abs(*warm_start);
  if (spec_.is_atomic()) {
    if (ax > spec_.x_star()) throw DomainError("cramer_transform", "x outside the support");
    const double h = ax <= x_max_eval_ ? solve_h(ax, warm) : std::atanh(ax);
    return {rademacher_lambda_star(ax), sign * h};
  }
  if (!(ax < spec_.x_star())) throw DomainError("cramer_transform", "|x| must be below x*");
  if (ax == 0.0) return {0.0, 0.0};
  const double t = solve_h(ax, warm);
  const TiltedMoments m = moments(t);
  const double value = (ax - m.anchor) * t - m.log_z;
  return {std::max(0.0, value), sign * t};
}

void CramerProfile::build_table() const {
  Table& tb = *table_;
  const std::size_t k = options_.table_nodes;
  const double xs = spec_.x_star();
  const bool compact = spec_.compact_support();
  tb.u_max = compact ? -std::log1p(-x_max_eval_ / xs) : x_max_eval_;
  tb.step = tb.u_max / static_cast<double>(k - 1);
  tb.value.assign(k, 0.0);
  tb.slope.assign(k, 0.0);
  std::optional<double> warm;
  for (std::size_t i = 1; i < k; ++i) {
    const double u = tb.step * static_cast<double>(i);
    const double x = compact ? -xs * std::expm1(-u) : u;
    const auto [value, h] = legendre(std::min(x, x_max_eval_), warm);
    warm = h;
    tb.value[i] = value;
    tb.slope[i] = compact ? h * xs * std::exp(-u) : h;
  }
}

double CramerProfile::lambda_star_fast(double x) const {
  const double ax = std::abs(x);
  if (spec_.is_atomic()) {
    if (ax > 1.0) throw DomainError("cramer_transform", "x outside the support");
    return rademacher_lambda_star(ax);
  }
  std::call_once(table_->once, [this] { build_table(); });
  const Table& tb = *table_;
  const double u = spec_.compact_support() ? -std::log1p(-ax / spec_.x_star()) : ax;
  if (!(u < tb.u_max)) return legendre(ax).first;
  const double pos = u / tb.step;
  const auto i = std::min(static_cast<std::size_t>(pos), tb.value.size() - 2);
  const double s = pos - static_cast<double>(i);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * tb.value[i] + h10 * tb.step * tb.slope[i] + h01 * tb.value[i + 1] +
         h11 * tb.step * tb.slope[i + 1];
}

// ---- free functions --------------------------------------------------------

double log_mgf(const CramerProfile& profile, double t) { return profile.moments(t).lambda(); }

std::pair<double, double> log_mgf_derivs(const CramerProfile& profile, double t) {
  const TiltedMoments m = profile.moments(t);
  return {m.mean(), m.variance};
}

double h_inverse(const CramerProfile& profile, double x, std::optional<double> warm_start) {
  if (!(std::abs(x) <= profile.x_max_eval()))
    throw DomainError("h_inverse", "|x| exceeds the evaluation clip x_max_eval");
  return profile.legendre(x, warm_start).second;
}

namespace {

CramerEval make_eval(const CramerProfile& profile, double x, std::optional<double> warm) {
  const auto& spec = profile.spec();
  if (!(std::abs(x) <= profile.x_max_eval()) && !(spec.is_atomic() && std::abs(x) <= spec.x_star()))
    throw DomainError("cramer_transform", "|x| exceeds the evaluation clip x_max_eval");
  CramerEval e;
  e.x = x;
  const auto [value, h] = profile.legendre(x, warm);
  e.lambda_star = value;
  e.h_of_x = h;
  e.tail_m = tail_log(spec, std::abs(x));
  e.ratio = value < 1e-12 ? NAN : e.tail_m / value;
  return e;
}

}  // namespace

CramerEval cramer_transform(const CramerProfile& profile, double x) {
  return make_eval(profile, x, std::nullopt);
}

std::vector<CramerEval> lambda_star_condition_scan(const CramerProfile& profile,
                                                   std::span<const double> x_grid) {
  std::vector<CramerEval> out;
  out.reserve(x_grid.size());
  std::optional<double> warm;
  double prev = 0.0;
  for (double x : x_grid) {
    if (!(x > prev)) throw DomainError("lambda_star_condition_scan", "grid must be increasing and positive");
    if (x > profile.x_max_eval())
      throw DomainError("lambda_star_condition_scan", "grid exceeds x_max_eval");
    out.push_back(make_eval(profile, x, warm));
    warm = out.back().h_of_x;
    prev = x;
  }
  return out;
}

PNormAsymptotics pnorm_asymptotics_report(double p, std::span<const double> t_grid,
                                          std::span<const double> x_grid, CramerOptions options) {
  if (!(p > 1.0)) throw ValidationError("pnorm_asymptotics_report", "p must exceed 1");
  const CramerProfile profile(MeasureSpec::pnorm(p), options);
  PNormAsymptotics r;
  r.p = p;
  r.q = p / (p - 1.0);
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DomainError("pnorm_asymptotics_report", "t grid must be positive");
    r.t.push_back(t);
    r.lambda_ratio.push_back(log_mgf(profile, t) * std::pow(p, r.q) / ((p - 1.0) * std::pow(t, r.q)));
  }
  for (const CramerEval& e : lambda_star_condition_scan(profile, x_grid)) {
    const double xp = std::pow(e.x, p);
    r.x.push_back(e.x);
    r.h_ratio.push_back(e.h_of_x / (p * std::pow(e.x, p - 1.0)));
    r.lambda_star_ratio.push_back(e.lambda_star / xp);
    r.tail_ratio.push_back(e.tail_m / xp);
  }
  return r;
}

double integrate_half_support(const CramerProfile& profile,
                              const std::function<double(double, double)>& g,
                              double relative_tol) {
  const auto& spec = profile.spec();
  quad::Tolerance tol;
  tol.absolute = 1e-300;
  tol.relative = relative_tol;
  tol.max_intervals = 8000;
  quad::Result<1> res;
  if (spec.compact_support()) {
    const double xs = spec.x_star();
    const double x_end =
        spec.is_atomic() ? xs * (1.0 - profile.options().compact_clip) : profile.x_max_eval();
    const double u_max = -std::log1p(-x_end / xs);
    std::vector<double> bp = {0.0, u_max};
    for (double b : spec.density_breakpoints())
      if (b > 0.0 && b < x_end) bp.push_back(-std::log1p(-b / xs));
    for (double b = 1.0; b < u_max; b *= 2.0) bp.push_back(b);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    res = quad::integrate_scalar(
        [&](double u) {
          const double gap = xs * std::exp(-u);
          const double x = std::min(-xs * std::expm1(-u), x_end);
          return g(x, profile.legendre(x).first) * gap;
        },
        std::span<const double>(bp), tol);
  } else {
    const double x_end = profile.x_max_eval();
    std::vector<double> bp = {0.0, x_end};
    for (double b = 0.5; b < x_end; b *= 2.0) bp.push_back(b);
    std::sort(bp.begin(), bp.end());
    res = quad::integrate_scalar([&](double x) { return g(x, profile.legendre(x).first); },
                                 std::span<const double>(bp), tol);
  }
  if (!res.converged) throw QuadratureFailure("integrate_half_support", "quadrature did not converge");
  return 2.0 * res.value[0];
}

double exp_half_lambda_star_integral(const CramerProfile& profile) {
  const auto& spec = profile.spec();
  if (spec.is_atomic())
    throw AtomicMeasure("exp_half_lambda_star_integral", "measure must be atomless");
  if (!(profile.x_max_eval() > 0.0))
    throw ValidationError("exp_half_lambda_star_integral", "degenerate evaluation range");
  return integrate_half_support(
      profile, [&](double x, double ls) { return std::exp(0.5 * ls) * density(spec, x); }, 1e-10);
}

double lambda_star_inverse(const CramerProfile& profile, double level) {
  if (!(level >= 0.0) || !std::isfinite(level))
    throw DomainError("lambda_star_inverse", "level must be finite and >= 0");
  if (level == 0.0) return 0.0;
  const auto& spec = profile.spec();
  const double ts = spec.t_star();
  auto psi = [&](double t) {
    const TiltedMoments m = profile.moments(t);
    return t * m.mean_offset - m.log_z;  // Lambda*(Lambda'(t))
  };
  auto grid_t = profile.t_grid();
  double lo = 0.0, hi = NAN;
  for (std::size_t i = grid_t.size() / 2 + 1; i < grid_t.size(); ++i) {
    if (psi(grid_t[i]) >= level) {
      hi = grid_t[i];
      break;
    }
    lo = grid_t[i];
  }
  if (std::isnan(hi)) {
    double cur = lo;
    for (int i = 0; i < 2000; ++i) {
      const double next = std::isfinite(ts) ? 0.5 * (cur + ts) : std::max(2.0 * cur, 1.0);
      if (!(next > cur)) break;
      if (psi(next) >= level) {
        lo = cur;
        hi = next;
        break;
      }
      cur = next;
    }
    if (std::isnan(hi))
      throw DomainError("lambda_star_inverse", "level exceeds the attainable range of Lambda*");
  }
  auto eval = [&](double t) {
    const TiltedMoments m = profile.moments(t);
    return std::pair<double, double>{t * m.mean_offset - m.log_z - level, t * m.variance};
  };
  const auto res = roots::newton_bisect(eval, lo, hi, 0.5 * (lo + hi), 1e-13 * std::max(1.0, level));
  if (!res.converged) throw ConvergenceFailure("lambda_star_inverse", "Newton iteration did not converge");
  return profile.moments(res.root).mean();
}

TiltedSampler::TiltedSampler(const CramerProfile& profile, double t)
    : profile_(&profile), t_(t), lambda_(log_mgf(profile, t)) {
  const auto& spec = profile.spec();
  exact_ = spec.kind() == MeasureKind::SymExponential ||
           (spec.kind() == MeasureKind::PNorm && spec.p() == 1.0);
  right_prob_ = 0.5 * (1.0 + t);
}

TiltedSampler::Draw TiltedSampler::operator()(RandomStream& stream) const {
  if (exact_) {
    // Tilted two-sided exponential: rate 1 - t on the right, 1 + t on the left.
    const bool right = stream.uniform() < right_prob_;
    const double e = -std::log(stream.uniform_open());
    return {right ? e / (1.0 - t_) : -e / (1.0 + t_), 1.0};
  }
  const double x = sample(profile_->spec(), stream);
  return {x, std::exp(t_ * x - lambda_)};
}

}  // namespace polythresh
