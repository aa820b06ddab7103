#include "polythresh/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "polythresh/errors.hpp"
#include "polythresh/quadrature.hpp"

namespace polythresh {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Linear interpolation on a sorted grid, zero outside it.
double interpolate(std::span<const double> xs, std::span<const double> fs, double x) {
  if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.end()) return fs.back();
  const auto i = static_cast<std::size_t>(it - xs.begin());
  if (i == 0) return fs.front();
  const double w = xs[i] - xs[i - 1];
  // Measure from the nearer node; keeps relative accuracy where f -> 0.
  if (x - xs[i - 1] <= xs[i] - x) return fs[i - 1] + (x - xs[i - 1]) / w * (fs[i] - fs[i - 1]);
  return fs[i] - (xs[i] - x) / w * (fs[i] - fs[i - 1]);
}

// Tail integral of exp(-u^p) over [x, inf), returned as log J with
// integral = exp(-x^p) * J.
double pnorm_log_tail_factor(double p, double x) {
  auto excess = [p, x](double s) {
    if (x == 0.0) return std::pow(s, p);
    return std::pow(x, p) * std::expm1(p * std::log1p(s / x));
  };
  double upper = 1.0;
  while (excess(upper) < 46.0) upper *= 2.0;
  const std::array<double, 3> bp = {0.0, std::min(1.0, upper), upper};
  quad::Tolerance tol;
  tol.absolute = 1e-14;
  tol.relative = 1e-14;
  auto res = quad::integrate_scalar([&](double s) { return std::exp(-excess(s)); },
                                    std::span<const double>(bp), tol);
  if (!res.converged) throw QuadratureFailure("tail_log", "tail quadrature did not converge");
  return std::log(res.value[0]);
}

std::string format_p(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

}  // namespace

MeasureSpec MeasureSpec::rademacher() {
  MeasureSpec m;
  m.kind_ = MeasureKind::Rademacher;
  m.name_ = "rademacher";
  m.x_star_ = 1.0;
  m.t_star_ = INFINITY;
  m.atom_at_x_star_ = 0.5;
  m.closed_lambda_ = ClosedLambda::LogCosh;
  m.admissible_ = Admissibility::No;  // atom at x*
  m.lambda_star_condition_ = false;
  m.variance_ = 1.0;
  return m;
}

MeasureSpec MeasureSpec::uniform(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ValidationError("measure", "uniform half-width must be positive and finite");
  MeasureSpec m;
  m.kind_ = MeasureKind::Uniform;
  m.name_ = "uniform";
  m.half_width_ = half_width;
  m.log_norm_ = -std::log(2.0 * half_width);
  m.x_star_ = half_width;
  m.t_star_ = INFINITY;
  m.closed_lambda_ = ClosedLambda::LogSinhc;
  m.variance_ = half_width * half_width / 3.0;
  return m;
}

MeasureSpec MeasureSpec::sym_exponential() {
  MeasureSpec m;
  m.kind_ = MeasureKind::SymExponential;
  m.name_ = "exp";
  m.log_norm_ = -kLn2;
  m.x_star_ = INFINITY;
  m.t_star_ = 1.0;
  m.closed_lambda_ = ClosedLambda::NegLogOneMinusSq;
  m.variance_ = 2.0;
  return m;
}

MeasureSpec MeasureSpec::pnorm(double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw ValidationError("measure", "pnorm requires a finite p >= 1");
  MeasureSpec m;
  m.kind_ = MeasureKind::PNorm;
  m.name_ = "pnorm(p=" + format_p(p) + ")";
  m.p_ = p;
  m.log_norm_ = -kLn2 - std::lgamma(1.0 + 1.0 / p);
  m.x_star_ = INFINITY;
  // {Lambda < inf} is bounded only for p = 1.
  m.t_star_ = (p == 1.0) ? 1.0 : INFINITY;
  m.variance_ = std::exp(std::lgamma(3.0 / p) - std::lgamma(1.0 / p));
  return m;
}

MeasureSpec MeasureSpec::tabulated(std::span<const double> xs_in, std::span<const double> fs_in) {
  if (xs_in.size() != fs_in.size())
    throw ValidationError("measure", "tabulated density: x and f lengths differ");
  if (xs_in.size() < 2)
    throw ValidationError("measure", "tabulated density needs at least two grid points");

  std::vector<std::pair<double, double>> pts;
  pts.reserve(xs_in.size());
  for (std::size_t i = 0; i < xs_in.size(); ++i) {
    if (!std::isfinite(xs_in[i]) || !std::isfinite(fs_in[i]) || fs_in[i] < 0.0)
      throw ValidationError("measure", "tabulated density: values must be finite, f >= 0");
    pts.emplace_back(xs_in[i], fs_in[i]);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> xs, fs;
  for (const auto& [x, f] : pts) {
    if (!xs.empty() && x == xs.back())
      throw ValidationError("measure", "tabulated density: duplicate grid point");
    xs.push_back(x);
    fs.push_back(f);
  }
  const bool one_sided = xs.front() >= 0.0;

  std::vector<double> grid = {0.0};
  for (double x : xs) grid.push_back(std::abs(x));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 2)
    throw ValidationError("measure", "tabulated density: grid collapses to a single point");

  std::vector<double> fsym(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double right = interpolate(xs, fs, grid[i]);
    const double left = one_sided ? right : interpolate(xs, fs, -grid[i]);
    fsym[i] = 0.5 * (left + right);
  }
  // Trim trailing zeros, keeping one zero node as the support end.
  std::size_t last = grid.size() - 1;
  while (last > 0 && fsym[last] == 0.0 && fsym[last - 1] == 0.0) --last;
  grid.resize(last + 1);
  fsym.resize(last + 1);
  if (grid.size() < 2)
    throw ValidationError("measure", "tabulated density has no mass");

  double half_mass = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    half_mass += 0.5 * (fsym[i] + fsym[i + 1]) * (grid[i + 1] - grid[i]);
  if (!(half_mass > 0.0)) throw ValidationError("measure", "tabulated density has no mass");
  for (double& f : fsym) f /= 2.0 * half_mass;

  auto table = std::make_shared<TabulatedDensity>();
  table->x = grid;
  table->f = fsym;
  table->tail_mass.assign(grid.size(), 0.0);
  double second = 0.0;
  for (std::size_t i = grid.size() - 1; i-- > 0;) {
    const double a = grid[i], b = grid[i + 1];
    const double w = b - a;
    table->tail_mass[i] = table->tail_mass[i + 1] + 0.5 * (fsym[i] + fsym[i + 1]) * w;
    const double slope = (fsym[i + 1] - fsym[i]) / w;
    const double intercept = fsym[i] - slope * a;
    second += intercept * (b * b * b - a * a * a) / 3.0 + slope * (b * b * b * b - a * a * a * a) / 4.0;
  }
  table->second_moment = 2.0 * second;

  MeasureSpec m;
  m.kind_ = MeasureKind::Tabulated;
  m.name_ = "tabulated";
  m.x_star_ = grid.back();
  m.t_star_ = INFINITY;
  m.admissible_ = Admissibility::Unknown;  // log-concavity is not checked
  m.lambda_star_condition_ = false;
  m.variance_ = table->second_moment;
  m.table_ = std::move(table);
  return m;
}

MeasureSpec MeasureSpec::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("measure", "cannot open density file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("measure", "density file is empty");
  {
    std::string head = line;
    std::replace(head.begin(), head.end(), ',', ' ');
    std::istringstream row(head);
    double a = 0.0, b = 0.0;
    if (row >> a >> b) throw ValidationError("measure", "density file must start with a header row");
  }
  std::vector<double> xs, fs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0, f = 0.0;
    if (!(row >> x >> f))
      throw ValidationError("measure", "density file line " + std::to_string(line_no) +
                                           ": expected two numeric columns");
    xs.push_back(x);
    fs.push_back(f);
  }
  return tabulated(xs, fs);
}

double MeasureSpec::log_density(double x) const {
  const double ax = std::abs(x);
  switch (kind_) {
    case MeasureKind::Rademacher:
      throw AtomicMeasure("density", "rademacher has no density");
    case MeasureKind::Uniform:
      return ax <= half_width_ ? log_norm_ : -INFINITY;
    case MeasureKind::SymExponential:
      return -ax + log_norm_;
    case MeasureKind::PNorm:
      return -std::pow(ax, p_) + log_norm_;
    case MeasureKind::Tabulated: {
      const double f = interpolate(table_->x, table_->f, ax);
      return f > 0.0 ? std::log(f) : -INFINITY;
    }
  }
  return -INFINITY;
}

double MeasureSpec::log_density_from_end(double gap) const {
  if (kind_ != MeasureKind::Tabulated) return log_density(x_star_ - gap);
  if (!(gap >= 0.0)) return -INFINITY;
  const auto& xs = table_->x;
  const auto& fs = table_->f;
  const double x = x_star_ - gap;
  if (x < 0.0) return log_density(x);
  // Segment [x_i, x_{i+1}] holding x; distances to x_{i+1} taken from the gap.
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.end() ? xs.size() - 2 : static_cast<std::size_t>(it - xs.begin()) - 1;
  if (i + 1 >= xs.size()) i = xs.size() - 2;
  const double w = xs[i + 1] - xs[i];
  const double to_right = gap - (x_star_ - xs[i + 1]);
  const double f = fs[i + 1] + to_right / w * (fs[i] - fs[i + 1]);
  return f > 0.0 ? std::log(f) : -INFINITY;
}

std::vector<double> MeasureSpec::density_breakpoints() const {
  switch (kind_) {
    case MeasureKind::Rademacher:
      return {};
    case MeasureKind::Uniform:
      return {0.0, half_width_};
    case MeasureKind::SymExponential:
    case MeasureKind::PNorm:
      return {0.0};
    case MeasureKind::Tabulated:
      return table_->x;
  }
  return {};
}

double density(const MeasureSpec& spec, double x) {
  if (spec.is_atomic()) throw AtomicMeasure("density", spec.name() + " is purely atomic");
  return std::exp(spec.log_density(x));
}

double sample_gamma(double shape, RandomStream& stream) {
  if (shape < 1.0) {
    // Boost: G(a) = G(a + 1) * U^(1/a).
    const double g = sample_gamma(shape + 1.0, stream);
    return g * std::exp(std::log(stream.uniform_open()) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;  // squeeze
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample(const MeasureSpec& spec, RandomStream& stream) {
  switch (spec.kind()) {
    case MeasureKind::Rademacher:
      return stream.sign();
    case MeasureKind::Uniform:
      return spec.half_width() * (2.0 * stream.uniform() - 1.0);
    case MeasureKind::SymExponential:
      return stream.sign() * -std::log(stream.uniform_open());
    case MeasureKind::PNorm: {
      const double p = spec.p();
      const double sign = stream.sign();
      const double g = sample_gamma(1.0 / p, stream);
      return sign * std::pow(g, 1.0 / p);
    }
    case MeasureKind::Tabulated: {
      const auto& t = *spec.table();
      const double sign = stream.sign();
      // Position measured as mass from the right end of the half line.
      const double target = 0.5 * stream.uniform_open();
      // tail_mass is decreasing; find i with tail[i] >= target > tail[i+1].
      auto it = std::lower_bound(t.tail_mass.rbegin(), t.tail_mass.rend(), target);
      std::size_t i = (it == t.tail_mass.rend())
                          ? 0
                          : static_cast<std::size_t>(t.tail_mass.rend() - it) - 1;
      if (i + 1 >= t.x.size()) i = t.x.size() - 2;
      const double w = t.x[i + 1] - t.x[i];
      const double r = t.tail_mass[i] - target;  // mass to place inside the segment
      const double f0 = t.f[i];
      const double slope = (t.f[i + 1] - f0) / w;
      const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * r);
      const double denom = f0 + std::sqrt(disc);
      double d = denom > 0.0 ? 2.0 * r / denom : 0.0;
      d = std::clamp(d, 0.0, w);
      return sign * (t.x[i] + d);
    }
  }
  return 0.0;
}

double tail_log(const MeasureSpec& spec, double x) {
  if (!(x >= 0.0)) throw DomainError("tail_log", "x must be >= 0");
  if (x > spec.x_star()) throw DomainError("tail_log", "x beyond the support endpoint");
  if (x == spec.x_star()) {
    return spec.atom_at_x_star() > 0.0 ? -std::log(spec.atom_at_x_star()) : INFINITY;
  }
  switch (spec.kind()) {
    case MeasureKind::Rademacher:
      return kLn2;
    case MeasureKind::Uniform: {
      const double a = spec.half_width();
      return std::log(2.0 * a) - std::log(a - x);
    }
    case MeasureKind::SymExponential:
      return x + kLn2;
    case MeasureKind::PNorm: {
      const double p = spec.p();
      return std::pow(x, p) + kLn2 + std::lgamma(1.0 + 1.0 / p) - pnorm_log_tail_factor(p, x);
    }
    case MeasureKind::Tabulated: {
      const auto& t = *spec.table();
      auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
      const auto i = static_cast<std::size_t>(it - t.x.begin()) - 1;
      const double fx = interpolate(t.x, t.f, x);
      const double partial = 0.5 * (t.x[i + 1] - x) * (fx + t.f[i + 1]);
      const double tail = partial + t.tail_mass[i + 1];
      return tail > 0.0 ? -std::log(tail) : INFINITY;
    }
  }
  return INFINITY;
}

double cdf(const MeasureSpec& spec, double x) {
  if (spec.is_atomic()) {
    if (x < -1.0) return 0.0;
    return x < 1.0 ? 0.5 : 1.0;
  }
  const double ax = std::abs(x);
  double upper_tail = 0.0;  // mu([|x|, inf))
  if (ax >= spec.x_star())
    upper_tail = 0.0;
  else
    upper_tail = std::exp(-tail_log(spec, ax));
  return x < 0.0 ? upper_tail : 1.0 - upper_tail;
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Rademacher: return "rademacher";
    case MeasureKind::Uniform: return "uniform";
    case MeasureKind::SymExponential: return "exp";
    case MeasureKind::PNorm: return "pnorm";
    case MeasureKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

std::string to_string(Admissibility a) {
  switch (a) {
    case Admissibility::Yes: return "true";
    case Admissibility::No: return "false";
    case Admissibility::Unknown: return "unknown";
  }
  return "unknown";
}

}  // namespace polythresh
