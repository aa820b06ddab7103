#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "polythresh/errors.hpp"
#include "polythresh/measures.hpp"
#include "polythresh/quadrature.hpp"

using namespace polythresh;

namespace {

const double kLn2 = std::log(2.0);

std::vector<MeasureSpec> builtins() {
  return {MeasureSpec::rademacher(), MeasureSpec::uniform(1.0), MeasureSpec::uniform(2.5),
          MeasureSpec::sym_exponential(), MeasureSpec::pnorm(1.0), MeasureSpec::pnorm(1.5),
          MeasureSpec::pnorm(2.0), MeasureSpec::pnorm(3.0)};
}

// nu_p: |X|^p ~ Gamma(1/p, 1).
double pnorm_cdf(double p, double x) {
  const double half = 0.5 * boost::math::gamma_p(1.0 / p, std::pow(std::abs(x), p));
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

// Kolmogorov-Smirnov statistic sqrt(n) * D of `draws` against `cdf`.
double ks_statistic(const MeasureSpec& spec, const std::function<double(double)>& cdf_ref, std::uint64_t seed) {
  const std::size_t n = 100000;
  RandomStream s(SeedKey{seed, 0x4b5});
  std::vector<double> v(n);
  for (auto& x : v) x = sample(spec, s);
  std::sort(v.begin(), v.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf_ref(v[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d * std::sqrt(static_cast<double>(n));
}

// 0.1% level: the suite runs several KS checks on fixed seeds.
constexpr double kKsCritical = 1.949;

}  // namespace

TEST_CASE("density examples") {
  CHECK(density(MeasureSpec::sym_exponential(), 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(density(MeasureSpec::uniform(1.0), 2.0) == 0.0);
  CHECK(density(MeasureSpec::uniform(1.0), 0.3) == doctest::Approx(0.5));
  CHECK(density(MeasureSpec::pnorm(2.0), 0.0) == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-14));
  CHECK(density(MeasureSpec::pnorm(3.0), 0.0) == doctest::Approx(1.0 / (2.0 * std::tgamma(4.0 / 3.0))).epsilon(1e-14));
  CHECK_THROWS_AS(density(MeasureSpec::rademacher(), 0.0), AtomicMeasure);
}

TEST_CASE("densities are even and have unit mass") {
  for (const auto& m : builtins()) {
    if (m.is_atomic()) continue;
    CAPTURE(m.name());
    for (double x : {0.01, 0.3, 0.99, 1.7, 4.0})
      CHECK(std::abs(density(m, x) - density(m, -x)) <= 1e-15);
    const double hi = m.compact_support() ? m.x_star() : 60.0;
    const double bp[] = {0.0, 1.0, std::max(1.0, hi)};
    const double mass =
        2.0 * quad::integrate_scalar([&](double x) { return density(m, x); }, std::span<const double>(bp)).value[0];
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
}

TEST_CASE("flags") {
  const auto r = MeasureSpec::rademacher();
  CHECK(r.atom_at_x_star() == 0.5);
  CHECK(r.admissible() == Admissibility::No);
  for (const auto& m : builtins())
    if (!m.is_atomic()) {
      CHECK(m.admissible() == Admissibility::Yes);
      CHECK(m.lambda_star_condition());
    }
  CHECK(MeasureSpec::sym_exponential().t_star() == 1.0);
  CHECK(MeasureSpec::pnorm(1.0).t_star() == 1.0);
  CHECK(std::isinf(MeasureSpec::pnorm(1.5).t_star()));
  CHECK(std::isinf(MeasureSpec::sym_exponential().x_star()));
  CHECK(MeasureSpec::uniform(2.0).x_star() == 2.0);
  CHECK(MeasureSpec::pnorm(2.0).variance() == doctest::Approx(0.5));
  CHECK(MeasureSpec::uniform(1.0).variance() == doctest::Approx(1.0 / 3.0));
  CHECK(MeasureSpec::sym_exponential().variance() == doctest::Approx(2.0));
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(MeasureSpec::pnorm(0.5), ValidationError);
  CHECK_THROWS_AS(MeasureSpec::pnorm(INFINITY), ValidationError);
  CHECK_THROWS_AS(MeasureSpec::uniform(0.0), ValidationError);
  CHECK_THROWS_AS(MeasureSpec::uniform(-1.0), ValidationError);
  CHECK_THROWS_AS(tail_log(MeasureSpec::uniform(1.0), 1.5), DomainError);
  CHECK_THROWS_AS(tail_log(MeasureSpec::uniform(1.0), -0.1), DomainError);
}

TEST_CASE("tail_log examples") {
  for (double x : {0.0, 0.5, 3.0, 20.0})
    CHECK(tail_log(MeasureSpec::sym_exponential(), x) == doctest::Approx(x + kLn2).epsilon(1e-13));
  CHECK(tail_log(MeasureSpec::uniform(1.0), 0.0) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(tail_log(MeasureSpec::uniform(1.0), 0.5) == doctest::Approx(std::log(4.0)).epsilon(1e-13));
  CHECK(std::isinf(tail_log(MeasureSpec::uniform(1.0), 1.0)));
  // nu_2 has density e^{-x^2}/sqrt(pi), so mu[x, inf) = erfc(x)/2.
  CHECK(tail_log(MeasureSpec::pnorm(2.0), 1.5) == doctest::Approx(-std::log(0.5 * std::erfc(1.5))).epsilon(1e-12));
  CHECK(tail_log(MeasureSpec::pnorm(2.0), 5.0) == doctest::Approx(-std::log(0.5 * std::erfc(5.0))).epsilon(1e-12));
}

TEST_CASE("tail_log is non-decreasing") {
  for (const auto& m : builtins()) {
    if (m.is_atomic()) continue;
    CAPTURE(m.name());
    const double top = m.compact_support() ? m.x_star() * 0.999 : 8.0;
    double prev = -INFINITY;
    for (int k = 0; k <= 200; ++k) {
      const double v = tail_log(m, top * k / 200.0);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("pnorm(1) coincides with the two-sided exponential") {
  const auto a = MeasureSpec::pnorm(1.0), b = MeasureSpec::sym_exponential();
  for (double x : {0.0, 0.2, 1.0, 5.0, 30.0}) {
    CHECK(density(a, x) == doctest::Approx(density(b, x)).epsilon(1e-14));
    CHECK(tail_log(a, x) == doctest::Approx(tail_log(b, x)).epsilon(1e-12));
  }
  CHECK(ks_statistic(a, [](double x) { return x < 0 ? 0.5 * std::exp(x) : 1 - 0.5 * std::exp(-x); }, 11) <
        kKsCritical);
}

TEST_CASE("samplers pass Kolmogorov-Smirnov") {
  CHECK(ks_statistic(MeasureSpec::uniform(1.0), [](double x) { return std::clamp(0.5 * (x + 1), 0.0, 1.0); }, 1) <
        kKsCritical);
  CHECK(ks_statistic(MeasureSpec::sym_exponential(),
                     [](double x) { return x < 0 ? 0.5 * std::exp(x) : 1 - 0.5 * std::exp(-x); }, 2) < kKsCritical);
  for (double p : {1.5, 2.0, 3.0}) {
    CAPTURE(p);
    CHECK(ks_statistic(MeasureSpec::pnorm(p), [p](double x) { return pnorm_cdf(p, x); }, 3) < kKsCritical);
  }
  // The library CDF agrees with the independent one.
  for (double x : {-2.0, -0.3, 0.0, 0.7, 1.9})
    CHECK(cdf(MeasureSpec::pnorm(3.0), x) == doctest::Approx(pnorm_cdf(3.0, x)).epsilon(1e-11));
}

TEST_CASE("rademacher and uniform draws stay in the support") {
  RandomStream s(SeedKey{5, 5});
  int plus = 0;
  for (int i = 0; i < 10000; ++i) {
    const double r = sample(MeasureSpec::rademacher(), s);
    CHECK((r == 1.0 || r == -1.0));
    plus += r > 0;
    const double u = sample(MeasureSpec::uniform(1.0), s);
    CHECK(std::abs(u) <= 1.0);
  }
  CHECK(std::abs(plus - 5000) < 4 * 50);
}

TEST_CASE("gamma sampler moments") {
  for (double shape : {0.25, 1.0 / 3.0, 0.5, 2.0, 7.5}) {
    CAPTURE(shape);
    RandomStream s(SeedKey{9, static_cast<std::uint64_t>(shape * 1000)});
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double g = sample_gamma(shape, s);
      REQUIRE(g >= 0.0);
      sum += g;
      sum2 += g * g;
    }
    const double mean = sum / n, var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - shape) < 5 * std::sqrt(shape / n));
    CHECK(var == doctest::Approx(shape).epsilon(0.05));
  }
}

TEST_CASE("tabulated density") {
  // Triangle 1 - |x| given one-sided.
  const std::vector<double> x = {0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> f = {2.0, 1.5, 1.0, 0.5, 0.0};  // unnormalized
  const auto m = MeasureSpec::tabulated(x, f);
  CHECK(m.kind() == MeasureKind::Tabulated);
  CHECK(m.x_star() == 1.0);
  CHECK(m.admissible() == Admissibility::Unknown);
  CHECK(density(m, 0.0) == doctest::Approx(1.0));
  CHECK(density(m, -0.5) == doctest::Approx(0.5));
  CHECK(tail_log(m, 0.0) == doctest::Approx(kLn2));
  CHECK(tail_log(m, 0.5) == doctest::Approx(-std::log(0.125)));
  CHECK(m.variance() == doctest::Approx(1.0 / 6.0));

  // Two-sided asymmetric input is averaged with its mirror image.
  const std::vector<double> x2 = {-1.0, 0.0, 1.0};
  const std::vector<double> f2 = {0.0, 1.0, 1.0};
  const auto s = MeasureSpec::tabulated(x2, f2);
  CHECK(density(s, 1.0) == doctest::Approx(density(s, -1.0)));
  CHECK(density(s, 0.0) == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(MeasureSpec::tabulated(std::vector<double>{0.0}, std::vector<double>{1.0}), ValidationError);
  CHECK_THROWS_AS(MeasureSpec::tabulated(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, -1.0}),
                  ValidationError);
  CHECK_THROWS_AS(MeasureSpec::tabulated(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 0.0}),
                  ValidationError);
}

TEST_CASE("density csv") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto good = dir / "polythresh_density_ok.csv";
  const auto bad = dir / "polythresh_density_noheader.csv";
  std::ofstream(good) << "x,f\n0,1\n0.5,1\n1,1\n";
  std::ofstream(bad) << "0,1\n1,1\n";
  const auto m = MeasureSpec::from_csv(good);
  CHECK(density(m, 0.2) == doctest::Approx(0.5));
  CHECK_THROWS_AS(MeasureSpec::from_csv(bad), ValidationError);
  CHECK_THROWS_AS(MeasureSpec::from_csv(dir / "polythresh_missing.csv"), ValidationError);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}
