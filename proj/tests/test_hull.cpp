#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "polythresh/errors.hpp"
#include "polythresh/hull.hpp"

using namespace polythresh;

namespace {

HullSample make_hull(int n, std::vector<double> pts) {
  HullSample h;
  h.n = n;
  h.N = pts.size() / static_cast<std::size_t>(n);
  h.points = std::move(pts);
  return h;
}

using P2 = std::pair<double, double>;

std::vector<P2> planar_hull(const HullSample& h) {
  std::vector<P2> p;
  for (std::size_t j = 0; j < h.N; ++j) p.emplace_back(h.point(j)[0], h.point(j)[1]);
  std::sort(p.begin(), p.end());
  auto cross = [](P2 o, P2 a, P2 b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<P2> out(2 * p.size());
  std::size_t k = 0;
  for (const auto& q : p) {
    while (k >= 2 && cross(out[k - 2], out[k - 1], q) <= 0) --k;
    out[k++] = q;
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(out[k - 2], out[k - 1], p[i]) <= 0) --k;
    out[k++] = p[i];
  }
  out.resize(k - 1);
  return out;
}

// Signed distance to the polygon boundary; positive inside (counter-clockwise hull).
double inside_margin(const std::vector<P2>& poly, P2 q) {
  double m = INFINITY;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2 a = poly[i], b = poly[(i + 1) % poly.size()];
    const double ex = b.first - a.first, ey = b.second - a.second;
    const double c = ex * (q.second - a.second) - ey * (q.first - a.first);
    m = std::min(m, c / std::hypot(ex, ey));
  }
  return m;
}

}  // namespace

TEST_CASE("draw_hull") {
  const auto r = draw_hull(MeasureSpec::rademacher(), 2, 4, SeedKey{1, 2});
  CHECK(r.points.size() == 8);
  for (double v : r.points) CHECK((v == 1.0 || v == -1.0));
  const auto u = draw_hull(MeasureSpec::uniform(1.0), 6, 500, SeedKey{1, 2});
  for (double v : u.points) CHECK(std::abs(v) <= 1.0);
  CHECK(draw_hull(MeasureSpec::uniform(1.0), 6, 500, SeedKey{1, 2}).points == u.points);
  // Any prefix can be regenerated on its own.
  const auto prefix = draw_hull(MeasureSpec::uniform(1.0), 6, 100, SeedKey{1, 2});
  CHECK(std::equal(prefix.points.begin(), prefix.points.end(), u.points.begin()));
  CHECK_THROWS_AS(draw_hull(MeasureSpec::uniform(1.0), 3, 3, SeedKey{}), ValidationError);
}

TEST_CASE("membership examples") {
  const auto h = draw_hull(MeasureSpec::uniform(1.0), 4, 30, SeedKey{3, 3});
  const std::vector<double> v0(h.point(0), h.point(0) + 4);
  const auto a = contains(h, v0);
  CHECK(a.inside);
  double w0 = 0;
  for (auto [j, w] : a.weights)
    if (j == 0) w0 = w;
  CHECK(w0 == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> centroid(4, 0.0);
  for (std::size_t j = 0; j < h.N; ++j)
    for (int i = 0; i < 4; ++i) centroid[i] += h.point(j)[i] / static_cast<double>(h.N);
  CHECK(contains(h, centroid).inside);

  const auto diamond = make_hull(2, {1, 0, -1, 0, 0, 1, 0, -1});
  const std::vector<double> q = {0.9, 0.9};
  const auto o = contains(diamond, q);
  CHECK_FALSE(o.inside);
  REQUIRE(o.direction.size() == 2);
  CHECK(o.direction[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(o.direction[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(o.margin > 0.0);
  CHECK(o.verified);

  const std::vector<double> wrong_dim = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(contains(diamond, wrong_dim), ValidationError);
}

TEST_CASE("agreement with planar geometry") {
  for (std::size_t N : {3, 8, 40, 400}) {
    const auto h = draw_hull(MeasureSpec::uniform(1.0), 2, N, SeedKey{7, N});
    const auto poly = planar_hull(h);
    RandomStream s(SeedKey{8, N});
    int disagreements = 0;
    for (int i = 0; i < 2500; ++i) {
      const std::vector<double> q = {2.2 * s.uniform() - 1.1, 2.2 * s.uniform() - 1.1};
      const double m = inside_margin(poly, {q[0], q[1]});
      if (std::abs(m) < 1e-7) continue;
      disagreements += contains(h, q).inside != (m > 0);
    }
    CAPTURE(N);
    CHECK(disagreements == 0);
  }
}

TEST_CASE("certificates are sound and symmetric") {
  for (int n : {3, 6, 9}) {
    const auto h = draw_hull(MeasureSpec::sym_exponential(), n, 300, SeedKey{11, static_cast<std::uint64_t>(n)});
    auto neg = h;
    for (double& v : neg.points) v = -v;
    RandomStream s(SeedKey{12, static_cast<std::uint64_t>(n)});
    int inside = 0;
    for (int i = 0; i < 300; ++i) {
      std::vector<double> q(static_cast<std::size_t>(n));
      for (double& v : q) v = 2.0 * s.normal();
      const auto r = contains(h, q);
      CHECK(verify_certificate(PointView::prefix(h, h.N), q, r));
      if (r.inside) {
        ++inside;
        std::vector<double> rec(q.size(), 0.0);
        double total = 0;
        for (auto [j, w] : r.weights) {
          CHECK(w >= -1e-12);
          total += w;
          for (int k = 0; k < n; ++k) rec[k] += w * h.point(j)[k];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        double err = 0, qn = 0;
        for (int k = 0; k < n; ++k) {
          err = std::max(err, std::abs(rec[k] - q[k]));
          qn = std::max(qn, std::abs(q[k]));
        }
        CHECK(err <= 1e-7 * (1 + qn));
      } else {
        double top = -INFINITY, dq = 0;
        for (std::size_t j = 0; j < h.N; ++j) {
          double d = 0;
          for (int k = 0; k < n; ++k) d += r.direction[k] * h.point(j)[k];
          top = std::max(top, d);
        }
        for (int k = 0; k < n; ++k) dq += r.direction[k] * q[k];
        CHECK(dq - top > 0.0);
      }
      std::vector<double> mq(q);
      for (double& v : mq) v = -v;
      CHECK(contains(neg, mq).inside == r.inside);
    }
    CAPTURE(n);
    CHECK(inside > 0);
    CHECK(inside < 300);
  }
}

TEST_CASE("incremental membership over nested prefixes") {
  const int n = 5;
  const std::size_t N = 3000;
  auto h = draw_hull(MeasureSpec::uniform(1.0), n, N, SeedKey{21, 1});
  const std::vector<std::size_t> cuts = {10, 60, 400, 1200, N};
  auto organized = h;
  const BlockIndex index = organize_blocks(organized, cuts, 32);

  // Prefix sets are unchanged by the reordering.
  std::size_t start = 0;
  for (std::size_t cut : cuts) {
    std::vector<std::vector<double>> a, b;
    for (std::size_t j = start; j < cut; ++j) {
      a.emplace_back(h.point(j), h.point(j) + n);
      b.emplace_back(organized.point(j), organized.point(j) + n);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    start = cut;
  }
  for (std::size_t b = 0; b < index.blocks(); ++b)
    for (std::size_t j = index.begin[b]; j < index.begin[b + 1]; ++j)
      for (int k = 0; k < n; ++k) {
        CHECK(organized.point(j)[k] >= index.lo[b * n + k]);
        CHECK(organized.point(j)[k] <= index.hi[b * n + k]);
      }

  RandomStream s(SeedKey{22, 1});
  for (int i = 0; i < 60; ++i) {
    std::vector<double> q(n);
    for (double& v : q) v = 1.6 * s.uniform() - 0.8;
    IncrementalMembership inc(q);
    bool was_inside = false;
    for (std::size_t cut : cuts) {
      const auto& r = inc.update(PointView::prefix(organized, cut, &index));
      const bool direct = contains(make_hull(n, std::vector<double>(h.points.begin(), h.points.begin() + cut * n)), q).inside;
      CHECK(r.inside == direct);
      if (was_inside) CHECK(r.inside);
      was_inside = r.inside;
    }
  }
}
