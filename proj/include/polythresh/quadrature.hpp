#pragma once

// Globally adaptive Gauss-Kronrod (G7/K15) quadrature for smooth, possibly
// vector-valued integrands on finite intervals with optional breakpoints.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace polythresh::quad {

struct Tolerance {
  double absolute = 1e-12;
  double relative = 1e-13;
  std::size_t max_intervals = 4000;
};

template <std::size_t K>
struct Result {
  std::array<double, K> value{};
  std::array<double, K> error{};
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae on [0, 1); odd indices are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t K>
struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  std::array<double, K> value{};
  std::array<double, K> error{};
  std::array<double, K> magnitude{};  // integral of |f|
  double priority = 0.0;

  bool operator<(const Segment& other) const { return priority < other.priority; }
};

template <std::size_t K, class F>
Segment<K> apply_rule(F& f, double lo, double hi) {
  Segment<K> seg;
  seg.lo = lo;
  seg.hi = hi;
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::array<double, K> kronrod{};
  std::array<double, K> gauss{};
  std::array<double, K> magnitude{};

  const std::array<double, K> fc = f(center);
  for (std::size_t k = 0; k < K; ++k) {
    kronrod[k] = fc[k] * kKronrodWeights[7];
    gauss[k] = fc[k] * kGaussWeights[3];
    magnitude[k] = std::abs(fc[k]) * kKronrodWeights[7];
  }
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const std::array<double, K> left = f(center - dx);
    const std::array<double, K> right = f(center + dx);
    for (std::size_t k = 0; k < K; ++k) {
      kronrod[k] += kKronrodWeights[j] * (left[k] + right[k]);
      magnitude[k] += kKronrodWeights[j] * (std::abs(left[k]) + std::abs(right[k]));
      if (j % 2 == 1) gauss[k] += kGaussWeights[j / 2] * (left[k] + right[k]);
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    seg.value[k] = kronrod[k] * half;
    seg.error[k] = std::abs((kronrod[k] - gauss[k]) * half);
    seg.magnitude[k] = magnitude[k] * std::abs(half);
  }
  return seg;
}

}  // namespace detail

/// Integrates f over the consecutive pieces defined by `breakpoints`
/// (at least two increasing values). Each component k must satisfy
/// error_k <= max(absolute, relative * integral of |f_k|).
template <std::size_t K, class F>
Result<K> integrate(F&& f, std::span<const double> breakpoints, const Tolerance& tol = {}) {
  using Seg = detail::Segment<K>;
  Result<K> out;
  if (breakpoints.size() < 2) return out;

  std::vector<Seg> heap;
  heap.reserve(64);
  std::array<double, K> total_err{};
  std::array<double, K> total_val{};
  std::array<double, K> total_mag{};

  auto target = [&](std::size_t k) {
    return std::max(tol.absolute, tol.relative * total_mag[k]);
  };
  auto priority = [&](const Seg& s) {
    double p = 0.0;
    for (std::size_t k = 0; k < K; ++k) p = std::max(p, s.error[k] / target(k));
    return p;
  };

  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    Seg s = detail::apply_rule<K>(f, breakpoints[i], breakpoints[i + 1]);
    out.evaluations += 15;
    for (std::size_t k = 0; k < K; ++k) {
      total_err[k] += s.error[k];
      total_val[k] += s.value[k];
      total_mag[k] += s.magnitude[k];
    }
    heap.push_back(s);
  }

  auto converged = [&] {
    for (std::size_t k = 0; k < K; ++k)
      if (!(total_err[k] <= target(k))) return false;
    return true;
  };

  for (auto& s : heap) s.priority = priority(s);
  std::make_heap(heap.begin(), heap.end());

  while (!heap.empty() && !converged() && heap.size() < tol.max_intervals) {
    std::pop_heap(heap.begin(), heap.end());
    const Seg worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Interval cannot be split further in double precision.
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    Seg left = detail::apply_rule<K>(f, worst.lo, mid);
    Seg right = detail::apply_rule<K>(f, mid, worst.hi);
    out.evaluations += 30;
    for (std::size_t k = 0; k < K; ++k) {
      total_err[k] += left.error[k] + right.error[k] - worst.error[k];
      total_val[k] += left.value[k] + right.value[k] - worst.value[k];
      total_mag[k] += left.magnitude[k] + right.magnitude[k] - worst.magnitude[k];
    }
    left.priority = priority(left);
    right.priority = priority(right);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
  }

  // Re-sum from the final partition to shed accumulated update round-off.
  std::sort(heap.begin(), heap.end(), [](const Seg& a, const Seg& b) { return a.lo < b.lo; });
  out.value.fill(0.0);
  out.error.fill(0.0);
  for (const auto& s : heap) {
    for (std::size_t k = 0; k < K; ++k) {
      out.value[k] += s.value[k];
      out.error[k] += s.error[k];
    }
  }
  total_err = out.error;
  out.converged = converged();
  return out;
}

template <std::size_t K, class F>
Result<K> integrate(F&& f, double lo, double hi, const Tolerance& tol = {}) {
  const std::array<double, 2> bp = {lo, hi};
  return integrate<K>(std::forward<F>(f), std::span<const double>(bp), tol);
}

/// Scalar convenience wrapper.
template <class F>
Result<1> integrate_scalar(F&& f, double lo, double hi, const Tolerance& tol = {}) {
  auto wrapped = [&f](double x) { return std::array<double, 1>{f(x)}; };
  return integrate<1>(wrapped, lo, hi, tol);
}

template <class F>
Result<1> integrate_scalar(F&& f, std::span<const double> breakpoints, const Tolerance& tol = {}) {
  auto wrapped = [&f](double x) { return std::array<double, 1>{f(x)}; };
  return integrate<1>(wrapped, breakpoints, tol);
}

}  // namespace polythresh::quad
