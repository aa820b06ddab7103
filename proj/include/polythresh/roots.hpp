#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace polythresh::roots {

struct NewtonResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Safeguarded Newton for an increasing function on a bracket [lo, hi] with
/// f(lo) <= 0 <= f(hi). `eval(t)` returns {f(t), f'(t)}. Steps that leave
/// the bracket or fail to shrink the residual fall back to bisection.
/// Stops when |f| <= tol or the bracket collapses.
template <class Eval>
NewtonResult newton_bisect(Eval&& eval, double lo, double hi, double guess, double tol,
                           int max_iter = 200) {
  NewtonResult out;
  double t = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  double prev_abs = INFINITY;
  for (int it = 0; it < max_iter; ++it) {
    auto [f, df] = eval(t);
    out.iterations = it + 1;
    out.root = t;
    out.residual = f;
    if (!std::isfinite(f)) {
      // Treat as overshoot towards the side indicated by the sign, if any.
      if (f > 0) hi = t; else lo = t;
      t = 0.5 * (lo + hi);
      continue;
    }
    if (std::abs(f) <= tol) {
      out.converged = true;
      return out;
    }
    if (f > 0) hi = t; else lo = t;
    if (!(hi > lo) || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t)) {
      out.converged = std::abs(f) <= 64.0 * tol;
      return out;
    }
    double next = (df > 0 && std::isfinite(df)) ? t - f / df : NAN;
    const bool stalled = std::abs(f) > 0.5 * prev_abs;
    if (!(next > lo && next < hi) || stalled) {
      // Bisect in log space when the bracket spans orders of magnitude.
      if (lo > 0 && hi > 64.0 * lo && std::isfinite(hi))
        next = std::sqrt(lo * hi);
      else
        next = 0.5 * (lo + hi);
    }
    prev_abs = std::abs(f);
    t = next;
  }
  return out;
}

}  // namespace polythresh::roots
