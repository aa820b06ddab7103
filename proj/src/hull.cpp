#include "polythresh/hull.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "polythresh/errors.hpp"

namespace polythresh {

HullSample draw_hull(const MeasureSpec& spec, int n, std::size_t N, SeedKey seed) {
  if (n < 1) throw ValidationError("draw_hull", "n must be >= 1");
  if (N <= static_cast<std::size_t>(n)) throw ValidationError("draw_hull", "N must exceed n");
  HullSample h;
  h.n = n;
  h.N = N;
  h.seed = seed;
  h.points.resize(N * static_cast<std::size_t>(n));
  const auto count = static_cast<std::int64_t>(N);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < count; ++j) {
    RandomStream stream(seed.split(static_cast<std::uint64_t>(j)));
    double* row = h.points.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i) row[i] = sample(spec, stream);
  }
  return h;
}

BlockIndex organize_blocks(HullSample& hull, std::span<const std::size_t> cuts, std::size_t leaf) {
  const auto n = static_cast<std::size_t>(hull.n);
  if (cuts.empty() || cuts.back() != hull.N)
    throw ValidationError("organize_blocks", "cuts must end at N");
  if (leaf < 1) throw ValidationError("organize_blocks", "leaf size must be positive");
  BlockIndex index;
  index.n = hull.n;
  index.begin.push_back(0);
  std::size_t start = 0;
  for (std::size_t cut : cuts) {
    if (cut < start) throw ValidationError("organize_blocks", "cuts must be increasing");
    if (cut == start) continue;
    const std::size_t size = cut - start;
    double* seg = hull.points.data() + start * n;

    // Grid key from per-coordinate sample quantiles; coordinates take
    // turns receiving one more bit until buckets hold about `leaf` points.
    std::size_t dims = 0;
    while (dims < 20 && (size >> dims) > leaf) ++dims;
    if (dims > 0) {
      std::vector<std::size_t> bits(n, 0);
      for (std::size_t k = 0; k < dims; ++k) ++bits[k % n];
      const std::size_t stride = std::max<std::size_t>(1, size / 4096);
      std::vector<std::vector<double>> edges(n);
      std::vector<double> sample;
      for (std::size_t d = 0; d < n; ++d) {
        const std::size_t bins = std::size_t{1} << bits[d];
        if (bins == 1) continue;
        sample.clear();
        for (std::size_t j = 0; j < size; j += stride) sample.push_back(seg[j * n + d]);
        std::sort(sample.begin(), sample.end());
        for (std::size_t q = 1; q < bins; ++q) edges[d].push_back(sample[q * sample.size() / bins]);
      }
      const std::size_t buckets = std::size_t{1} << dims;
      std::vector<std::uint32_t> key(size);
      std::vector<std::size_t> offset(buckets + 1, 0);
      for (std::size_t j = 0; j < size; ++j) {
        std::uint32_t k = 0;
        for (std::size_t d = 0; d < n; ++d) {
          if (edges[d].empty()) continue;
          const auto bin = std::upper_bound(edges[d].begin(), edges[d].end(), seg[j * n + d]) - edges[d].begin();
          k = (k << bits[d]) | static_cast<std::uint32_t>(bin);
        }
        key[j] = k;
        ++offset[k + 1];
      }
      for (std::size_t b = 0; b < buckets; ++b) offset[b + 1] += offset[b];
      // In-place bucket permutation (rows are swapped into their buckets).
      std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
      for (std::size_t b = 0; b < buckets; ++b) {
        while (fill[b] < offset[b + 1]) {
          const std::size_t j = fill[b];
          const std::uint32_t k = key[j];
          if (k == b) {
            ++fill[b];
            continue;
          }
          const std::size_t dst = fill[k]++;
          std::swap_ranges(seg + j * n, seg + (j + 1) * n, seg + dst * n);
          std::swap(key[j], key[dst]);
        }
      }
      for (std::size_t b = 0; b < buckets; ++b)
        for (std::size_t p = offset[b]; p < offset[b + 1]; p += leaf)
          index.begin.push_back(start + std::min(offset[b + 1], p + leaf));
    } else {
      index.begin.push_back(cut);
    }
    start = cut;
  }
  const std::size_t blocks = index.blocks();
  index.lo.assign(blocks * n, INFINITY);
  index.hi.assign(blocks * n, -INFINITY);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t j = index.begin[b]; j < index.begin[b + 1]; ++j) {
      const double* x = hull.point(j);
      for (std::size_t d = 0; d < n; ++d) {
        index.lo[b * n + d] = std::min(index.lo[b * n + d], x[d]);
        index.hi[b * n + d] = std::max(index.hi[b * n + d], x[d]);
      }
    }
  }
  return index;
}

namespace {

// Largest <v, X_j> over [from, to) (an upper bound when blocks are
// skipped by their boxes); points with <v, X_j> > threshold are appended
// to `violators`. Stops after a block once `stop_after` are collected.
double scan_range(const PointView& pv, std::size_t from, std::size_t to, const std::vector<double>& v,
                  double threshold, const std::vector<char>& exclude,
                  std::vector<std::pair<double, std::size_t>>& violators, std::size_t stop_after,
                  std::size_t block) {
  const auto n = static_cast<std::size_t>(pv.n);
  double mx = -INFINITY;
  auto scan_points = [&](std::size_t a, std::size_t b) {
    for (std::size_t j = a; j < b; ++j) {
      const double* x = pv.point(j);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += v[i] * x[i];
      mx = std::max(mx, s);
      if (s > threshold && !(j < exclude.size() && exclude[j])) violators.emplace_back(s, j);
    }
  };
  if (pv.index == nullptr) {
    for (std::size_t a = from; a < to && violators.size() < stop_after; a += block)
      scan_points(a, std::min(to, a + block));
    return mx;
  }
  const BlockIndex& idx = *pv.index;
  auto it = std::upper_bound(idx.begin.begin(), idx.begin.end(), from);
  std::size_t b = static_cast<std::size_t>(it - idx.begin.begin()) - 1;
  for (; b < idx.blocks() && idx.begin[b] < to && violators.size() < stop_after; ++b) {
    const std::size_t a = std::max(from, idx.begin[b]);
    const std::size_t e = std::min(to, idx.begin[b + 1]);
    double bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) bound += std::max(v[i] * idx.lo[b * n + i], v[i] * idx.hi[b * n + i]);
    if (bound <= threshold) {
      mx = std::max(mx, bound);
      continue;
    }
    scan_points(a, e);
  }
  return mx;
}

constexpr double kPivotTol = 1e-11;
constexpr std::size_t kMaxAdd = 64;

struct LpOutcome {
  bool inside = false;
  double objective = 0.0;
  std::vector<double> y_hat;  // duals in the original row orientation
  std::vector<std::pair<std::size_t, double>> weights;
  std::vector<std::size_t> basic_columns;
  std::size_t pivots = 0;
};

// Phase-1 simplex over the columns W of
//   sum_k lambda_k X_k = q, sum_k lambda_k = 1, lambda >= 0,
// with explicit basis inverse (m = n + 1 is small).
class RestrictedLp {
 public:
  RestrictedLp(std::span<const double> q, double feas_tol) : m_(q.size() + 1) {
    sign_.resize(m_);
    b_.resize(m_);
    for (std::size_t i = 0; i + 1 < m_; ++i) {
      sign_[i] = q[i] < 0.0 ? -1.0 : 1.0;
      b_[i] = std::abs(q[i]);
    }
    sign_[m_ - 1] = 1.0;
    b_[m_ - 1] = 1.0;
    double bsum = 0.0;
    for (double v : b_) bsum += v;
    feas_ = feas_tol * bsum;
    basic_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) basic_[i] = -1 - static_cast<long>(i);
    binv_.resize(m_ * m_);
    refactor();
  }

  /// Appends a non-basic column; the current basis stays feasible.
  void add_column(std::size_t index, const double* x) {
    cols_.push_back(index);
    is_basic_.push_back(0);
    for (std::size_t i = 0; i + 1 < m_; ++i) {
      a_.push_back(sign_[i] * x[i]);
      scale_ = std::max(scale_, std::abs(x[i]));
    }
    a_.push_back(1.0);
    ++w_;
  }

  std::size_t size() const { return w_; }

  LpOutcome solve() {
    LpOutcome out;
    const std::size_t max_pivots = 50 * (m_ + w_) + 1000;
    std::vector<double> y(m_), u(m_);
    int degenerate = 0;
    bool bland = false;
    std::size_t since_refactor = 0;
    for (;;) {
      if (objective() <= feas_) break;
      duals(y);
      double ymax = 0.0;
      for (double v : y) ymax = std::max(ymax, std::abs(v));
      const double dtol = 1e-11 * (1.0 + ymax) * (1.0 + scale_);

      std::size_t enter = w_;
      double best = -dtol;
      for (std::size_t k = 0; k < w_; ++k) {
        if (is_basic_[k]) continue;
        const double* col = &a_[k * m_];
        double d = 0.0;
        for (std::size_t i = 0; i < m_; ++i) d -= y[i] * col[i];
        if (d < best) {
          best = d;
          enter = k;
          if (bland) break;  // smallest index with negative reduced cost
        }
      }
      if (enter == w_) break;

      const double* col = &a_[enter * m_];
      double umax = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m_; ++j) s += binv_[i * m_ + j] * col[j];
        u[i] = s;
        umax = std::max(umax, std::abs(s));
      }
      std::size_t leave = m_;
      double theta = INFINITY;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!(u[i] > kPivotTol * umax)) continue;
        const double ratio = std::max(0.0, x_[i]) / u[i];
        const double slack = 1e-15 * std::max(1.0, theta);
        if (leave == m_ || ratio < theta - slack ||
            (ratio <= theta + slack && basic_[i] < basic_[leave])) {
          theta = std::min(theta, ratio);
          leave = i;
        }
      }
      if (leave == m_) throw NumericalInstability("contains", "phase-1 ratio test found no pivot row");
      pivot(leave, enter, u);
      ++out.pivots;
      if (++since_refactor >= 50) {
        refactor();
        since_refactor = 0;
      }
      if (theta <= 1e-14) {
        if (++degenerate >= 10) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
      if (out.pivots > max_pivots) throw NumericalInstability("contains", "phase-1 simplex did not terminate");
    }
    refactor();
    out.objective = objective();
    out.inside = out.objective <= feas_;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basic_[i] < 0) continue;
      const auto k = static_cast<std::size_t>(basic_[i]);
      out.basic_columns.push_back(cols_[k]);
      out.weights.emplace_back(cols_[k], x_[i]);
    }
    if (!out.inside) {
      duals(y);
      out.y_hat.resize(m_);
      for (std::size_t i = 0; i < m_; ++i) out.y_hat[i] = sign_[i] * y[i];
    }
    return out;
  }

 private:
  double objective() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basic_[i] < 0) s += x_[i];
    return s;
  }

  void duals(std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basic_[i] >= 0) continue;
      for (std::size_t j = 0; j < m_; ++j) y[j] += binv_[i * m_ + j];
    }
  }

  void pivot(std::size_t r, std::size_t k, const std::vector<double>& u) {
    const double inv = 1.0 / u[r];
    for (std::size_t j = 0; j < m_; ++j) binv_[r * m_ + j] *= inv;
    x_[r] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || u[i] == 0.0) continue;
      const double f = u[i];
      for (std::size_t j = 0; j < m_; ++j) binv_[i * m_ + j] -= f * binv_[r * m_ + j];
      x_[i] -= f * x_[r];
    }
    if (basic_[r] >= 0) is_basic_[static_cast<std::size_t>(basic_[r])] = 0;
    basic_[r] = static_cast<long>(k);
    is_basic_[k] = 1;
  }

  // Rebuilds the basis inverse by Gauss-Jordan with partial pivoting.
  void refactor() {
    std::vector<double> work(m_ * 2 * m_, 0.0);
    const std::size_t wid = 2 * m_;
    for (std::size_t c = 0; c < m_; ++c) {
      if (basic_[c] < 0) {
        work[static_cast<std::size_t>(-1 - basic_[c]) * wid + c] = 1.0;
      } else {
        const double* col = &a_[static_cast<std::size_t>(basic_[c]) * m_];
        for (std::size_t i = 0; i < m_; ++i) work[i * wid + c] = col[i];
      }
      work[c * wid + m_ + c] = 1.0;
    }
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t p = c;
      for (std::size_t i = c + 1; i < m_; ++i)
        if (std::abs(work[i * wid + c]) > std::abs(work[p * wid + c])) p = i;
      if (!(std::abs(work[p * wid + c]) > 1e-300))
        throw NumericalInstability("contains", "singular simplex basis");
      if (p != c)
        for (std::size_t j = 0; j < wid; ++j) std::swap(work[p * wid + j], work[c * wid + j]);
      const double inv = 1.0 / work[c * wid + c];
      for (std::size_t j = 0; j < wid; ++j) work[c * wid + j] *= inv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == c) continue;
        const double f = work[i * wid + c];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < wid; ++j) work[i * wid + j] -= f * work[c * wid + j];
      }
    }
    // work = [I | B^{-1}] up to the row permutation, which Gauss-Jordan
    // with row swaps applied to [B | I] already accounts for.
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j) binv_[i * m_ + j] = work[i * wid + m_ + j];
    x_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m_; ++j) s += binv_[i * m_ + j] * b_[j];
      x_[i] = s;
    }
  }

  std::size_t m_, w_ = 0;
  std::vector<std::size_t> cols_;
  std::vector<double> sign_, b_, a_, binv_, x_;
  std::vector<long> basic_;
  std::vector<char> is_basic_;
  double feas_ = 0.0;
  double scale_ = 0.0;
};

double norm_inf(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

struct IncrementalMembership::LpState {
  RestrictedLp lp;
};

IncrementalMembership::IncrementalMembership(std::span<const double> query, MembershipOptions options)
    : query_(query.begin(), query.end()), options_(options) {
  lp_ = std::make_shared<LpState>(LpState{RestrictedLp(query_, options_.feasibility_tol)});
}

void IncrementalMembership::add_working(const PointView& prefix, std::size_t j) {
  if (j >= in_working_.size()) in_working_.resize(std::max(j + 1, 2 * in_working_.size()), 0);
  if (in_working_[j]) return;
  in_working_[j] = 1;
  working_.push_back(j);
  lp_->lp.add_column(j, prefix.point(j));
}

void IncrementalMembership::set_outside() {
  double vnorm = 0.0, vq = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    vnorm += v_[i] * v_[i];
    vq += v_[i] * query_[i];
  }
  vnorm = std::sqrt(vnorm);
  result_.inside = false;
  result_.weights.clear();
  result_.direction.resize(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) result_.direction[i] = v_[i] / vnorm;
  result_.margin = (vq - max_seen_) / vnorm;
  result_.verified = result_.margin > 1e-12 * (1.0 + norm_inf(query_));
}

const MembershipResult& IncrementalMembership::update(const PointView& prefix) {
  if (prefix.n != static_cast<int>(query_.size()))
    throw ValidationError("contains", "query dimension does not match the hull");
  if (prefix.count == 0) throw ValidationError("contains", "empty point set");
  if (prefix.count < seen_count_) throw ValidationError("contains", "prefix must not shrink");
  seen_count_ = prefix.count;
  if (result_.inside) return result_;

  if (has_direction_) {
    std::vector<std::pair<double, std::size_t>> violators;
    const double mx = scan_range(prefix, checked_, prefix.count, v_, 2.0 * tol_ - offset_, in_working_,
                                 violators, SIZE_MAX, options_.block);
    if (violators.empty()) {
      max_seen_ = std::max(max_seen_, mx);
      checked_ = prefix.count;
      set_outside();
      return result_;
    }
    const std::size_t keep = std::min(kMaxAdd, violators.size());
    std::partial_sort(violators.begin(), violators.begin() + static_cast<std::ptrdiff_t>(keep),
                      violators.end(), std::greater<>());
    for (std::size_t k = 0; k < keep; ++k) add_working(prefix, violators[k].second);
  } else {
    const std::size_t seed_cols =
        std::min(prefix.count, std::max<std::size_t>(4 * query_.size() + 4, 32));
    for (std::size_t j = 0; j < seed_cols; ++j) add_working(prefix, j);
  }
  solve_until_certified(prefix);
  return result_;
}

void IncrementalMembership::solve_until_certified(const PointView& prefix) {
  const std::size_t n = query_.size();
  for (int round = 0; round < 100000; ++round) {
    if (prefix.count <= options_.direct_limit)
      for (std::size_t j = 0; j < prefix.count; ++j) add_working(prefix, j);

    LpOutcome out = lp_->lp.solve();
    result_.pivots += out.pivots;
    if (out.inside) {
      result_.inside = true;
      result_.weights = std::move(out.weights);
      result_.direction.clear();
      result_.margin = 0.0;
      result_.verified = verify_certificate(prefix, query_, result_, options_.verify_tol);
      return;
    }

    v_.assign(out.y_hat.begin(), out.y_hat.begin() + static_cast<std::ptrdiff_t>(n));
    offset_ = out.y_hat[n];
    double ymax = 0.0;
    for (double v : out.y_hat) ymax = std::max(ymax, std::abs(v));
    double xscale = 0.0;
    for (std::size_t k : working_) xscale = std::max(xscale, norm_inf({prefix.point(k), n}));
    tol_ = 1e-11 * (1.0 + ymax) * (1.0 + xscale);
    has_direction_ = true;

    // Price the whole prefix block by block; stop at the first block with
    // violators and hand the worst ones to the restricted problem.
    std::vector<std::pair<double, std::size_t>> violators;
    const double mx = scan_range(prefix, 0, prefix.count, v_, 2.0 * tol_ - offset_, in_working_, violators,
                                 kMaxAdd, options_.block);
    if (violators.empty()) {
      max_seen_ = mx;
      checked_ = prefix.count;
      set_outside();
      return;
    }
    const std::size_t keep = std::min(kMaxAdd, violators.size());
    std::partial_sort(violators.begin(), violators.begin() + static_cast<std::ptrdiff_t>(keep),
                      violators.end(), std::greater<>());
    if (working_.size() > 8192) {
      // Drop everything but the current basis before growing further.
      for (std::size_t j : working_) in_working_[j] = 0;
      working_.clear();
      lp_ = std::make_shared<LpState>(LpState{RestrictedLp(query_, options_.feasibility_tol)});
      for (std::size_t j : out.basic_columns) add_working(prefix, j);
    }
    for (std::size_t k = 0; k < keep; ++k) add_working(prefix, violators[k].second);
  }
  throw ConvergenceFailure("contains", "column generation did not terminate");
}

bool verify_certificate(const PointView& points, std::span<const double> query,
                        const MembershipResult& result, double verify_tol) {
  const std::size_t n = query.size();
  const double qscale = 1.0 + norm_inf(query);
  if (result.inside) {
    if (result.weights.empty()) return false;
    double total = 0.0;
    std::vector<double> recon(n, 0.0);
    for (const auto& [j, w] : result.weights) {
      if (j >= points.count || w < -verify_tol) return false;
      total += w;
      const double* x = points.point(j);
      for (std::size_t i = 0; i < n; ++i) recon[i] += w * x[i];
    }
    if (std::abs(total - 1.0) > verify_tol) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(recon[i] - query[i]) > verify_tol * qscale) return false;
    return true;
  }
  if (result.direction.size() != n) return false;
  double vq = 0.0, mx = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) vq += result.direction[i] * query[i];
  for (std::size_t j = 0; j < points.count; ++j) {
    const double* x = points.point(j);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += result.direction[i] * x[i];
    mx = std::max(mx, s);
  }
  return vq - mx > 1e-12 * qscale;
}

MembershipResult contains(const HullSample& hull, std::span<const double> query,
                          const MembershipOptions& options) {
  IncrementalMembership m(query, options);
  MembershipResult r = m.update(PointView::prefix(hull, hull.N));
  if (!r.verified || !verify_certificate(PointView::prefix(hull, hull.N), query, r, options.verify_tol))
    throw NumericalInstability("contains", "membership certificate failed re-verification");
  return r;
}

}  // namespace polythresh
