#pragma once

// Random vertex sets and convex-hull membership by phase-1 simplex.

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "polythresh/measures.hpp"
#include "polythresh/rng.hpp"

namespace polythresh {

/// N x n matrix of i.i.d. coordinates, row-major. Point j depends only on
/// (seed, stream, j), so any prefix can be regenerated on its own.
struct HullSample {
  int n = 0;
  std::size_t N = 0;
  std::vector<double> points;
  SeedKey seed;

  const double* point(std::size_t j) const { return points.data() + j * static_cast<std::size_t>(n); }
};

HullSample draw_hull(const MeasureSpec& spec, int n, std::size_t N, SeedKey seed);

/// Contiguous blocks of points with their bounding boxes, used to skip
/// whole blocks when pricing a direction.
struct BlockIndex {
  int n = 0;
  std::vector<std::size_t> begin;  // block b covers [begin[b], begin[b + 1])
  std::vector<double> lo, hi;      // n values per block

  std::size_t blocks() const { return begin.empty() ? 0 : begin.size() - 1; }
};

/// Regroups the points inside each segment [cuts[k-1], cuts[k]) so that
/// nearby points share a block, then records block boxes. Every prefix
/// ending at a cut keeps exactly the same point set. `cuts` must be
/// increasing and end at hull.N.
BlockIndex organize_blocks(HullSample& hull, std::span<const std::size_t> cuts,
                           std::size_t leaf = 256);

/// Read-only view of the first `count` points of a sample.
struct PointView {
  const double* data = nullptr;
  int n = 0;
  std::size_t count = 0;
  const BlockIndex* index = nullptr;  // optional; blocks must not straddle count

  const double* point(std::size_t j) const { return data + j * static_cast<std::size_t>(n); }
  static PointView prefix(const HullSample& h, std::size_t count, const BlockIndex* index = nullptr) {
    return {h.points.data(), h.n, count, index};
  }
};

struct MembershipOptions {
  double feasibility_tol = 1e-9;  // phase-1 objective, relative to 1 + |query|_1
  double verify_tol = 1e-7;       // certificate re-evaluation
  std::size_t block = 4096;       // pricing scan block
  std::size_t direct_limit = 512; // prefixes up to this size go into the LP whole
};

struct MembershipResult {
  bool inside = false;
  /// Inside: barycentric weights on vertex indices (sum 1, non-negative).
  std::vector<std::pair<std::size_t, double>> weights;
  /// Outside: unit direction v with max_j <v, X_j> < <v, query> - margin.
  std::vector<double> direction;
  double margin = 0.0;
  std::size_t pivots = 0;
  bool verified = false;
};

/// Membership of one query in conv of growing prefixes of the same point
/// array. Work (working column set, last separating direction) carries
/// over between calls; once inside, the query stays inside.
class IncrementalMembership {
 public:
  IncrementalMembership(std::span<const double> query, MembershipOptions options = {});

  /// Decides membership in conv(prefix); prefix.count must not decrease.
  const MembershipResult& update(const PointView& prefix);
  const MembershipResult& result() const { return result_; }

 private:
  struct LpState;
  void solve_until_certified(const PointView& prefix);
  void add_working(const PointView& prefix, std::size_t j);
  void set_outside();

  std::vector<double> query_;
  MembershipOptions options_;
  MembershipResult result_;
  std::shared_ptr<LpState> lp_;
  std::vector<std::size_t> working_;
  std::vector<char> in_working_;
  std::vector<double> v_;  // unnormalized separating normal
  double offset_ = 0.0;    // <v, X_j> + offset_ <= tol for scanned j
  double tol_ = 0.0;
  bool has_direction_ = false;
  double max_seen_ = -INFINITY;
  std::size_t checked_ = 0;
  std::size_t seen_count_ = 0;
};

/// Decides query in conv(hull) with a verified certificate. Throws
/// NumericalInstability when the certificate does not re-verify.
MembershipResult contains(const HullSample& hull, std::span<const double> query,
                          const MembershipOptions& options = {});

/// Re-checks a certificate against the points; returns false on failure.
bool verify_certificate(const PointView& points, std::span<const double> query,
                        const MembershipResult& result, double verify_tol = 1e-7);

}  // namespace polythresh
