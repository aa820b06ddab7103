#include "polythresh/polytope_sim.hpp"

#include <algorithm>
#include <cmath>

#include "polythresh/errors.hpp"

namespace polythresh {

namespace {

constexpr std::uint64_t kEstimateStream = 0xe57;
constexpr std::uint64_t kSweepStream = 0x5e3;
constexpr std::uint64_t kInclusionStream = 0x1c1;

std::vector<double> draw_points(const MeasureSpec& spec, int n, std::size_t count, SeedKey key) {
  std::vector<double> pts(count * static_cast<std::size_t>(n));
  const auto total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < total; ++j) {
    RandomStream stream(key.split(static_cast<std::uint64_t>(j)));
    for (int i = 0; i < n; ++i)
      pts[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
          sample(spec, stream);
  }
  return pts;
}

EstimateResult summarize(std::size_t hits, std::size_t M, std::size_t unverified) {
  EstimateResult r;
  r.hits = hits;
  r.test_points = M;
  r.unverified = unverified;
  r.mean = static_cast<double>(hits) / static_cast<double>(M);
  r.ci = wilson_interval(hits, M);
  return r;
}

struct SweepPlan {
  std::vector<std::size_t> counts;
  std::size_t n_max = 0;
};

SweepPlan plan_sweep(int n, std::span<const double> rho_grid, int replicates, std::size_t M,
                     const SweepOptions& options) {
  if (n < 1) throw ValidationError("sweep", "n must be >= 1");
  if (rho_grid.empty()) throw ValidationError("sweep", "rho grid is empty");
  if (replicates < 1 || M < 1) throw ValidationError("sweep", "replicates and test points must be positive");
  if (!(options.delta > 0.0 && options.delta < 0.5)) throw ValidationError("sweep", "delta must lie in (0, 1/2)");
  SweepPlan plan;
  for (std::size_t k = 0; k < rho_grid.size(); ++k) {
    if (!(rho_grid[k] > 0.0) || !std::isfinite(rho_grid[k]))
      throw ValidationError("sweep", "rho values must be positive and finite");
    if (k > 0 && !(rho_grid[k] > rho_grid[k - 1])) throw ValidationError("sweep", "rho grid must be increasing");
    plan.counts.push_back(vertex_count(rho_grid[k], n));
  }
  plan.n_max = plan.counts.back();
  if (plan.n_max <= static_cast<std::size_t>(n))
    throw ValidationError("sweep", "the largest N(rho) must exceed n");
  const double ops = static_cast<double>(plan.n_max) * static_cast<double>(M) * replicates;
  if (ops > options.operation_cap)
    throw BudgetExceeded("sweep", "N_max * M * R exceeds the operation cap");
  if (static_cast<double>(plan.n_max) * n * sizeof(double) > 16e9)
    throw BudgetExceeded("sweep", "vertex matrix would not fit in memory");
  return plan;
}

SweepGrid assemble(int n, std::span<const double> rho_grid, const SweepPlan& plan, int replicates,
                   std::size_t M, const std::vector<std::vector<std::size_t>>& hits,
                   std::size_t unverified, const SweepOptions& options) {
  SweepGrid g;
  g.delta = options.delta;
  g.unverified = unverified;
  const std::size_t K = rho_grid.size();
  g.per_replicate.assign(static_cast<std::size_t>(replicates), std::vector<double>(K));
  for (int r = 0; r < replicates; ++r)
    for (std::size_t k = 0; k < K; ++k)
      g.per_replicate[static_cast<std::size_t>(r)][k] =
          static_cast<double>(hits[static_cast<std::size_t>(r)][k]) / static_cast<double>(M);
  for (std::size_t k = 0; k < K; ++k) {
    SweepRow row;
    row.n = n;
    row.rho = rho_grid[k];
    row.N = plan.counts[k];
    row.replicates = replicates;
    row.test_points = M;
    std::vector<double> col(static_cast<std::size_t>(replicates));
    std::size_t total = 0;
    for (int r = 0; r < replicates; ++r) {
      col[static_cast<std::size_t>(r)] = g.per_replicate[static_cast<std::size_t>(r)][k];
      total += hits[static_cast<std::size_t>(r)][k];
    }
    const MeanSe ms = mean_se(col);
    row.mean = ms.mean;
    row.ci_half = replicates >= 2 ? 1.959963984540054 * ms.se
                                  : wilson_interval(total, M).half_width;
    g.rows.push_back(row);
  }
  extract_crossings(g, options.delta);
  return g;
}

}  // namespace

std::size_t vertex_count(double rho, int n) {
  const double v = std::ceil(std::exp(rho * n));
  if (!(v < 9e18)) throw BudgetExceeded("sweep", "N(rho) overflows");
  return static_cast<std::size_t>(v);
}

EstimateResult estimate_measure(const MeasureSpec& spec, const HullSample& hull, std::size_t M,
                                std::uint64_t seed, const MembershipOptions& membership) {
  if (M < 1) throw ValidationError("estimate_measure", "M must be >= 1");
  const int n = hull.n;
  const std::vector<double> tests = draw_points(spec, n, M, SeedKey{seed, kEstimateStream});
  const PointView all = PointView::prefix(hull, hull.N);
  std::size_t hits = 0, unverified = 0;
  const auto count = static_cast<std::int64_t>(M);
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : hits, unverified)
  for (std::int64_t j = 0; j < count; ++j) {
    const std::span<const double> q(tests.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(n),
                                    static_cast<std::size_t>(n));
    IncrementalMembership m(q, membership);
    const MembershipResult& res = m.update(all);
    hits += res.inside ? 1 : 0;
    unverified += res.verified ? 0 : 1;
  }
  return summarize(hits, M, unverified);
}

SweepGrid sweep(const MeasureSpec& spec, int n, std::span<const double> rho_grid, int replicates,
                std::size_t M, std::uint64_t seed, const SweepOptions& options) {
  const SweepPlan plan = plan_sweep(n, rho_grid, replicates, M, options);
  const std::size_t K = rho_grid.size();
  const SeedKey base{seed, kSweepStream};
  std::vector<std::vector<std::size_t>> hits(static_cast<std::size_t>(replicates), std::vector<std::size_t>(K, 0));
  std::vector<std::vector<std::uint8_t>> trace;
  std::size_t unverified = 0;

  for (int r = 0; r < replicates; ++r) {
    const SeedKey rep = base.split(static_cast<std::uint64_t>(r));
    HullSample hull = draw_hull(spec, n, plan.n_max, rep.split(0));
    std::vector<std::size_t> cuts(plan.counts.begin(), plan.counts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const BlockIndex index = organize_blocks(hull, cuts);
    const std::vector<double> tests = draw_points(spec, n, M, rep.split(1));
    // entry[j]: first row at which test point j is inside (K if never).
    std::vector<std::uint32_t> entry(M, static_cast<std::uint32_t>(K));
    std::size_t rep_unverified = 0;
    const auto count = static_cast<std::int64_t>(M);
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : rep_unverified)
    for (std::int64_t j = 0; j < count; ++j) {
      const std::span<const double> q(
          tests.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(n), static_cast<std::size_t>(n));
      IncrementalMembership m(q, options.membership);
      for (std::size_t k = 0; k < K; ++k) {
        const MembershipResult& res = m.update(PointView::prefix(hull, plan.counts[k], &index));
        if (!res.verified) ++rep_unverified;
        if (res.inside) {
          entry[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(k);
          break;
        }
      }
    }
    unverified += rep_unverified;
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t k = entry[j]; k < K; ++k) ++hits[static_cast<std::size_t>(r)][k];
    if (options.keep_trace) {
      std::vector<std::uint8_t> t(M * K, 0);
      for (std::size_t j = 0; j < M; ++j)
        for (std::size_t k = entry[j]; k < K; ++k) t[j * K + k] = 1;
      trace.push_back(std::move(t));
    }
  }
  SweepGrid g = assemble(n, rho_grid, plan, replicates, M, hits, unverified, options);
  g.inside = std::move(trace);
  return g;
}

namespace reference {

EstimateResult estimate_measure(const MeasureSpec& spec, const HullSample& hull, std::size_t M,
                                std::uint64_t seed, const MembershipOptions& membership) {
  if (M < 1) throw ValidationError("estimate_measure", "M must be >= 1");
  const SeedKey key{seed, kEstimateStream};
  const auto n = static_cast<std::size_t>(hull.n);
  std::size_t hits = 0;
  std::vector<double> q(n);
  for (std::size_t j = 0; j < M; ++j) {
    RandomStream stream(key.split(j));
    for (double& x : q) x = sample(spec, stream);
    hits += contains(hull, q, membership).inside ? 1 : 0;
  }
  return summarize(hits, M, 0);
}

SweepGrid sweep(const MeasureSpec& spec, int n, std::span<const double> rho_grid, int replicates,
                std::size_t M, std::uint64_t seed, const SweepOptions& options) {
  const SweepPlan plan = plan_sweep(n, rho_grid, replicates, M, options);
  const std::size_t K = rho_grid.size();
  const SeedKey base{seed, kSweepStream};
  std::vector<std::vector<std::size_t>> hits(static_cast<std::size_t>(replicates), std::vector<std::size_t>(K, 0));
  std::vector<std::vector<std::uint8_t>> trace;
  const auto nn = static_cast<std::size_t>(n);
  for (int r = 0; r < replicates; ++r) {
    const SeedKey rep = base.split(static_cast<std::uint64_t>(r));
    const HullSample hull = draw_hull(spec, n, plan.n_max, rep.split(0));
    const SeedKey test_key = rep.split(1);
    std::vector<std::uint8_t> t(M * K, 0);
    std::vector<double> q(nn);
    for (std::size_t j = 0; j < M; ++j) {
      RandomStream stream(test_key.split(j));
      for (double& x : q) x = sample(spec, stream);
      for (std::size_t k = 0; k < K; ++k) {
        HullSample prefix;
        prefix.n = n;
        prefix.N = plan.counts[k];
        prefix.points.assign(hull.points.begin(),
                             hull.points.begin() + static_cast<std::ptrdiff_t>(plan.counts[k] * nn));
        const bool in = contains(prefix, q, options.membership).inside;
        t[j * K + k] = in ? 1 : 0;
        hits[static_cast<std::size_t>(r)][k] += in ? 1 : 0;
      }
    }
    if (options.keep_trace) trace.push_back(std::move(t));
  }
  SweepGrid g = assemble(n, rho_grid, plan, replicates, M, hits, 0, options);
  g.inside = std::move(trace);
  return g;
}

}  // namespace reference

void extract_crossings(SweepGrid& grid, double delta) {
  grid.rho_hat_low.reset();
  grid.rho_hat_high.reset();
  const auto& rows = grid.rows;
  if (rows.empty()) return;
  auto interp = [](const SweepRow& a, const SweepRow& b, double level) {
    if (b.mean == a.mean) return a.rho;
    return a.rho + (level - a.mean) / (b.mean - a.mean) * (b.rho - a.rho);
  };
  for (std::size_t k = rows.size(); k-- > 0;) {
    if (rows[k].mean <= delta) {
      grid.rho_hat_low = k + 1 < rows.size() ? interp(rows[k], rows[k + 1], delta) : rows[k].rho;
      break;
    }
  }
  const double top = 1.0 - delta;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].mean >= top) {
      grid.rho_hat_high = k > 0 ? interp(rows[k - 1], rows[k], top) : rows[k].rho;
      break;
    }
  }
}

InclusionReport inclusion_bound_check(const CramerProfile& profile, int n, std::size_t N, double r,
                                      int trials, std::uint64_t seed, std::size_t points_per_trial,
                                      double epsilon) {
  const auto& spec = profile.spec();
  if (spec.is_atomic()) throw AtomicMeasure("inclusion_bound_check", "measure must be atomless");
  if (n < 1 || trials < 1 || points_per_trial < 1)
    throw ValidationError("inclusion_bound_check", "n, trials and points must be positive");
  if (N <= static_cast<std::size_t>(n)) throw ValidationError("inclusion_bound_check", "N must exceed n");
  if (!(r >= 0.0)) throw ValidationError("inclusion_bound_check", "r must be >= 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("inclusion_bound_check", "epsilon must lie in (0, 1)");

  InclusionReport rep;
  rep.n = n;
  rep.N = N;
  rep.r = r;
  rep.trials = trials;
  rep.points_per_trial = points_per_trial;
  rep.epsilon = epsilon;
  profile.lambda_star_fast(0.0);

  const auto nn = static_cast<std::size_t>(n);
  const SeedKey base{seed, kInclusionStream};
  std::size_t failures = 0, attempts = 0, accepted = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const SeedKey tk = base.split(static_cast<std::uint64_t>(trial));
    const HullSample hull = draw_hull(spec, n, N, tk.split(0));
    std::vector<double> pts(points_per_trial * nn, 0.0);
    if (r > 0.0) {
      RandomStream stream(tk.split(1));
      std::vector<double> x(nn);
      for (std::size_t got = 0; got < points_per_trial;) {
        double s = 0.0;
        for (double& xi : x) {
          xi = sample(spec, stream);
          s += profile.lambda_star_fast(xi);
        }
        ++attempts;
        if (s <= r) {
          std::copy(x.begin(), x.end(), pts.begin() + static_cast<std::ptrdiff_t>(got * nn));
          ++got;
          ++accepted;
        }
        if (attempts >= 1000000 && static_cast<double>(accepted) < 1e-4 * static_cast<double>(attempts))
          throw RejectionTooSlow("inclusion_bound_check", "acceptance rate below 1e-4");
      }
    }
    bool all_inside = true;
    const auto count = static_cast<std::int64_t>(points_per_trial);
#pragma omp parallel for schedule(dynamic, 4) reduction(&& : all_inside)
    for (std::int64_t j = 0; j < count; ++j) {
      const std::span<const double> q(pts.data() + static_cast<std::size_t>(j) * nn, nn);
      IncrementalMembership m(q);
      all_inside = all_inside && m.update(PointView::prefix(hull, N)).inside;
    }
    failures += all_inside ? 0 : 1;
  }
  rep.acceptance_rate = r > 0.0 ? static_cast<double>(accepted) / static_cast<double>(attempts) : 1.0;
  if (r > 0.0 && rep.acceptance_rate < 1e-4)
    throw RejectionTooSlow("inclusion_bound_check", "acceptance rate below 1e-4");
  const double nt = static_cast<double>(trials);
  rep.failure_rate = static_cast<double>(failures) / nt;
  rep.se = std::sqrt(rep.failure_rate * (1.0 - rep.failure_rate) / nt);
  const double phi = std::exp(-(1.0 + epsilon) * r - 2.0 * epsilon * n);
  const double dN = static_cast<double>(N);
  const double log_choose = std::lgamma(dN + 1.0) - std::lgamma(n + 1.0) - std::lgamma(dN - n + 1.0);
  rep.log_bound = std::log(2.0) + log_choose + (dN - n) * std::log1p(-phi);
  rep.bound = std::min(1.0, std::exp(rep.log_bound));
  rep.ok = rep.failure_rate <= rep.bound + 3.0 * rep.se;
  return rep;
}

}  // namespace polythresh
