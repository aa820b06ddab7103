#pragma once

// Monte Carlo estimation of E mu_n(K_N) for random polytopes K_N and the
// sweep over N = ceil(exp(rho n)).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polythresh/cramer.hpp"
#include "polythresh/hull.hpp"
#include "polythresh/stats.hpp"

namespace polythresh {

struct EstimateResult {
  double mean = 0.0;
  Interval ci;  // Wilson 95%
  std::size_t hits = 0;
  std::size_t test_points = 0;
  std::size_t unverified = 0;  // certificates that failed re-verification
};

/// Fraction of M i.i.d. mu_n test points falling in conv(hull).
EstimateResult estimate_measure(const MeasureSpec& spec, const HullSample& hull, std::size_t M,
                                std::uint64_t seed, const MembershipOptions& membership = {});

/// N(rho) = ceil(exp(rho n)).
std::size_t vertex_count(double rho, int n);

struct SweepRow {
  int n = 0;
  double rho = 0.0;
  std::size_t N = 0;
  int replicates = 0;
  std::size_t test_points = 0;
  double mean = 0.0;
  double ci_half = 0.0;
};

struct SweepGrid {
  std::vector<SweepRow> rows;
  double delta = 0.25;
  std::optional<double> rho_hat_low;   // estimate crosses delta
  std::optional<double> rho_hat_high;  // estimate crosses 1 - delta
  std::size_t unverified = 0;
  /// per_replicate[r][k]: estimate of replicate r at row k.
  std::vector<std::vector<double>> per_replicate;
  /// inside[r][j * rows + k]: test point j of replicate r lies in K_{N_k}.
  /// Filled when SweepOptions::keep_trace.
  std::vector<std::vector<std::uint8_t>> inside;
};

struct SweepOptions {
  double delta = 0.25;
  double operation_cap = 5e9;  // bound on N_max * M * R
  bool keep_trace = false;
  MembershipOptions membership;
};

SweepGrid sweep(const MeasureSpec& spec, int n, std::span<const double> rho_grid, int replicates,
                std::size_t M, std::uint64_t seed, const SweepOptions& options = {});

namespace reference {

/// Serial estimator: one independent contains() per test point.
EstimateResult estimate_measure(const MeasureSpec& spec, const HullSample& hull, std::size_t M,
                                std::uint64_t seed, const MembershipOptions& membership = {});

/// Serial sweep that solves every (row, test point) pair from scratch,
/// with the same vertex and test-point streams as polythresh::sweep.
SweepGrid sweep(const MeasureSpec& spec, int n, std::span<const double> rho_grid, int replicates,
                std::size_t M, std::uint64_t seed, const SweepOptions& options = {});

}  // namespace reference

/// Fills rho_hat_low / rho_hat_high by linear interpolation between rows.
void extract_crossings(SweepGrid& grid, double delta);

struct InclusionReport {
  int n = 0;
  std::size_t N = 0;
  double r = 0.0;
  int trials = 0;
  std::size_t points_per_trial = 0;
  double failure_rate = 0.0;  // trials where some sampled point of B_r is outside K_N
  double se = 0.0;
  double acceptance_rate = 0.0;
  double epsilon = 0.1;
  double log_bound = 0.0;  // log of the inclusion bound before capping at 1
  double bound = 0.0;
  bool ok = false;         // failure_rate <= bound + 3 se
};

/// Empirical frequency of {B_r sample points all in K_N} against the
/// inclusion bound with the depth lower estimate exp(-(1+eps) r - 2 eps n).
InclusionReport inclusion_bound_check(const CramerProfile& profile, int n, std::size_t N, double r,
                                      int trials, std::uint64_t seed,
                                      std::size_t points_per_trial = 100, double epsilon = 0.1);

}  // namespace polythresh
