#pragma once

// The acceptance suite behind `verify all`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace polythresh {

struct CriterionOutcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;    // deterministic numbers only
  double seconds = 0.0;  // wall time; kept out of the report text
};

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  /// Criteria to run (1..11); empty runs all.
  std::vector<int> only;
  /// Called after each criterion, e.g. for progress output.
  std::function<void(const CriterionOutcome&)> on_result;
};

struct AcceptanceReport {
  std::vector<CriterionOutcome> outcomes;
  bool all_pass() const;
  /// One line per criterion; byte-identical for identical seeds.
  std::string text() const;
};

/// Runs criteria 1..11. Determinism (12) is judged by the caller, which
/// compares the text of two runs.
AcceptanceReport run_acceptance(const AcceptanceOptions& options);

std::string format_outcome(const CriterionOutcome& outcome);

}  // namespace polythresh
