// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Criterion 12 reruns the whole suite and compares the two reports.
// Wall times go to stderr so the report itself stays reproducible.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "polythresh/verify.hpp"

int main(int argc, char** argv) {
  polythresh::AcceptanceOptions opt;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);
  opt.on_result = [](const polythresh::CriterionOutcome& o) {
    std::cout << polythresh::format_outcome(o) << std::endl;
    std::fprintf(stderr, "  [%d] %.1f s\n", o.id, o.seconds);
  };
  const auto first = polythresh::run_acceptance(opt);
  opt.on_result = [](const polythresh::CriterionOutcome& o) {
    std::fprintf(stderr, "  rerun [%d] %.1f s\n", o.id, o.seconds);
  };
  const auto second = polythresh::run_acceptance(opt);
  const bool same = first.text() == second.text();
  std::cout << (same ? "PASS" : "FAIL") << " [12] determinism: second run byte-identical="
            << (same ? "yes" : "no") << std::endl;
  return first.all_pass() && same ? 0 : 1;
}
