#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace polythresh {

struct Interval {
  double center = 0.0;
  double half_width = 0.0;
  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
};

/// Wilson score interval for `hits` successes out of `trials`.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

/// Sum in a fixed binary-tree order; the result does not depend on how the
/// values were produced, only on their order.
double pairwise_sum(std::span<const double> values);

/// Mean and standard error of the mean.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(std::span<const double> values);

/// Shortest round-trip decimal form is not used; every value gets 17
/// significant digits so files diff byte-for-byte. Non-finite values are
/// written as `inf`, `-inf`, `nan`.
std::string format_double(double value);

}  // namespace polythresh
