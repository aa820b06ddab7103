#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (global seed, stream id, counter), so
// Monte Carlo kernels can hand each replicate / test point its own stream
// and produce identical results regardless of thread count or scheduling.

#include <array>
#include <cmath>
#include <cstdint>

namespace polythresh {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). 128-bit counter, 64-bit key.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// SplitMix64 finalizer; used to derive child stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Identifies a stream: the global seed keys the cipher, the stream id
/// occupies the upper half of the counter.
struct SeedKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Deterministic child key; distinct `child` values give unrelated streams.
  constexpr SeedKey split(std::uint64_t child) const {
    return {seed, mix64(stream ^ mix64(child + 0x632BE59BD9B4E019ull))};
  }

  friend constexpr bool operator==(const SeedKey&, const SeedKey&) = default;
};

/// A sequential view of one counter-based stream. Cheap to copy; copies
/// replay the same values. Not meant to be shared between threads.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(SeedKey key, std::uint64_t position = 0)
      : key_(key), counter_(position) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (buffered_ == 0) refill();
    --buffered_;
    return buffer_[buffered_];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); safe to take logarithms of.
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Fair random sign.
  double sign() { return ((*this)() >> 63) ? 1.0 : -1.0; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_normal_) {
      has_spare_normal_ = false;
      return spare_normal_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_normal_ = true;
    return radius * std::cos(angle);
  }

  const SeedKey& key() const { return key_; }
  std::uint64_t blocks_consumed() const { return counter_; }

 private:
  void refill() {
    const Philox4x32::Counter ctr = {
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(key_.stream), static_cast<std::uint32_t>(key_.stream >> 32)};
    const Philox4x32::Key k = {static_cast<std::uint32_t>(key_.seed),
                               static_cast<std::uint32_t>(key_.seed >> 32)};
    const auto out = Philox4x32::apply(ctr, k);
    buffer_[1] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[0] = (std::uint64_t{out[3]} << 32) | out[2];
    buffered_ = 2;
    ++counter_;
  }

  SeedKey key_;
  std::uint64_t counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

}  // namespace polythresh
