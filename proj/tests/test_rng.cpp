#include <doctest.h>

#include <set>

#include "polythresh/rng.hpp"

using namespace polythresh;

// Known-answer vectors for Philox4x32-10 published with Random123.
TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::apply({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::apply({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::apply({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams replay and split apart") {
  const SeedKey key{42, 7};
  RandomStream a(key), b(key);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());

  RandomStream c(key.split(0)), d(key.split(1));
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += c() == d();
  CHECK(equal == 0);
  CHECK(key.split(3) == key.split(3));

  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(RandomStream(key.split(s))());
  CHECK(firsts.size() == 1000);
}

TEST_CASE("uniform and normal moments") {
  RandomStream s(SeedKey{1, 2});
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    const double z = s.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(su2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}
