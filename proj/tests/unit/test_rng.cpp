#include <bdsurvey/rng.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

using namespace bdsurvey;

TEST_CASE("philox4x32-10 known-answer vectors", "[rng]") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("fnv1a64 reference values", "[rng]") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("streams are reproducible and distinct", "[rng]") {
  auto a = RngStream::derive(42, 3, "survey");
  auto b = RngStream::derive(42, 3, "survey");
  for (int i = 0; i < 1000; ++i) REQUIRE(a() == b());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {1ULL, 2ULL})
    for (std::uint64_t rep : {0ULL, 1ULL})
      for (const char* tag : {"survey", "bigdata"}) firsts.insert(RngStream::derive(seed, rep, tag)());
  CHECK(firsts.size() == 8);

  auto parent = RngStream::derive(9, 0, "x");
  auto c1 = parent.split("draws");
  auto c2 = parent.split("draws");
  auto c3 = parent.split("other");
  const auto v1 = c1();
  CHECK(v1 == c2());
  CHECK(v1 != c3());
}

TEST_CASE("uniform, normal and below have the right moments", "[rng]") {
  auto rng = RngStream::derive(7, 0, "moments");
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, se = 0;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    se += rng.exponential();
    ++counts[rng.below(5)];
  }
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(su2 / n - 1.0 / 3) < 0.003);
  CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 0.015);
  CHECK(std::abs(se / n - 1.0) < 4 / std::sqrt(n));
  for (int c : counts) CHECK(std::abs(c - n / 5.0) < 4 * std::sqrt(n * 0.16));
  CHECK(rng.below(1) == 0);
}
