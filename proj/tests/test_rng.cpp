#include <doctest.h>

#include <cmath>
#include <vector>

#include "fluctuon/rng.hpp"

using namespace fluctuon;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32({0u, 0u})(C{0u, 0u, 0u, 0u}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32({0xffffffffu, 0xffffffffu})(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32({0xa4093822u, 0x299f31d0u})(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("CounterRng is a pure function of its address") {
  const CounterRng a(42, 3), b(42, 3), other_path(42, 4), other_seed(43, 3);
  for (std::uint64_t step = 0; step < 20; ++step) {
    CHECK(a.normal(StreamTag::noise_increments, step, 5) == b.normal(StreamTag::noise_increments, step, 5));
  }
  CHECK(a.normal(StreamTag::noise_increments, 0, 0) != other_path.normal(StreamTag::noise_increments, 0, 0));
  CHECK(a.normal(StreamTag::noise_increments, 0, 0) != other_seed.normal(StreamTag::noise_increments, 0, 0));
  CHECK(a.normal(StreamTag::noise_increments, 0, 0) != a.normal(StreamTag::initial_data, 0, 0));
  const auto [z0, z1] = a.normal_pair(StreamTag::noise_increments, 7, 2);
  CHECK(z0 == a.normal(StreamTag::noise_increments, 7, 4));
  CHECK(z1 == a.normal(StreamTag::noise_increments, 7, 5));
}

TEST_CASE("normals have unit variance and uniforms lie in (0, 1]") {
  const CounterRng rng(1, 0);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(StreamTag::noise_increments, static_cast<std::uint64_t>(i), 0);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const double u = rng.uniform(StreamTag::initial_data, 0, i);
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}
