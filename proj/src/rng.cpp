#include "fluctuon/rng.hpp"

#include <cmath>
#include <numbers>

namespace fluctuon {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// 53 random bits mapped to (0, 1].
inline double to_unit_interval(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

// Mixes the 64-bit path index into 32 bits of counter space.
inline std::uint32_t fold(std::uint64_t v) noexcept {
  return static_cast<std::uint32_t>(v ^ (v >> 32));
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const noexcept {
  Key key = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t path) noexcept
    : seed_(seed),
      path_(path),
      engine_(Philox4x32::Key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}) {}

Philox4x32::Counter CounterRng::raw(StreamTag tag, std::uint64_t step, std::uint32_t block) const noexcept {
  // Path and tag share the last word; paths beyond 2^30 alias, which is far
  // past any sweep this code runs.
  const std::uint32_t lane = (fold(path_) << 2) | static_cast<std::uint32_t>(tag);
  return engine_({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), block, lane});
}

std::pair<double, double> CounterRng::normal_pair(StreamTag tag, std::uint64_t step,
                                                  std::uint32_t block) const noexcept {
  const auto r = raw(tag, step, block);
  const double u1 = to_unit_interval(r[0], r[1]);
  const double u2 = to_unit_interval(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double CounterRng::normal(StreamTag tag, std::uint64_t step, std::uint64_t slot) const noexcept {
  const auto [a, b] = normal_pair(tag, step, static_cast<std::uint32_t>(slot / 2));
  return slot % 2 == 0 ? a : b;
}

double CounterRng::uniform(StreamTag tag, std::uint64_t step, std::uint32_t block) const noexcept {
  const auto r = raw(tag, step, block);
  return to_unit_interval(r[0], r[1]);
}

}  // namespace fluctuon
