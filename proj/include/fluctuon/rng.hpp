#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace fluctuon {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) noexcept : key_(key) {}

  [[nodiscard]] Counter operator()(Counter ctr) const noexcept;

 private:
  Key key_;
};

/// Tags separate independent uses of one (seed, path) stream.
enum class StreamTag : std::uint32_t {
  noise_increments = 0,
  initial_data = 1,
};

/// Reproducible normal and uniform variates addressed by
/// (master seed, path, tag, step, slot).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t path) noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t path() const noexcept { return path_; }

  /// Two independent standard normals for block `block` of `step` (Box-Muller).
  [[nodiscard]] std::pair<double, double> normal_pair(StreamTag tag, std::uint64_t step,
                                                      std::uint32_t block) const noexcept;

  /// Standard normal number `slot` of `step`; slots 2j and 2j+1 share a block.
  [[nodiscard]] double normal(StreamTag tag, std::uint64_t step, std::uint64_t slot) const noexcept;

  /// Uniform variate in (0, 1].
  [[nodiscard]] double uniform(StreamTag tag, std::uint64_t step, std::uint32_t block) const noexcept;

 private:
  [[nodiscard]] Philox4x32::Counter raw(StreamTag tag, std::uint64_t step,
                                        std::uint32_t block) const noexcept;

  std::uint64_t seed_;
  std::uint64_t path_;
  Philox4x32 engine_;
};

}  // namespace fluctuon
