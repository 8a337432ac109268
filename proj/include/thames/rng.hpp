#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace thames {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Seed of stream `index` under `master`. Distinct indices give statistically
/// independent keys; this is how replications and worker threads are seeded.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index * kGoldenGamma + 0x632BE59BD9B4E019ULL));
}

/// Counter-based 64-bit generator: the n-th output is mix64(key + n * gamma),
/// i.e. SplitMix64 written as a pure function of (key, counter). Jumping to any
/// position is O(1) via discard(), and two generators with different keys never
/// share a sequence in practice.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
      : key_(stream_seed(seed, stream)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix64(key_ + (counter_++) * kGoldenGamma); }

  constexpr void discard(std::uint64_t n) noexcept { counter_ += n; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform on the open interval (0, 1); never returns 0 or 1.
inline double uniform_open01(CounterRng& rng) noexcept {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace thames
