#pragma once

#include <cstdint>

namespace condex {

/// SplitMix64 finalizer. Bijective 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for replicate `index` of stream `stream` under `master`.
///
/// Every study derives per-task seeds with this function so replications can
/// run in any order (or concurrently) and still reproduce bit for bit.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                                  std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

/// Counter-based stream of uniforms on the open interval (0, 1).
///
/// Draw i is a pure function of (seed, i), which keeps inverse-CDF samplers
/// reproducible across platforms and standard libraries.
class UniformStream {
 public:
  explicit constexpr UniformStream(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}

  [[nodiscard]] constexpr double at(std::uint64_t i) const noexcept {
    const std::uint64_t bits = splitmix64(key_ + i * 0x9E3779B97F4A7C15ULL);
    // 53 random bits, shifted by half an ulp so neither 0 nor 1 is produced.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr double next() noexcept { return at(counter_++); }

  /// Raw 64-bit draw, advancing the same counter as next().
  constexpr std::uint64_t next_u64() noexcept {
    return splitmix64(key_ + counter_++ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform integer in [0, bound). Bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift; the bias is < bound / 2^64, irrelevant here.
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * bound) >> 64);
  }

  [[nodiscard]] constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace condex
