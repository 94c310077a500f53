#pragma once

// Counter-based randomness. Every value is a pure function of (seed, stream, counter),
// so results do not depend on call order, thread count or the standard library's
// distribution implementations.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace hdwear::rng {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) noexcept {
  return mix64(mix64(seed ^ mix64(stream ^ 0xD1B54A32D192ED03ULL)) ^ counter);
}

// Derives an independent child seed; used to fan one user seed out to codebooks,
// trials and splits.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) noexcept {
  return hash(seed, tag, 0xA0761D6478BD642FULL);
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  return static_cast<double>(hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

// Sequential view over one (seed, stream) pair.
class Stream {
 public:
  constexpr Stream(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  constexpr std::uint64_t next() noexcept { return hash(seed_, stream_, counter_++); }

  constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, bound) by rejection; bound must be > 0.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t value = next();
    while (value >= limit) value = next();
    return value % bound;
  }

  // Box-Muller; one draw per call.
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates over the whole range.
template <typename T>
void shuffle(std::span<T> items, Stream& stream) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace hdwear::rng
