#pragma once

// Seeded codebooks: ItemMemory maps discrete symbols to random hypervectors, LevelMemory
// holds Q quantization levels whose pairwise similarity decays linearly with level distance.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "hdwear/error.hpp"
#include "hdwear/hypervector.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

// Symbols in [0, capacity) are generated on first access and cached; lookups are safe
// from many threads.
class ItemMemory {
 public:
  ItemMemory(std::uint64_t seed, std::size_t dim, std::size_t capacity)
      : seed_(seed), dim_(dim), capacity_(capacity), cache_(std::make_unique<Cache>()) {
    if (dim == 0) throw Error(ErrorKind::kInvalidDimension, "item memory dimension must be > 0");
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }

  // The returned reference stays valid for the lifetime of the memory.
  const BipolarHV& get(std::uint64_t symbol) const {
    if (symbol >= capacity_) {
      throw Error(ErrorKind::kUnknownSymbol, "symbol " + std::to_string(symbol) +
                                                 " outside item memory of size " +
                                                 std::to_string(capacity_));
    }
    {
      std::shared_lock lock(cache_->mutex);
      if (auto it = cache_->entries.find(symbol); it != cache_->entries.end()) return it->second;
    }
    std::unique_lock lock(cache_->mutex);
    auto [it, inserted] = cache_->entries.try_emplace(symbol);
    if (inserted) it->second = random_hv(seed_, symbol, dim_);
    return it->second;
  }

 private:
  struct Cache {
    std::shared_mutex mutex;
    std::unordered_map<std::uint64_t, BipolarHV> entries;
  };

  std::uint64_t seed_;
  std::size_t dim_;
  std::size_t capacity_;
  std::unique_ptr<Cache> cache_;
};

// L_0 is random; L_i is L_0 with the first round(i * floor(D/2) / (Q-1)) entries of a fixed
// random flip order negated. Levels are nested, so Hamming distance grows with |i - j| and
// the endpoints differ in exactly floor(D/2) components.
class LevelMemory {
 public:
  static constexpr std::uint64_t kBaseStream = 0;
  static constexpr std::uint64_t kOrderStream = 1;

  LevelMemory(std::uint64_t seed, std::size_t dim, std::size_t levels) : seed_(seed) {
    if (levels < 2) throw Error(ErrorKind::kInvalidArgument, "level memory needs at least 2 levels");
    if (dim < 2) throw Error(ErrorKind::kInvalidDimension, "level memory dimension must be >= 2");

    flip_order_.resize(dim);
    std::iota(flip_order_.begin(), flip_order_.end(), std::size_t{0});
    rng::Stream order(seed, kOrderStream);
    rng::shuffle(std::span<std::size_t>(flip_order_), order);

    levels_.reserve(levels);
    levels_.push_back(random_hv(seed, kBaseStream, dim));
    BipolarHV current = levels_.front();
    std::size_t flipped = 0;
    for (std::size_t i = 1; i < levels; ++i) {
      const std::size_t target = flips_for_level(i, levels, dim);
      for (; flipped < target; ++flipped) current.flip(flip_order_[flipped]);
      levels_.push_back(current);
    }
  }

  // round(i * floor(D/2) / (Q-1)), half rounded up, in exact integer arithmetic.
  static constexpr std::size_t flips_for_level(std::size_t i, std::size_t levels, std::size_t dim) {
    const std::size_t half = dim / 2;
    const std::size_t denom = levels - 1;
    return (2 * i * half + denom) / (2 * denom);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::size_t dim() const noexcept { return flip_order_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return levels_.size(); }
  [[nodiscard]] std::span<const std::size_t> flip_order() const noexcept { return flip_order_; }

  const BipolarHV& operator[](std::size_t level) const { return levels_[level]; }

  const BipolarHV& at(std::size_t level) const {
    if (level >= levels_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "level index " + std::to_string(level) +
                                                   " out of range");
    }
    return levels_[level];
  }

 private:
  std::uint64_t seed_;
  std::vector<std::size_t> flip_order_;
  std::vector<BipolarHV> levels_;
};

inline LevelMemory make_level_memory(std::uint64_t seed, std::size_t dim, std::size_t levels) {
  return LevelMemory(seed, dim, levels);
}

}  // namespace hdwear
