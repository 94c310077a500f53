#pragma once

// Bipolar hypervectors packed one bit per component (bit 1 <=> +1, bit 0 <=> -1) and
// real-valued accumulators, together with the HDC primitives: bind (XNOR), permute
// (circular shift), bundle (weighted addition) and the dot/cosine similarity kernels.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdwear/error.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t dim) noexcept {
  return (dim + kWordBits - 1) / kWordBits;
}

class BipolarHV {
 public:
  BipolarHV() = default;

  // All components -1.
  explicit BipolarHV(std::size_t dim) : dim_(dim), words_(words_for(dim), 0) {
    if (dim == 0) throw Error(ErrorKind::kInvalidDimension, "hypervector dimension must be > 0");
  }

  static BipolarHV ones(std::size_t dim) {
    BipolarHV hv(dim);
    std::fill(hv.words_.begin(), hv.words_.end(), ~Word{0});
    hv.canonicalize();
    return hv;
  }

  // Components must be +1 or -1.
  static BipolarHV from_components(std::span<const int> components) {
    BipolarHV hv(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (components[i] != 1 && components[i] != -1) {
        throw Error(ErrorKind::kInvalidArgument, "bipolar components must be +1 or -1");
      }
      hv.set(i, components[i] > 0);
    }
    return hv;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t word_count() const noexcept { return words_.size(); }
  [[nodiscard]] std::span<const Word> words() const noexcept { return words_; }
  [[nodiscard]] std::span<Word> words() noexcept { return words_; }

  [[nodiscard]] bool bit(std::size_t i) const noexcept {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }
  [[nodiscard]] int component(std::size_t i) const noexcept { return bit(i) ? 1 : -1; }

  void set(std::size_t i, bool positive) noexcept {
    const Word mask = Word{1} << (i % kWordBits);
    if (positive) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }
  void flip(std::size_t i) noexcept { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }

  // Mask of valid bits in the last word.
  [[nodiscard]] Word tail_mask() const noexcept {
    const std::size_t used = dim_ % kWordBits;
    return used == 0 ? ~Word{0} : (Word{1} << used) - 1;
  }

  // Clears padding bits past dim-1.
  void canonicalize() noexcept {
    if (!words_.empty()) words_.back() &= tail_mask();
  }

  [[nodiscard]] BipolarHV negated() const {
    BipolarHV out = *this;
    for (auto& w : out.words_) w = ~w;
    out.canonicalize();
    return out;
  }

  [[nodiscard]] std::vector<int> components() const {
    std::vector<int> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = component(i);
    return out;
  }

  friend bool operator==(const BipolarHV&, const BipolarHV&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Word> words_;
};

// Running bundled sum. Components are single precision so the model file stores them
// without loss.
class AccumHV {
 public:
  AccumHV() = default;
  explicit AccumHV(std::size_t dim) : comps_(dim, 0.0F) {
    if (dim == 0) throw Error(ErrorKind::kInvalidDimension, "hypervector dimension must be > 0");
  }
  explicit AccumHV(std::vector<float> comps) : comps_(std::move(comps)) {
    if (comps_.empty()) throw Error(ErrorKind::kInvalidDimension, "hypervector dimension must be > 0");
  }

  static AccumHV from(const BipolarHV& hv, float weight = 1.0F) {
    AccumHV acc(hv.dim());
    for (std::size_t i = 0; i < hv.dim(); ++i) acc.comps_[i] = hv.bit(i) ? weight : -weight;
    return acc;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return comps_.size(); }
  [[nodiscard]] float operator[](std::size_t i) const noexcept { return comps_[i]; }
  float& operator[](std::size_t i) noexcept { return comps_[i]; }
  [[nodiscard]] std::span<const float> data() const noexcept { return comps_; }
  [[nodiscard]] std::span<float> data() noexcept { return comps_; }

  [[nodiscard]] bool is_zero() const noexcept {
    return std::all_of(comps_.begin(), comps_.end(), [](float c) { return c == 0.0F; });
  }

  friend bool operator==(const AccumHV&, const AccumHV&) = default;

 private:
  std::vector<float> comps_;
};

namespace detail {

inline void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::kInvalidArgument,
                "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

// 64 bits of `words` starting at bit `pos`; bits past the array read as zero.
inline Word load_bits(std::span<const Word> words, std::size_t pos) noexcept {
  const std::size_t w = pos / kWordBits;
  const std::size_t off = pos % kWordBits;
  Word lo = w < words.size() ? words[w] >> off : 0;
  if (off != 0 && w + 1 < words.size()) lo |= words[w + 1] << (kWordBits - off);
  return lo;
}

// ORs `len` (<= 64) low bits of `chunk` into `words` at bit `pos`.
inline void store_bits(std::span<Word> words, std::size_t pos, Word chunk, std::size_t len) noexcept {
  if (len < kWordBits) chunk &= (Word{1} << len) - 1;
  const std::size_t w = pos / kWordBits;
  const std::size_t off = pos % kWordBits;
  words[w] |= chunk << off;
  if (off != 0 && off + len > kWordBits) words[w + 1] |= chunk >> (kWordBits - off);
}

// Copies bits [src_pos, src_pos+len) of src to [dst_pos, ...) of a zeroed destination.
inline void copy_bits(std::span<const Word> src, std::size_t src_pos, std::span<Word> dst,
                      std::size_t dst_pos, std::size_t len) noexcept {
  while (len > 0) {
    const std::size_t n = std::min(len, kWordBits);
    store_bits(dst, dst_pos, load_bits(src, src_pos), n);
    src_pos += n;
    dst_pos += n;
    len -= n;
  }
}

}  // namespace detail

// i.i.d. uniform components; a pure function of (seed, stream_id, dim).
inline BipolarHV random_hv(std::uint64_t seed, std::uint64_t stream_id, std::size_t dim) {
  BipolarHV hv(dim);
  auto words = hv.words();
  for (std::size_t w = 0; w < words.size(); ++w) words[w] = rng::hash(seed, stream_id, w);
  hv.canonicalize();
  return hv;
}

// Component-wise product: XNOR on packed words.
inline void bind_into(BipolarHV& out, const BipolarHV& a, const BipolarHV& b) {
  detail::require_same_dim(a.dim(), b.dim());
  detail::require_same_dim(out.dim(), a.dim());
  auto o = out.words();
  auto wa = a.words();
  auto wb = b.words();
  for (std::size_t w = 0; w < o.size(); ++w) o[w] = ~(wa[w] ^ wb[w]);
  out.canonicalize();
}

inline BipolarHV bind(const BipolarHV& a, const BipolarHV& b) {
  detail::require_same_dim(a.dim(), b.dim());
  BipolarHV out(a.dim());
  bind_into(out, a, b);
  return out;
}

// rho^k: component i moves to (i + k) mod D.
inline BipolarHV permute(const BipolarHV& a, std::size_t k) {
  const std::size_t dim = a.dim();
  k %= dim;
  if (k == 0) return a;
  BipolarHV out(dim);
  detail::copy_bits(a.words(), 0, out.words(), k, dim - k);
  detail::copy_bits(a.words(), dim - k, out.words(), 0, k);
  return out;
}

// acc += weight * hv.
inline void bundle_into(AccumHV& acc, const BipolarHV& hv, float weight = 1.0F) {
  detail::require_same_dim(acc.dim(), hv.dim());
  auto comps = acc.data();
  auto words = hv.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::size_t base = w * kWordBits;
    const std::size_t n = std::min(kWordBits, comps.size() - base);
    const Word bits = words[w];
    for (std::size_t b = 0; b < n; ++b) {
      comps[base + b] += ((bits >> b) & 1U) ? weight : -weight;
    }
  }
}

// acc += weight * x.
inline void bundle_into(AccumHV& acc, const AccumHV& x, float weight = 1.0F) {
  detail::require_same_dim(acc.dim(), x.dim());
  auto comps = acc.data();
  auto xs = x.data();
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i] += weight * xs[i];
}

inline AccumHV bundle(AccumHV acc, const BipolarHV& hv, float weight = 1.0F) {
  bundle_into(acc, hv, weight);
  return acc;
}

inline std::size_t hamming(const BipolarHV& a, const BipolarHV& b) {
  detail::require_same_dim(a.dim(), b.dim());
  auto wa = a.words();
  auto wb = b.words();
  std::size_t count = 0;
  for (std::size_t w = 0; w < wa.size(); ++w) count += std::popcount(wa[w] ^ wb[w]);
  return count;
}

// D - 2 * popcount(a XOR b); padding is canonical so it never contributes.
inline std::int64_t dot(const BipolarHV& a, const BipolarHV& b) {
  return static_cast<std::int64_t>(a.dim()) - 2 * static_cast<std::int64_t>(hamming(a, b));
}

inline double dot(const AccumHV& a, const BipolarHV& b) {
  detail::require_same_dim(a.dim(), b.dim());
  auto comps = a.data();
  auto words = b.words();
  // Four fixed lanes keep the summation order deterministic while breaking the dependency chain.
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::size_t base = w * kWordBits;
    const std::size_t n = std::min(kWordBits, comps.size() - base);
    const Word bits = words[w];
    for (std::size_t i = 0; i < n; ++i) {
      // Clear bit -> flip the sign bit of the component.
      const auto sign = static_cast<std::uint32_t>(~(bits >> i) & 1U) << 31;
      const float c = std::bit_cast<float>(std::bit_cast<std::uint32_t>(comps[base + i]) ^ sign);
      lane[i & 3] += static_cast<double>(c);
    }
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

inline double dot(const BipolarHV& a, const AccumHV& b) { return dot(b, a); }

inline double dot(const AccumHV& a, const AccumHV& b) {
  detail::require_same_dim(a.dim(), b.dim());
  auto xs = a.data();
  auto ys = b.data();
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lane[i & 3] += static_cast<double>(xs[i]) * static_cast<double>(ys[i]);
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

inline double squared_norm(const BipolarHV& a) noexcept { return static_cast<double>(a.dim()); }
inline double squared_norm(const AccumHV& a) { return dot(a, a); }

// dot / (|a| |b|), computed as dot / sqrt(|a|^2 |b|^2) so parallel operands give exactly 1
// whenever the squared norms are exact. Zero-norm operands have no defined similarity.
template <typename A, typename B>
double cosine(const A& a, const B& b) {
  const double d = dot(a, b);
  const double denom = squared_norm(a) * squared_norm(b);
  if (denom == 0.0) {
    throw Error(ErrorKind::kUndefinedSimilarity, "cosine of a zero-norm hypervector");
  }
  return std::clamp(d / std::sqrt(denom), -1.0, 1.0);
}

// Sign threshold; exact zeros take a coin drawn from (tie_seed, index).
inline BipolarHV sign_quantize(const AccumHV& acc, std::uint64_t tie_seed) {
  BipolarHV out(acc.dim());
  auto comps = acc.data();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i] > 0.0F) {
      out.set(i, true);
    } else if (comps[i] == 0.0F) {
      out.set(i, (rng::hash(tie_seed, 0x7E, i) >> 63) != 0);
    }
  }
  return out;
}

}  // namespace hdwear
