#pragma once

// Encoders from raw inputs into hyperspace: scalar quantization onto level hypervectors,
// n-gram windows over time series, positional multi-sensor fusion, feature records and
// text n-grams.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hdwear/codebook.hpp"
#include "hdwear/error.hpp"
#include "hdwear/hypervector.hpp"

namespace hdwear {

struct NGramConfig {
  std::size_t n = 3;
  std::size_t dim = 4096;
  std::size_t q_levels = 16;
  double v_min = 0.0;
  double v_max = 1.0;
  std::size_t stride = 1;

  void validate() const {
    detail::require(n >= 1, ErrorKind::kInvalidArgument, "n-gram length must be >= 1");
    detail::require(dim >= 2, ErrorKind::kInvalidDimension, "dimension must be >= 2");
    detail::require(q_levels >= 2, ErrorKind::kInvalidArgument, "need at least 2 levels");
    detail::require(v_min < v_max, ErrorKind::kInvalidArgument, "v_min must be < v_max");
    detail::require(stride >= 1, ErrorKind::kInvalidArgument, "stride must be >= 1");
  }
};

struct FeatureBounds {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const FeatureBounds&, const FeatureBounds&) = default;
};

// Clamps to [lo, hi] and maps onto Q equal-width bins; hi lands in the top bin. A degenerate
// range (lo >= hi) maps everything to level 0.
inline std::size_t quantize_level(double x, double lo, double hi, std::size_t levels) {
  if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidSample, "non-finite sample value");
  if (!(lo < hi)) return 0;
  const double clamped = std::clamp(x, lo, hi);
  const double scaled = std::floor((clamped - lo) / (hi - lo) * static_cast<double>(levels));
  const auto level = static_cast<std::size_t>(scaled);
  return std::min(level, levels - 1);
}

inline std::size_t quantize_value(double x, const NGramConfig& cfg) {
  return quantize_level(x, cfg.v_min, cfg.v_max, cfg.q_levels);
}

// H = L_{t1} * rho L_{t2} * ... * rho^(n-1) L_{tn}; t1 is the oldest sample.
inline BipolarHV encode_window(std::span<const std::size_t> levels, const LevelMemory& lm) {
  if (levels.empty()) throw Error(ErrorKind::kInvalidArgument, "empty window");
  BipolarHV out = lm.at(levels[0]);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    bind_into(out, out, permute(lm.at(levels[i]), i));
  }
  return out;
}

inline BipolarHV encode_window(std::span<const std::size_t> levels, const NGramConfig& cfg,
                               const LevelMemory& lm) {
  if (levels.size() != cfg.n) {
    throw Error(ErrorKind::kInvalidArgument, "window has " + std::to_string(levels.size()) +
                                                 " samples, expected " + std::to_string(cfg.n));
  }
  return encode_window(levels, lm);
}

struct TimeseriesEncoding {
  std::vector<BipolarHV> windows;
  // Set when the signal is shorter than one window.
  bool too_short = false;
};

inline std::size_t window_count(std::size_t length, std::size_t n, std::size_t stride) noexcept {
  return length < n ? 0 : (length - n) / stride + 1;
}

inline TimeseriesEncoding encode_timeseries(std::span<const double> signal, const NGramConfig& cfg,
                                            const LevelMemory& lm) {
  cfg.validate();
  TimeseriesEncoding result;
  if (signal.size() < cfg.n) {
    result.too_short = true;
    return result;
  }
  std::vector<std::size_t> levels(signal.size());
  std::transform(signal.begin(), signal.end(), levels.begin(),
                 [&](double x) { return quantize_value(x, cfg); });
  const std::size_t count = window_count(signal.size(), cfg.n, cfg.stride);
  result.windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    result.windows.push_back(
        encode_window(std::span<const std::size_t>(levels).subspan(w * cfg.stride, cfg.n), lm));
  }
  return result;
}

// One signature hypervector P_m per sensor.
class SensorCodebook {
 public:
  SensorCodebook(std::uint64_t seed, std::size_t dim, std::vector<std::string> sensor_ids)
      : seed_(seed), ids_(std::move(sensor_ids)) {
    signatures_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second) {
        throw Error(ErrorKind::kInvalidArgument, "duplicate sensor id '" + ids_[i] + "'");
      }
      signatures_.push_back(random_hv(seed, i, dim));
    }
  }

  // Sensors named "0", "1", ..., used for feature records.
  static SensorCodebook indexed(std::uint64_t seed, std::size_t dim, std::size_t count) {
    std::vector<std::string> ids;
    ids.reserve(count);
    for (std::size_t i = 0; i < count; ++i) ids.push_back(std::to_string(i));
    return SensorCodebook(seed, dim, std::move(ids));
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] std::span<const std::string> sensor_ids() const noexcept { return ids_; }
  const BipolarHV& signature(std::size_t index) const { return signatures_.at(index); }

  [[nodiscard]] std::size_t index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) {
      throw Error(ErrorKind::kUnknownSymbol, "unknown sensor id '" + std::string(id) + "'");
    }
    return it->second;
  }

 private:
  std::uint64_t seed_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<BipolarHV> signatures_;
};

struct SensorReading {
  std::string sensor_id;
  BipolarHV hv;
};

// H = sum_m P_m * H_m.
inline AccumHV encode_multisensor(std::span<const SensorReading> readings, const SensorCodebook& cb) {
  if (readings.empty()) throw Error(ErrorKind::kInvalidArgument, "no sensor readings");
  AccumHV acc(readings.front().hv.dim());
  BipolarHV bound(readings.front().hv.dim());
  for (const auto& reading : readings) {
    bind_into(bound, cb.signature(cb.index_of(reading.sensor_id)), reading.hv);
    bundle_into(acc, bound);
  }
  return acc;
}

// Each feature acts as one sensor: H = sum_i P_i * L(quantize(f_i)).
inline AccumHV encode_feature_record(std::span<const double> features,
                                     std::span<const FeatureBounds> bounds, const LevelMemory& lm,
                                     const SensorCodebook& cb) {
  if (features.size() != cb.size() || features.size() != bounds.size() || features.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "feature record has " + std::to_string(features.size()) + " values, codebook " +
                    std::to_string(cb.size()) + ", bounds " + std::to_string(bounds.size()));
  }
  AccumHV acc(lm.dim());
  BipolarHV bound(lm.dim());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::size_t level = quantize_level(features[i], bounds[i].min, bounds[i].max, lm.size());
    bind_into(bound, cb.signature(i), lm[level]);
    bundle_into(acc, bound);
  }
  return acc;
}

// Bundle over all n-grams of rho^(n-1) L_{c0} * rho^(n-2) L_{c1} * ... * L_{c(n-1)}; the first
// symbol of each n-gram is rotated most.
inline AccumHV encode_text(std::span<const std::uint64_t> symbols, std::size_t n,
                           const ItemMemory& im) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "n-gram length must be >= 1");
  if (symbols.size() < n) throw Error(ErrorKind::kInvalidArgument, "text shorter than n");
  AccumHV acc(im.dim());
  for (std::size_t start = 0; start + n <= symbols.size(); ++start) {
    BipolarHV gram = permute(im.get(symbols[start]), n - 1);
    for (std::size_t j = 1; j < n; ++j) {
      bind_into(gram, gram, permute(im.get(symbols[start + j]), n - 1 - j));
    }
    bundle_into(acc, gram);
  }
  return acc;
}

// Bytes are the symbols.
inline AccumHV encode_text(std::string_view text, std::size_t n, const ItemMemory& im) {
  std::vector<std::uint64_t> symbols(text.size());
  std::transform(text.begin(), text.end(), symbols.begin(),
                 [](char c) { return static_cast<std::uint64_t>(static_cast<unsigned char>(c)); });
  return encode_text(symbols, n, im);
}

// Feature-record encoder with every P_i * L_q product precomputed.
class FeatureEncoder {
 public:
  FeatureEncoder(std::size_t dim, std::size_t levels, std::uint64_t level_seed,
                 std::uint64_t sensor_seed, std::vector<FeatureBounds> bounds)
      : levels_(level_seed, dim, levels),
        sensors_(SensorCodebook::indexed(sensor_seed, dim, bounds.size())),
        bounds_(std::move(bounds)) {
    if (bounds_.empty()) throw Error(ErrorKind::kInvalidArgument, "feature encoder needs features");
    table_.reserve(bounds_.size() * levels);
    for (std::size_t f = 0; f < bounds_.size(); ++f) {
      for (std::size_t q = 0; q < levels; ++q) table_.push_back(bind(sensors_.signature(f), levels_[q]));
    }
  }

  [[nodiscard]] std::size_t dim() const noexcept { return levels_.dim(); }
  [[nodiscard]] std::size_t arity() const noexcept { return bounds_.size(); }
  [[nodiscard]] const LevelMemory& levels() const noexcept { return levels_; }
  [[nodiscard]] const SensorCodebook& sensors() const noexcept { return sensors_; }
  [[nodiscard]] std::span<const FeatureBounds> bounds() const noexcept { return bounds_; }

  [[nodiscard]] AccumHV encode(std::span<const double> features) const {
    if (features.size() != bounds_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "feature record has " +
                                                   std::to_string(features.size()) +
                                                   " values, expected " +
                                                   std::to_string(bounds_.size()));
    }
    AccumHV acc(dim());
    const std::size_t q_levels = levels_.size();
    for (std::size_t f = 0; f < features.size(); ++f) {
      const std::size_t q = quantize_level(features[f], bounds_[f].min, bounds_[f].max, q_levels);
      bundle_into(acc, table_[f * q_levels + q]);
    }
    return acc;
  }

 private:
  LevelMemory levels_;
  SensorCodebook sensors_;
  std::vector<FeatureBounds> bounds_;
  std::vector<BipolarHV> table_;
};

}  // namespace hdwear
