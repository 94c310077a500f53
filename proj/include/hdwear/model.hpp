#pragma once

// Class-hypervector model: one accumulator per class plus everything needed to rebuild the
// feature encoder bit-for-bit.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hdwear/encoding.hpp"
#include "hdwear/error.hpp"
#include "hdwear/hypervector.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

struct Seeds {
  std::uint64_t item = 0;
  std::uint64_t level = 0;
  std::uint64_t sensor = 0;
  std::uint64_t tie = 0;

  // Fans one user seed out to the four codebook seeds.
  static Seeds from(std::uint64_t seed) noexcept {
    return {rng::derive(seed, 1), rng::derive(seed, 2), rng::derive(seed, 3), rng::derive(seed, 4)};
  }

  friend bool operator==(const Seeds&, const Seeds&) = default;
};

struct EncoderConfig {
  std::size_t dim = 4096;
  std::size_t q_levels = 16;
  std::size_t ngram = 3;
  Seeds seeds;
  std::vector<FeatureBounds> bounds;

  [[nodiscard]] FeatureEncoder make_encoder() const {
    return FeatureEncoder(dim, q_levels, seeds.level, seeds.sensor, bounds);
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct Model {
  EncoderConfig encoder;
  double eta = 0.5;
  std::vector<std::string> classes;
  std::vector<AccumHV> class_hvs;

  // All class vectors start at zero.
  static Model create(EncoderConfig encoder, double eta, std::vector<std::string> classes) {
    detail::require(encoder.dim > 0, ErrorKind::kInvalidDimension, "model dimension must be > 0");
    detail::require(eta > 0.0, ErrorKind::kInvalidArgument, "learning rate must be > 0");
    detail::require(!classes.empty(), ErrorKind::kInvalidArgument, "model needs at least one class");
    detail::require(std::set<std::string>(classes.begin(), classes.end()).size() == classes.size(),
                    ErrorKind::kInvalidArgument, "class labels must be unique");
    Model model;
    model.class_hvs.assign(classes.size(), AccumHV(encoder.dim));
    model.encoder = std::move(encoder);
    model.eta = eta;
    model.classes = std::move(classes);
    return model;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return encoder.dim; }
  [[nodiscard]] std::size_t class_count() const noexcept { return classes.size(); }

  [[nodiscard]] std::size_t class_index(std::string_view label) const {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) {
      throw Error(ErrorKind::kUnknownClass, "unknown class label '" + std::string(label) + "'");
    }
    return static_cast<std::size_t>(it - classes.begin());
  }

  // A model counts as trained once any class vector is non-zero.
  [[nodiscard]] bool is_trained() const noexcept {
    return std::any_of(class_hvs.begin(), class_hvs.end(),
                       [](const AccumHV& c) { return !c.is_zero(); });
  }

  friend bool operator==(const Model&, const Model&) = default;
};

}  // namespace hdwear
