#pragma once

// Feature windows -> bounds -> encoder -> online (+ iterative) model.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdwear/datapipe.hpp"
#include "hdwear/encoding.hpp"
#include "hdwear/learning.hpp"
#include "hdwear/model.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

enum class TrainMode { kOnline, kIterative };

struct TrainSettings {
  std::size_t dim = 4096;
  std::size_t levels = 16;
  std::size_t ngram = 3;
  double eta = 0.5;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 42;
  bool shuffle = false;
  TrainMode mode = TrainMode::kIterative;
};

inline std::vector<Sample> encode_windows(const FeatureEncoder& encoder,
                                          std::span<const FeatureWindow> windows,
                                          std::span<const std::string> classes) {
  std::vector<Sample> samples;
  samples.reserve(windows.size());
  for (const auto& w : windows) {
    auto it = std::find(classes.begin(), classes.end(), w.label);
    if (it == classes.end()) throw Error(ErrorKind::kUnknownClass, "unknown class label '" + w.label + "'");
    samples.push_back({encoder.encode(w.features), static_cast<std::size_t>(it - classes.begin())});
  }
  return samples;
}

inline std::vector<Sample> encode_windows(const Model& model, std::span<const FeatureWindow> windows) {
  return encode_windows(model.encoder.make_encoder(), windows, model.classes);
}

struct TrainOutcome {
  Model model;
  // Model after the single adaptive pass, before any retraining.
  Model online_model;
  std::size_t online_train_mispredictions = 0;
  IterativeResult iterative;
};

// Bounds are fitted on `train` only.
inline TrainOutcome train_pipeline(std::span<const FeatureWindow> train, std::vector<std::string> classes,
                                   const TrainSettings& settings) {
  if (train.empty()) throw Error(ErrorKind::kEmptyDataset, "training split is empty");
  EncoderConfig config;
  config.dim = settings.dim;
  config.q_levels = settings.levels;
  config.ngram = settings.ngram;
  config.seeds = Seeds::from(settings.seed);
  config.bounds = fit_stats(train);

  TrainOutcome out;
  out.model = Model::create(std::move(config), settings.eta, std::move(classes));
  const auto samples = encode_windows(out.model, train);
  train_online(out.model, samples);
  out.online_model = out.model;
  out.online_train_mispredictions = count_mispredictions(out.model, samples);
  if (settings.mode == TrainMode::kIterative) {
    IterativeOptions options;
    options.max_epochs = settings.max_epochs;
    options.patience = settings.patience;
    if (settings.shuffle) options.shuffle_seed = rng::derive(settings.seed, 0x5F);
    out.iterative = train_iterative(out.model, samples, options);
  }
  return out;
}

}  // namespace hdwear
