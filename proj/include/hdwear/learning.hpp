#pragma once

// Adaptive single-pass training, iterative retraining on mispredictions, prediction and
// evaluation over encoded samples.
//
// Online update for a sample H with label l:
//   C_l += eta * (1 - delta_l) * H
// Retraining update when H (label l) is predicted as l':
//   C_l  += eta * (delta_l' - delta_l) * H
//   C_l' -= eta * (delta_l' - delta_l) * H
// where delta_k = cos(H, C_k), taken as 0 for an all-zero class vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "hdwear/error.hpp"
#include "hdwear/hypervector.hpp"
#include "hdwear/model.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

struct Sample {
  AccumHV hv;
  std::size_t label = 0;
};

namespace detail {

inline void require_label(const Model& model, std::size_t label) {
  if (label >= model.class_count()) {
    throw Error(ErrorKind::kUnknownClass, "class index " + std::to_string(label) +
                                              " outside model with " +
                                              std::to_string(model.class_count()) + " classes");
  }
}

// delta with the zero-vector convention.
inline double similarity(const AccumHV& query, double query_sq_norm, const AccumHV& class_hv) {
  const double class_sq_norm = squared_norm(class_hv);
  const double denom = query_sq_norm * class_sq_norm;
  if (denom == 0.0) return 0.0;
  return std::clamp(dot(query, class_hv) / std::sqrt(denom), -1.0, 1.0);
}

inline std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace detail

inline std::vector<double> similarities(const Model& model, const AccumHV& query) {
  detail::require_same_dim(query.dim(), model.dim());
  const double query_sq_norm = squared_norm(query);
  std::vector<double> deltas(model.class_count());
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    deltas[k] = detail::similarity(query, query_sq_norm, model.class_hvs[k]);
  }
  return deltas;
}

// argmax of delta; ties go to the lowest class index.
inline std::size_t predict(const Model& model, const AccumHV& query) {
  if (!model.is_trained()) throw Error(ErrorKind::kModelNotTrained, "model has no trained classes");
  const auto deltas = similarities(model, query);
  return detail::argmax_lowest(deltas);
}

// Returns the applied weight eta * (1 - delta_l).
inline double online_update(Model& model, const AccumHV& query, std::size_t label) {
  detail::require_label(model, label);
  detail::require_same_dim(query.dim(), model.dim());
  AccumHV& class_hv = model.class_hvs[label];
  const double delta = detail::similarity(query, squared_norm(query), class_hv);
  const double weight = model.eta * (1.0 - delta);
  if (weight != 0.0) bundle_into(class_hv, query, static_cast<float>(weight));
  return weight;
}

inline void train_online(Model& model, std::span<const Sample> stream) {
  for (const auto& sample : stream) online_update(model, sample.hv, sample.label);
}

// Weight-1 accumulation of every sample; the saturating baseline the adaptive update replaces.
inline void train_naive(Model& model, std::span<const Sample> stream) {
  for (const auto& sample : stream) {
    detail::require_label(model, sample.label);
    bundle_into(model.class_hvs[sample.label], sample.hv, 1.0F);
  }
}

struct RetrainStep {
  bool mispredicted = false;
  std::size_t predicted = 0;
  // eta * (delta_l' - delta_l); added to C_l and subtracted from C_l'.
  double weight = 0.0;
};

// One retraining step for a single sample. Correct predictions leave the model untouched.
inline RetrainStep retrain_sample(Model& model, const AccumHV& query, std::size_t label) {
  detail::require_label(model, label);
  detail::require_same_dim(query.dim(), model.dim());
  const auto deltas = similarities(model, query);
  RetrainStep step;
  step.predicted = detail::argmax_lowest(deltas);
  if (step.predicted == label) return step;
  step.mispredicted = true;
  step.weight = model.eta * (deltas[step.predicted] - deltas[label]);
  if (step.weight != 0.0) {
    const float w = static_cast<float>(step.weight);
    auto correct = model.class_hvs[label].data();
    auto wrong = model.class_hvs[step.predicted].data();
    auto h = query.data();
    for (std::size_t i = 0; i < h.size(); ++i) {
      const float increment = w * h[i];
      correct[i] += increment;
      wrong[i] -= increment;
    }
  }
  return step;
}

// One sequential pass; later samples see earlier updates. Returns the misprediction count.
inline std::size_t retrain_epoch(Model& model, std::span<const Sample> dataset,
                                 std::span<const std::size_t> order = {}) {
  std::size_t misses = 0;
  const std::size_t count = order.empty() ? dataset.size() : order.size();
  for (std::size_t i = 0; i < count; ++i) {
    const Sample& sample = order.empty() ? dataset[i] : dataset[order[i]];
    if (retrain_sample(model, sample.hv, sample.label).mispredicted) ++misses;
  }
  return misses;
}

inline std::size_t count_mispredictions(const Model& model, std::span<const Sample> dataset) {
  std::size_t misses = 0;
  for (const auto& sample : dataset) {
    if (predict(model, sample.hv) != sample.label) ++misses;
  }
  return misses;
}

struct IterativeOptions {
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  // Reshuffles the visiting order every epoch when set.
  std::optional<std::uint64_t> shuffle_seed;
};

struct EpochStats {
  std::size_t in_epoch_mispredictions = 0;
  // Training mispredictions of the model as it stands at the end of the epoch.
  std::size_t end_mispredictions = 0;
};

struct IterativeResult {
  std::size_t epochs_run = 0;
  // 0 means the initial (online) model was never beaten.
  std::size_t best_epoch = 0;
  std::size_t best_mispredictions = 0;
  std::vector<EpochStats> curve;
};

// Repeats retrain_epoch until the training misprediction count has not improved for more than
// `patience` consecutive epochs, reaches zero, or max_epochs is hit; keeps the best epoch-end
// model (the starting model competes too).
inline IterativeResult train_iterative(Model& model, std::span<const Sample> dataset,
                                       const IterativeOptions& options) {
  detail::require(options.max_epochs >= 1, ErrorKind::kInvalidArgument, "max_epochs must be >= 1");
  IterativeResult result;
  if (dataset.empty()) return result;

  Model best = model;
  result.best_mispredictions = model.is_trained() ? count_mispredictions(model, dataset)
                                                  : dataset.size();
  std::vector<std::size_t> order;
  if (options.shuffle_seed) {
    order.resize(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }

  std::size_t stalled = 0;
  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    if (options.shuffle_seed) {
      rng::Stream stream(*options.shuffle_seed, epoch);
      rng::shuffle(std::span<std::size_t>(order), stream);
    }
    EpochStats stats;
    stats.in_epoch_mispredictions = retrain_epoch(model, dataset, order);
    stats.end_mispredictions = count_mispredictions(model, dataset);
    result.curve.push_back(stats);
    result.epochs_run = epoch;

    if (stats.end_mispredictions < result.best_mispredictions) {
      result.best_mispredictions = stats.end_mispredictions;
      result.best_epoch = epoch;
      best = model;
      stalled = 0;
    } else if (++stalled > options.patience) {
      break;
    }
    if (stats.end_mispredictions == 0) break;
  }
  model = std::move(best);
  return result;
}

struct EvalReport {
  double accuracy = 0.0;
  // confusion[true][predicted].
  std::vector<std::vector<std::size_t>> confusion;
  // NaN for classes without samples.
  std::vector<double> per_class_recall;
  std::size_t n_samples = 0;
};

inline EvalReport evaluate_predictions(std::size_t class_count, std::span<const std::size_t> truth,
                                       std::span<const std::size_t> predicted) {
  if (truth.empty()) throw Error(ErrorKind::kEmptyDataset, "cannot evaluate an empty dataset");
  EvalReport report;
  report.n_samples = truth.size();
  report.confusion.assign(class_count, std::vector<std::size_t>(class_count, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++report.confusion[truth[i]][predicted[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  report.per_class_recall.resize(class_count);
  for (std::size_t k = 0; k < class_count; ++k) {
    const auto& row = report.confusion[k];
    const std::size_t total = std::accumulate(row.begin(), row.end(), std::size_t{0});
    report.per_class_recall[k] = total == 0 ? std::numeric_limits<double>::quiet_NaN()
                                            : static_cast<double>(row[k]) / static_cast<double>(total);
  }
  return report;
}

inline EvalReport evaluate(const Model& model, std::span<const Sample> dataset) {
  if (dataset.empty()) throw Error(ErrorKind::kEmptyDataset, "cannot evaluate an empty dataset");
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
  truth.reserve(dataset.size());
  predicted.reserve(dataset.size());
  for (const auto& sample : dataset) {
    detail::require_label(model, sample.label);
    truth.push_back(sample.label);
    predicted.push_back(predict(model, sample.hv));
  }
  return evaluate_predictions(model.class_count(), truth, predicted);
}

}  // namespace hdwear
