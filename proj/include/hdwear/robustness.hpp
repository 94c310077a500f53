#pragma once

// 1-bit model quantization and bit-flip fault injection on the stored class bits.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hdwear/error.hpp"
#include "hdwear/hypervector.hpp"
#include "hdwear/learning.hpp"
#include "hdwear/model.hpp"
#include "hdwear/model_io.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

struct BinaryModel {
  std::size_t dim = 0;
  std::vector<std::string> classes;
  std::vector<BipolarHV> class_bits;
  // CRC32 of the serialized source model.
  std::uint32_t source_hash = 0;

  friend bool operator==(const BinaryModel&, const BinaryModel&) = default;
};

inline BinaryModel quantize_model(const Model& model, std::uint64_t tie_seed) {
  if (!model.is_trained()) throw Error(ErrorKind::kModelNotTrained, "cannot quantize an untrained model");
  BinaryModel bm;
  bm.dim = model.dim();
  bm.classes = model.classes;
  bm.class_bits.reserve(model.class_count());
  for (std::size_t k = 0; k < model.class_count(); ++k) {
    bm.class_bits.push_back(sign_quantize(model.class_hvs[k], rng::derive(tie_seed, k)));
  }
  bm.source_hash = crc32_of(serialize_model(model));
  return bm;
}

// All class vectors share the norm sqrt(D), so ranking by dot equals ranking by cosine.
inline std::size_t predict(const BinaryModel& bm, const AccumHV& query) {
  std::vector<double> scores(bm.class_bits.size());
  for (std::size_t k = 0; k < scores.size(); ++k) scores[k] = dot(query, bm.class_bits[k]);
  return detail::argmax_lowest(scores);
}

inline std::size_t predict(const BinaryModel& bm, const BipolarHV& query) {
  std::size_t best = 0;
  std::int64_t best_score = dot(query, bm.class_bits[0]);
  for (std::size_t k = 1; k < bm.class_bits.size(); ++k) {
    const std::int64_t score = dot(query, bm.class_bits[k]);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

inline std::size_t flip_count(double rate, std::size_t total_bits) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(total_bits)));
}

// Flips exactly round(rate * K * D) distinct (class, component) bits, chosen uniformly without
// replacement by a partial Fisher-Yates shuffle keyed on trial_seed.
inline BinaryModel inject_bitflips(const BinaryModel& bm, double rate, std::uint64_t trial_seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "flip rate must lie in [0, 1]");
  }
  BinaryModel out = bm;
  const std::size_t total = bm.dim * bm.class_bits.size();
  const std::size_t count = flip_count(rate, total);
  if (count == 0) return out;
  if (count == total) {
    for (auto& hv : out.class_bits) hv = hv.negated();
    return out;
  }
  std::vector<std::size_t> positions(total);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  rng::Stream stream(trial_seed, 0xF1);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(stream.below(total - i));
    std::swap(positions[i], positions[j]);
    out.class_bits[positions[i] / bm.dim].flip(positions[i] % bm.dim);
  }
  return out;
}

inline double accuracy(const BinaryModel& bm, std::span<const Sample> dataset) {
  if (dataset.empty()) throw Error(ErrorKind::kEmptyDataset, "cannot evaluate an empty dataset");
  std::size_t correct = 0;
  for (const auto& s : dataset) {
    if (predict(bm, s.hv) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

inline const std::vector<double>& default_flip_rates() {
  static const std::vector<double> rates = {0.01, 0.02, 0.04, 0.06, 0.10, 0.12};
  return rates;
}

struct RateResult {
  double rate = 0.0;
  double mean_acc = 0.0;
  // Sample standard deviation over trials (0 for a single trial).
  double sd_acc = 0.0;
  double mean_loss = 0.0;
  std::vector<double> trial_acc;
};

struct RobustnessReport {
  double acc_clean = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<RateResult> rates;

  // rate,mean_acc,sd_acc,mean_loss
  [[nodiscard]] std::string to_csv() const {
    // Shortest text that parses back to the same double.
    auto text = [](double v) {
      char buf[32];
      return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    };
    std::string out = "rate,mean_acc,sd_acc,mean_loss\n";
    for (const auto& r : rates) {
      out += text(r.rate) + ',' + text(r.mean_acc) + ',' + text(r.sd_acc) + ',' + text(r.mean_loss) + '\n';
    }
    return out;
  }
};

inline std::uint64_t trial_seed(std::uint64_t sweep_seed, std::size_t rate_index, std::size_t trial) {
  return rng::hash(sweep_seed, rate_index, trial);
}

// Quantizes once, then evaluates `trials` independent corruptions per rate. Loss is measured
// against the clean 1-bit model.
inline RobustnessReport robustness_sweep(const Model& model, std::span<const Sample> test_set,
                                         std::span<const double> rates, std::size_t trials,
                                         std::uint64_t seed) {
  detail::require(trials >= 1, ErrorKind::kInvalidArgument, "trials must be >= 1");
  const BinaryModel clean = quantize_model(model, model.encoder.seeds.tie);
  RobustnessReport report;
  report.trials = trials;
  report.seed = seed;
  report.acc_clean = accuracy(clean, test_set);
  for (std::size_t r = 0; r < rates.size(); ++r) {
    RateResult result;
    result.rate = rates[r];
    for (std::size_t t = 0; t < trials; ++t) {
      result.trial_acc.push_back(accuracy(inject_bitflips(clean, rates[r], trial_seed(seed, r, t)), test_set));
    }
    const double n = static_cast<double>(trials);
    result.mean_acc = std::accumulate(result.trial_acc.begin(), result.trial_acc.end(), 0.0) / n;
    if (trials > 1) {
      double ss = 0.0;
      for (double a : result.trial_acc) ss += (a - result.mean_acc) * (a - result.mean_acc);
      result.sd_acc = std::sqrt(ss / (n - 1.0));
    }
    result.mean_loss = report.acc_clean - result.mean_acc;
    report.rates.push_back(std::move(result));
  }
  return report;
}

}  // namespace hdwear
