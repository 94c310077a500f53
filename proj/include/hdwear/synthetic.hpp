#pragma once

// Seeded synthetic data: Gaussian feature clusters (optionally imbalanced or with per-subject
// bias) and raw multi-channel activity recordings for exercising the CSV pipeline.

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hdwear/datapipe.hpp"
#include "hdwear/rng.hpp"

namespace hdwear::synthetic {

struct ClusterSpec {
  std::size_t classes = 4;
  std::size_t features = 7;
  // Class centers are N(0, center_scale^2) per feature; samples add N(0, noise^2).
  double center_scale = 1.0;
  double noise = 0.4;
  // Per-feature noise is noise * U[1 - spread, 1 + spread]; anisotropy the centroid cannot model.
  double noise_spread = 0.5;
  // Per-class multiplier on the noise, U[1 - spread, 1 + spread].
  double class_noise_spread = 0.5;
};

inline std::string class_name(std::size_t k) { return "c" + std::to_string(k); }

class ClusterGenerator {
 public:
  ClusterGenerator(std::uint64_t seed, ClusterSpec spec) : spec_(spec), samples_(seed, 2) {
    rng::Stream centers(seed, 1);
    centers_.resize(spec.classes);
    for (auto& c : centers_) {
      c.resize(spec.features);
      for (auto& v : c) v = spec.center_scale * centers.normal();
    }
    class_noise_.resize(spec.classes);
    for (auto& n : class_noise_) n = 1.0 - spec.class_noise_spread + 2.0 * spec.class_noise_spread * centers.uniform();
    noise_.resize(spec.features);
    for (auto& n : noise_) n = spec.noise * (1.0 - spec.noise_spread + 2.0 * spec.noise_spread * centers.uniform());
  }

  [[nodiscard]] const std::vector<std::vector<double>>& centers() const noexcept { return centers_; }

  FeatureWindow draw(std::size_t label, const std::string& subject = "s0",
                     std::span<const double> bias = {}) {
    FeatureWindow w;
    w.label = class_name(label);
    w.subject = subject;
    w.features.resize(spec_.features);
    for (std::size_t f = 0; f < spec_.features; ++f) {
      w.features[f] = centers_[label][f] + class_noise_[label] * noise_[f] * samples_.normal() + (bias.empty() ? 0.0 : bias[f]);
    }
    return w;
  }

  // Round-robin labels so every class is equally represented.
  std::vector<FeatureWindow> draw_balanced(std::size_t count) {
    std::vector<FeatureWindow> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(draw(i % spec_.classes));
    return out;
  }

  // Labels drawn with the given relative weights, in random stream order.
  std::vector<FeatureWindow> draw_weighted(std::size_t count, std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<FeatureWindow> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      double u = samples_.uniform() * total;
      std::size_t label = 0;
      while (label + 1 < weights.size() && u >= weights[label]) u -= weights[label++];
      out.push_back(draw(label));
    }
    return out;
  }

 private:
  ClusterSpec spec_;
  rng::Stream samples_;
  std::vector<std::vector<double>> centers_;
  std::vector<double> noise_;
  std::vector<double> class_noise_;
};

struct Benchmark {
  std::vector<FeatureWindow> train;
  std::vector<FeatureWindow> test;
  std::vector<std::string> classes;
};

inline std::vector<std::string> class_names(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(class_name(k));
  return out;
}

// 4 classes x 7 features, 2000 train / 800 test by default.
inline Benchmark cluster_benchmark(std::uint64_t seed, std::size_t n_train = 2000, std::size_t n_test = 800,
                                   ClusterSpec spec = {}) {
  ClusterGenerator gen(seed, spec);
  Benchmark b;
  b.train = gen.draw_balanced(n_train);
  b.test = gen.draw_balanced(n_test);
  b.classes = class_names(spec.classes);
  return b;
}

struct MultiSubjectSpec {
  ClusterSpec clusters;
  std::size_t subjects = 6;
  std::size_t windows_per_subject = 400;
  // Per-subject offset drawn N(0, bias_scale^2) per feature.
  double bias_scale = 0.8;
};

inline WindowedDataset multi_subject(std::uint64_t seed, const MultiSubjectSpec& spec) {
  ClusterGenerator gen(seed, spec.clusters);
  rng::Stream bias_stream(seed, 3);
  rng::Stream label_stream(seed, 4);
  WindowedDataset ds;
  for (std::size_t f = 0; f < spec.clusters.features; ++f) ds.feature_names.push_back("f" + std::to_string(f));
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    std::vector<double> bias(spec.clusters.features);
    for (auto& b : bias) b = spec.bias_scale * bias_stream.normal();
    const std::string subject = "S" + std::to_string(s + 1);
    for (std::size_t i = 0; i < spec.windows_per_subject; ++i) {
      ds.windows.push_back(gen.draw(label_stream.below(spec.clusters.classes), subject, bias));
    }
  }
  return ds;
}

struct RecordingSpec {
  std::size_t subjects = 3;
  std::size_t classes = 3;
  std::size_t channels = 3;
  double sample_rate_hz = 50.0;
  // Each activity bout lasts this many seconds.
  double bout_seconds = 4.0;
  std::size_t bouts_per_subject = 12;
  double noise = 0.2;
};

// Per-class sinusoid frequency and amplitude per channel, with per-subject gain and offset.
inline std::vector<Recording> recordings(std::uint64_t seed, const RecordingSpec& spec) {
  rng::Stream params(seed, 10);
  std::vector<std::vector<std::pair<double, double>>> shape(spec.classes);
  for (auto& per_class : shape) {
    for (std::size_t c = 0; c < spec.channels; ++c) {
      per_class.emplace_back(0.5 + 4.0 * params.uniform(), 0.5 + 2.0 * params.uniform());
    }
  }
  rng::Stream noise(seed, 11);
  std::vector<Recording> out;
  const auto bout = static_cast<std::size_t>(spec.bout_seconds * spec.sample_rate_hz);
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    Recording rec;
    rec.subject_id = "S" + std::to_string(s + 1);
    rec.sample_rate_hz = spec.sample_rate_hz;
    rec.channels.resize(spec.channels);
    for (std::size_t c = 0; c < spec.channels; ++c) rec.channel_names.push_back("ch" + std::to_string(c));
    const double gain = 0.8 + 0.4 * params.uniform();
    const double offset = 0.3 * params.normal();
    for (std::size_t b = 0; b < spec.bouts_per_subject; ++b) {
      const std::size_t label = (b + s) % spec.classes;
      for (std::size_t i = 0; i < bout; ++i) {
        const double t = static_cast<double>(i) / spec.sample_rate_hz;
        for (std::size_t c = 0; c < spec.channels; ++c) {
          const auto [freq, amp] = shape[label][c];
          rec.channels[c].push_back(offset + gain * amp * std::sin(2.0 * std::numbers::pi * freq * t) +
                                    spec.noise * noise.normal());
        }
        rec.labels.push_back("activity" + std::to_string(label));
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

// subject,<channels...>,label with a header row.
inline std::string to_csv(const std::vector<Recording>& recs) {
  std::string out = "subject";
  if (!recs.empty()) {
    for (const auto& name : recs.front().channel_names) out += "," + name;
  }
  out += ",label\n";
  char buf[64];
  for (const auto& rec : recs) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
      out += rec.subject_id;
      for (const auto& channel : rec.channels) {
        std::snprintf(buf, sizeof buf, ",%.6f", channel[i]);
        out += buf;
      }
      out += "," + rec.labels[i] + "\n";
    }
  }
  return out;
}

}  // namespace hdwear::synthetic
