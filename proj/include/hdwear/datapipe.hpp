#pragma once

// CSV ingestion, moving-average smoothing, sliding-window segmentation, per-window statistical
// features and train/test splitting.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdwear/encoding.hpp"
#include "hdwear/error.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(std::string_view text, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(delimiter, start);
    auto item = trim(text.substr(start, end == std::string_view::npos ? end : end - start));
    if (!item.empty()) out.emplace_back(item);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

// One CSV record; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_csv_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

inline std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace detail

struct CsvSchema {
  std::vector<std::string> channels;
  // Empty when the file carries no labels (prediction input).
  std::string label_column;
  // Empty: the whole file is one subject.
  std::string subject_column;
  char delimiter = ',';
  double sample_rate_hz = 1.0;

  // key=value lines: channels=a,b,c  label=...  subject=...  delimiter=,  sample_rate=50
  static CsvSchema parse(std::string_view text) {
    CsvSchema schema;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto body = detail::trim(line);
      if (body.empty() || body.front() == '#') continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::kSchema, "schema line " + std::to_string(line_no) + " lacks '='");
      }
      const auto key = detail::trim(body.substr(0, eq));
      const auto value = detail::trim(body.substr(eq + 1));
      if (key == "channels") {
        schema.channels = detail::split_list(value, ',');
      } else if (key == "label") {
        schema.label_column = value;
      } else if (key == "subject") {
        schema.subject_column = value;
      } else if (key == "delimiter") {
        if (value == "tab" || value == "\\t") {
          schema.delimiter = '\t';
        } else if (value.size() == 1) {
          schema.delimiter = value.front();
        } else {
          throw Error(ErrorKind::kSchema, "delimiter must be a single character");
        }
      } else if (key == "sample_rate") {
        auto rate = detail::parse_double(value);
        if (!rate || *rate <= 0.0) throw Error(ErrorKind::kSchema, "sample_rate must be > 0");
        schema.sample_rate_hz = *rate;
      } else {
        throw Error(ErrorKind::kSchema, "unknown schema key '" + std::string(key) + "'");
      }
    }
    if (schema.channels.empty()) throw Error(ErrorKind::kSchema, "schema lists no channels");
    return schema;
  }

  static CsvSchema load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open schema " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
  }

  [[nodiscard]] std::string to_string() const {
    std::string out = "channels=";
    for (std::size_t i = 0; i < channels.size(); ++i) out += (i ? "," : "") + channels[i];
    out += "\nlabel=" + label_column + "\nsubject=" + subject_column + "\ndelimiter=";
    out += delimiter == '\t' ? std::string("tab") : std::string(1, delimiter);
    std::ostringstream rate;
    rate << sample_rate_hz;
    out += "\nsample_rate=" + rate.str() + "\n";
    return out;
  }
};

struct Recording {
  std::string subject_id;
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;
  double sample_rate_hz = 1.0;
  // Per-sample labels; empty when the input has no label column.
  std::vector<std::string> labels;

  [[nodiscard]] std::size_t size() const noexcept { return channels.empty() ? 0 : channels.front().size(); }
};

// One Recording per subject, in order of first appearance.
inline std::vector<Recording> load_csv_text(std::string_view text, const CsvSchema& schema,
                                            const std::string& default_subject = "subject") {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) header = detail::split_csv_line(line, schema.delimiter);
  }
  if (header.empty()) throw Error(ErrorKind::kEmptyInput, "CSV input is empty");

  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::kSchema, "CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> channel_cols;
  for (const auto& c : schema.channels) channel_cols.push_back(column(c));
  const std::optional<std::size_t> label_col =
      schema.label_column.empty() ? std::nullopt : std::optional(column(schema.label_column));
  const std::optional<std::size_t> subject_col =
      schema.subject_column.empty() ? std::nullopt : std::optional(column(schema.subject_column));

  std::vector<Recording> recordings;
  std::map<std::string, std::size_t> by_subject;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line, schema.delimiter);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields, found " +
                                         std::to_string(fields.size()));
    }
    const std::string subject = subject_col ? fields[*subject_col] : default_subject;
    auto [it, inserted] = by_subject.try_emplace(subject, recordings.size());
    if (inserted) {
      Recording rec;
      rec.subject_id = subject;
      rec.channel_names = schema.channels;
      rec.channels.resize(schema.channels.size());
      rec.sample_rate_hz = schema.sample_rate_hz;
      recordings.push_back(std::move(rec));
    }
    Recording& rec = recordings[it->second];
    for (std::size_t c = 0; c < channel_cols.size(); ++c) {
      const auto value = detail::parse_double(fields[channel_cols[c]]);
      if (!value) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ", column '" +
                                           schema.channels[c] + "': not a finite number: '" +
                                           fields[channel_cols[c]] + "'");
      }
      rec.channels[c].push_back(*value);
    }
    if (label_col) rec.labels.push_back(fields[*label_col]);
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::kEmptyInput, "CSV input has a header but no rows");
  return recordings;
}

inline std::vector<Recording> load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return load_csv_text(text.str(), schema, path.stem().string());
}

// Centered window [i - (w-1)/2, i + w/2], truncated at the signal edges.
inline std::vector<double> moving_average(std::span<const double> signal, std::size_t window_len) {
  if (window_len == 0) throw Error(ErrorKind::kInvalidArgument, "moving-average window must be >= 1");
  std::vector<double> out(signal.size());
  const std::size_t before = (window_len - 1) / 2;
  const std::size_t after = window_len / 2;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(signal.size(), i + after + 1);
    if (window_len == 1) {
      out[i] = signal[i];
    } else {
      double sum = 0.0;
      for (std::size_t j = lo; j < hi; ++j) sum += signal[j];
      out[i] = sum / static_cast<double>(hi - lo);
    }
  }
  return out;
}

enum class LabelPolicy { kMajority, kLastSample };

struct RawWindow {
  std::vector<std::vector<double>> channels;
  std::string label;
  std::string subject;
  std::size_t start = 0;
};

struct Segmentation {
  std::vector<RawWindow> windows;
  bool too_short = false;
};

// Majority vote; ties go to the lexicographically smallest label, which is also the class order
// models use.
inline std::string majority_label(std::span<const std::string> labels) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

inline Segmentation segment(const Recording& rec, std::size_t window_samples, std::size_t stride,
                            LabelPolicy policy = LabelPolicy::kMajority) {
  detail::require(window_samples >= 1, ErrorKind::kInvalidArgument, "window must be >= 1 sample");
  detail::require(stride >= 1, ErrorKind::kInvalidArgument, "stride must be >= 1");
  Segmentation result;
  const std::size_t count = window_count(rec.size(), window_samples, stride);
  if (count == 0) {
    result.too_short = true;
    return result;
  }
  result.windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    RawWindow window;
    window.start = w * stride;
    window.subject = rec.subject_id;
    for (const auto& channel : rec.channels) {
      window.channels.emplace_back(channel.begin() + static_cast<std::ptrdiff_t>(window.start),
                                   channel.begin() + static_cast<std::ptrdiff_t>(window.start + window_samples));
    }
    if (!rec.labels.empty()) {
      std::span<const std::string> labels(rec.labels.data() + window.start, window_samples);
      window.label = policy == LabelPolicy::kMajority ? majority_label(labels) : labels.back();
    }
    result.windows.push_back(std::move(window));
  }
  return result;
}

inline constexpr std::size_t kFeaturesPerChannel = 7;
inline constexpr std::string_view kFeatureNames[kFeaturesPerChannel] = {
    "mean", "std", "min", "max", "rms", "mean_abs_diff", "zero_crossings"};

// mean, population std, min, max, rms, mean |x[i+1]-x[i]|, sign changes of x - mean.
inline void append_channel_features(std::span<const double> x, std::vector<double>& out) {
  if (x.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot extract features from an empty window");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  double sq = 0.0;
  for (double v : x) {
    ss += (v - mean) * (v - mean);
    sq += v * v;
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  double diff = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) diff += std::abs(x[i] - x[i - 1]);
  // A sign change counts once even when it passes through an exact zero.
  std::size_t crossings = 0;
  int last_sign = 0;
  for (double v : x) {
    const int sign = (v > mean) - (v < mean);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++crossings;
    last_sign = sign;
  }
  out.push_back(mean);
  out.push_back(std::sqrt(ss / n));
  out.push_back(*lo);
  out.push_back(*hi);
  out.push_back(std::sqrt(sq / n));
  out.push_back(x.size() > 1 ? diff / static_cast<double>(x.size() - 1) : 0.0);
  out.push_back(static_cast<double>(crossings));
}

inline std::vector<double> extract_features(std::span<const std::vector<double>> channels) {
  if (channels.empty()) throw Error(ErrorKind::kInvalidArgument, "window has no channels");
  std::vector<double> out;
  out.reserve(channels.size() * kFeaturesPerChannel);
  for (const auto& c : channels) append_channel_features(c, out);
  return out;
}

inline std::vector<std::string> feature_names(std::span<const std::string> channels) {
  std::vector<std::string> names;
  for (const auto& c : channels) {
    for (auto f : kFeatureNames) names.push_back(c + ":" + std::string(f));
  }
  return names;
}

struct FeatureWindow {
  std::vector<double> features;
  std::string label;
  std::string subject;
};

struct WindowedDataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureWindow> windows;

  [[nodiscard]] std::size_t size() const noexcept { return windows.size(); }
  [[nodiscard]] bool empty() const noexcept { return windows.empty(); }

  [[nodiscard]] WindowedDataset subset(std::span<const std::size_t> indices) const {
    WindowedDataset out;
    out.feature_names = feature_names;
    out.windows.reserve(indices.size());
    for (std::size_t i : indices) out.windows.push_back(windows.at(i));
    return out;
  }
};

struct SegmentOptions {
  std::size_t window_samples = 0;
  std::size_t stride = 0;
  // Moving-average length; 1 disables smoothing.
  std::size_t smoothing = 1;
  LabelPolicy policy = LabelPolicy::kMajority;
};

// Smooth, segment and featurize every recording, keeping recording then time order.
inline WindowedDataset featurize(std::span<const Recording> recordings, const SegmentOptions& options) {
  WindowedDataset ds;
  if (recordings.empty()) return ds;
  ds.feature_names = feature_names(recordings.front().channel_names);
  for (const auto& rec : recordings) {
    Recording smoothed = rec;
    if (options.smoothing > 1) {
      for (auto& channel : smoothed.channels) channel = moving_average(channel, options.smoothing);
    }
    const auto seg = segment(smoothed, options.window_samples, options.stride, options.policy);
    for (const auto& w : seg.windows) {
      ds.windows.push_back({extract_features(w.channels), w.label, w.subject});
    }
  }
  return ds;
}

// Sorted distinct labels.
inline std::vector<std::string> class_labels(const WindowedDataset& ds) {
  std::set<std::string> labels;
  for (const auto& w : ds.windows) labels.insert(w.label);
  return {labels.begin(), labels.end()};
}

// Subjects in order of first appearance.
inline std::vector<std::string> subjects(const WindowedDataset& ds) {
  std::vector<std::string> out;
  for (const auto& w : ds.windows) {
    if (std::find(out.begin(), out.end(), w.subject) == out.end()) out.push_back(w.subject);
  }
  return out;
}

// Element-wise min/max over the given (training) windows.
inline std::vector<FeatureBounds> fit_stats(std::span<const FeatureWindow> train) {
  if (train.empty()) throw Error(ErrorKind::kEmptyInput, "cannot fit feature bounds on an empty split");
  const std::size_t m = train.front().features.size();
  std::vector<FeatureBounds> bounds(m);
  for (std::size_t f = 0; f < m; ++f) bounds[f] = {train.front().features[f], train.front().features[f]};
  for (const auto& w : train) {
    if (w.features.size() != m) throw Error(ErrorKind::kInvalidArgument, "windows differ in feature arity");
    for (std::size_t f = 0; f < m; ++f) {
      bounds[f].min = std::min(bounds[f].min, w.features[f]);
      bounds[f].max = std::max(bounds[f].max, w.features[f]);
    }
  }
  return bounds;
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

enum class SplitKind { kRandom, kSubjectHalf, kLeaveOneSubjectOut };

struct SplitStrategy {
  SplitKind kind = SplitKind::kRandom;
  std::uint64_t seed = 0;
  double test_fraction = 0.25;
  // Held-out subject for leave-one-subject-out.
  std::string subject;
};

namespace detail {

// `count` indices drawn from `pool` without replacement, returned sorted.
inline std::vector<std::size_t> sample_sorted(std::vector<std::size_t> pool, std::size_t count,
                                              std::uint64_t seed, std::uint64_t stream_id) {
  rng::Stream stream(seed, stream_id);
  rng::shuffle(std::span<std::size_t>(pool), stream);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& taken) {
  std::vector<bool> used(n, false);
  for (auto i : taken) used[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) out.push_back(i);
  }
  return out;
}

}  // namespace detail

inline SplitIndices split_random(const WindowedDataset& ds, std::uint64_t seed, double test_fraction) {
  detail::require(test_fraction >= 0.0 && test_fraction <= 1.0, ErrorKind::kInvalidArgument,
                  "test fraction must lie in [0, 1]");
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ds.size())));
  SplitIndices out;
  out.test = detail::sample_sorted(all, n_test, seed, 0x5B);
  out.train = detail::complement(ds.size(), out.test);
  return out;
}

// First ceil(n/2) windows of every subject train, the rest test; time order is preserved.
inline SplitIndices split_subject_half(const WindowedDataset& ds) {
  std::map<std::string, std::vector<std::size_t>> per_subject;
  for (std::size_t i = 0; i < ds.size(); ++i) per_subject[ds.windows[i].subject].push_back(i);
  SplitIndices out;
  for (const auto& [subject, idx] : per_subject) {
    const std::size_t n_train = (idx.size() + 1) / 2;
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// Trains on every other subject; tests on a seeded random half of the held-out subject.
inline SplitIndices split_leave_one_subject_out(const WindowedDataset& ds, const std::string& subject,
                                                std::uint64_t seed) {
  const auto all_subjects = subjects(ds);
  if (std::find(all_subjects.begin(), all_subjects.end(), subject) == all_subjects.end()) {
    throw Error(ErrorKind::kInvalidArgument, "unknown subject '" + subject + "'");
  }
  if (all_subjects.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "leave-one-subject-out needs at least two subjects");
  }
  SplitIndices out;
  std::vector<std::size_t> held_out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds.windows[i].subject == subject ? held_out : out.train).push_back(i);
  }
  const std::size_t n_test = std::max<std::size_t>(1, held_out.size() / 2);
  out.test = detail::sample_sorted(held_out, n_test, seed, 0x1050);
  return out;
}

inline SplitIndices split(const WindowedDataset& ds, const SplitStrategy& strategy) {
  switch (strategy.kind) {
    case SplitKind::kRandom: return split_random(ds, strategy.seed, strategy.test_fraction);
    case SplitKind::kSubjectHalf: return split_subject_half(ds);
    case SplitKind::kLeaveOneSubjectOut:
      return split_leave_one_subject_out(ds, strategy.subject, strategy.seed);
  }
  return {};
}

}  // namespace hdwear
