#pragma once

// General vs. personalized comparison. For every subject S:
//   general      - train on all other subjects, test on a seeded random half of S;
//   personalized - train on the first half of S (time order), test on the second half.
// Both are reported for the single-pass model and the retrained model.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hdwear/datapipe.hpp"
#include "hdwear/error.hpp"
#include "hdwear/learning.hpp"
#include "hdwear/pipeline.hpp"
#include "hdwear/rng.hpp"

namespace hdwear {

struct ModeAccuracy {
  double online = 0.0;
  double iterative = 0.0;
};

struct PersonalizationRow {
  std::string subject;
  ModeAccuracy general;
  ModeAccuracy personalized;
};

struct PersonalizationReport {
  std::vector<PersonalizationRow> rows;
  ModeAccuracy mean_general;
  ModeAccuracy mean_personalized;
  // Mean over subjects of (personalized - general), in accuracy units.
  ModeAccuracy mean_improvement;
  std::size_t general_runs = 0;
  std::size_t personalized_runs = 0;
};

namespace detail {

inline ModeAccuracy train_and_score(const WindowedDataset& ds, const SplitIndices& split,
                                    const std::vector<std::string>& classes, TrainSettings settings) {
  if (split.train.empty() || split.test.empty()) {
    throw Error(ErrorKind::kEmptyDataset, "personalization split left an empty side");
  }
  const auto train = ds.subset(split.train);
  const auto test = ds.subset(split.test);
  settings.mode = TrainMode::kIterative;
  const auto outcome = train_pipeline(train.windows, classes, settings);
  const auto samples = encode_windows(outcome.model, test.windows);
  return {evaluate(outcome.online_model, samples).accuracy, evaluate(outcome.model, samples).accuracy};
}

}  // namespace detail

inline PersonalizationReport run_personalization(const WindowedDataset& ds, const TrainSettings& settings) {
  const auto all_subjects = subjects(ds);
  if (all_subjects.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "personalization needs at least two subjects");
  }
  const auto classes = class_labels(ds);
  PersonalizationReport report;
  for (std::size_t s = 0; s < all_subjects.size(); ++s) {
    const std::string& subject = all_subjects[s];
    PersonalizationRow row;
    row.subject = subject;

    const auto general = split_leave_one_subject_out(ds, subject, rng::derive(settings.seed, 0x6E00 + s));
    row.general = detail::train_and_score(ds, general, classes, settings);
    ++report.general_runs;

    std::vector<std::size_t> own;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.windows[i].subject == subject) own.push_back(i);
    }
    const std::size_t n_train = (own.size() + 1) / 2;
    SplitIndices personal;
    personal.train.assign(own.begin(), own.begin() + static_cast<std::ptrdiff_t>(n_train));
    personal.test.assign(own.begin() + static_cast<std::ptrdiff_t>(n_train), own.end());
    row.personalized = detail::train_and_score(ds, personal, classes, settings);
    ++report.personalized_runs;

    report.rows.push_back(row);
  }
  const double n = static_cast<double>(report.rows.size());
  for (const auto& row : report.rows) {
    report.mean_general.online += row.general.online / n;
    report.mean_general.iterative += row.general.iterative / n;
    report.mean_personalized.online += row.personalized.online / n;
    report.mean_personalized.iterative += row.personalized.iterative / n;
  }
  report.mean_improvement.online = report.mean_personalized.online - report.mean_general.online;
  report.mean_improvement.iterative = report.mean_personalized.iterative - report.mean_general.iterative;
  return report;
}

}  // namespace hdwear
