#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hdwear/hypervector.hpp"
#include "hdwear/learning.hpp"
#include "hdwear/model.hpp"
#include "hdwear/rng.hpp"
#include "reference.hpp"

using namespace hdwear;

namespace {

Model blank(std::size_t classes, std::size_t dim = 4096, double eta = 1.0) {
  EncoderConfig enc;
  enc.dim = dim;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < classes; ++k) labels.push_back("k" + std::to_string(k));
  return Model::create(enc, eta, labels);
}

AccumHV noisy_copy(const BipolarHV& proto, std::uint64_t seed, double flip_fraction) {
  auto v = proto;
  rng::Stream s(seed, 0);
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (s.uniform() < flip_fraction) v.flip(i);
  }
  return AccumHV::from(v);
}

double norm_of_difference(const AccumHV& a, const AccumHV& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(ModelCreate, Validation) {
  EncoderConfig enc;
  enc.dim = 64;
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, Model::create(enc, 0.5, {}));
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, Model::create(enc, 0.5, {"a", "a"}));
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, Model::create(enc, 0.0, {"a"}));
  enc.dim = 0;
  EXPECT_HD_ERROR(ErrorKind::kInvalidDimension, Model::create(enc, 0.5, {"a"}));
  const auto m = blank(3, 64);
  EXPECT_FALSE(m.is_trained());
  for (const auto& c : m.class_hvs) EXPECT_EQ(c.dim(), 64U);
  EXPECT_EQ(m.class_index("k2"), 2U);
  EXPECT_HD_ERROR(ErrorKind::kUnknownClass, m.class_index("zz"));
}

TEST(Similarities, SoleMemberIsOne) {
  auto m = blank(2);
  const auto h = AccumHV::from(random_hv(1, 0, 4096));
  bundle_into(m.class_hvs[1], h);
  const auto d = similarities(m, h);
  EXPECT_EQ(d[0], 0.0);
  EXPECT_EQ(d[1], 1.0);
}

TEST(Similarities, ZeroClassesGiveZero) {
  const auto m = blank(3);
  for (double d : similarities(m, AccumHV::from(random_hv(1, 0, 4096)))) EXPECT_EQ(d, 0.0);
}

TEST(Similarities, OrthogonalPrototypes) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto m = blank(2);
    const auto p1 = random_hv(seed, 0, 4096);
    const auto p2 = random_hv(seed, 1, 4096);
    bundle_into(m.class_hvs[0], p1);
    bundle_into(m.class_hvs[1], p2);
    const auto d = similarities(m, AccumHV::from(p1));
    EXPECT_GT(d[0], 0.9);
    EXPECT_LT(std::abs(d[1]), 0.1);
  }
}

TEST(Similarities, DimensionMismatch) {
  const auto m = blank(2, 64);
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, similarities(m, AccumHV(65)));
}

TEST(Predict, UntrainedModel) {
  const auto m = blank(2, 64);
  EXPECT_HD_ERROR(ErrorKind::kModelNotTrained, predict(m, AccumHV::from(random_hv(1, 0, 64))));
}

TEST(Predict, SingleClassAlwaysWins) {
  auto m = blank(1, 256);
  bundle_into(m.class_hvs[0], random_hv(1, 0, 256));
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_EQ(predict(m, AccumHV::from(random_hv(s, 5, 256))), 0U);
}

TEST(Predict, TiesGoToLowestIndex) {
  auto m = blank(3, 256);
  const auto v = random_hv(1, 0, 256);
  bundle_into(m.class_hvs[1], v);
  bundle_into(m.class_hvs[2], v);
  EXPECT_EQ(predict(m, AccumHV::from(v)), 1U);
}

TEST(Predict, RecoversSoleTrainingVector) {
  auto m = blank(4);
  std::vector<AccumHV> protos;
  for (std::size_t k = 0; k < 4; ++k) {
    protos.push_back(AccumHV::from(random_hv(9, k, 4096)));
    online_update(m, protos.back(), k);
  }
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(predict(m, protos[k]), k);
}

TEST(Predict, InvariantToPositiveRescaling) {
  auto m = blank(3);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::uint64_t s = 0; s < 5; ++s) online_update(m, AccumHV::from(random_hv(k, s, 4096)), k);
  }
  auto scaled = m;
  for (auto& c : scaled.class_hvs) {
    for (auto& v : c.data()) v *= 8.0F;
  }
  for (std::uint64_t q = 0; q < 50; ++q) {
    const auto query = AccumHV::from(random_hv(100, q, 4096));
    EXPECT_EQ(predict(m, query), predict(scaled, query));
  }
}

TEST(OnlineUpdate, NoChangeAtSaturation) {
  auto m = blank(2);
  const auto h = AccumHV::from(random_hv(3, 0, 4096));
  bundle_into(m.class_hvs[0], h, 2.5F);
  const auto before = m;
  EXPECT_EQ(online_update(m, h, 0), 0.0);
  EXPECT_EQ(m, before);
}

TEST(OnlineUpdate, EmptyClassTakesQuery) {
  auto m = blank(2, 4096, 1.0);
  const auto h = AccumHV::from(random_hv(3, 0, 4096));
  EXPECT_EQ(online_update(m, h, 1), 1.0);
  EXPECT_EQ(m.class_hvs[1], h);
  EXPECT_TRUE(m.class_hvs[0].is_zero());
}

TEST(OnlineUpdate, AppliesAdaptiveWeightExactly) {
  auto m = blank(2, 1024, 0.5);
  bundle_into(m.class_hvs[0], random_hv(4, 0, 1024));
  bundle_into(m.class_hvs[0], random_hv(4, 1, 1024), 0.5F);
  const auto h = AccumHV::from(random_hv(4, 2, 1024));
  const auto before = m.class_hvs[0];
  const double delta = static_cast<double>(ref::cosine(ref::to_floats(before), ref::to_floats(h)));
  const double w = online_update(m, h, 0);
  EXPECT_NEAR(w, 0.5 * (1.0 - delta), 1e-12);
  for (std::size_t i = 0; i < 1024; ++i) EXPECT_EQ(m.class_hvs[0][i], before[i] + static_cast<float>(w) * h[i]);
  EXPECT_TRUE(m.class_hvs[1].is_zero());
}

TEST(OnlineUpdate, RepeatedQueryShrinksUpdates) {
  auto m = blank(1, 4096, 0.5);
  bundle_into(m.class_hvs[0], random_hv(5, 0, 4096));
  const auto h = AccumHV::from(random_hv(5, 1, 4096));
  double previous = 1e300;
  for (int rep = 0; rep < 10; ++rep) {
    const auto before = m.class_hvs[0];
    online_update(m, h, 0);
    const double step = norm_of_difference(m.class_hvs[0], before);
    EXPECT_LT(step, previous) << rep;
    EXPECT_GT(step, 0.0);
    previous = step;
  }
}

TEST(OnlineUpdate, UnknownLabel) {
  auto m = blank(2, 64);
  EXPECT_HD_ERROR(ErrorKind::kUnknownClass, online_update(m, AccumHV::from(random_hv(1, 0, 64)), 2));
}

TEST(TrainOnline, EmptyStreamLeavesModel) {
  auto m = blank(2, 64);
  train_online(m, {});
  EXPECT_EQ(m, blank(2, 64));
}

TEST(TrainOnline, OneSamplePerClass) {
  auto m = blank(3);
  std::vector<Sample> stream;
  for (std::size_t k = 0; k < 3; ++k) stream.push_back({AccumHV::from(random_hv(8, k, 4096)), k});
  train_online(m, stream);
  for (const auto& s : stream) EXPECT_EQ(predict(m, s.hv), s.label);
}

TEST(TrainOnline, OrderMayMatter) {
  const auto proto = random_hv(1, 0, 4096);
  std::vector<Sample> stream;
  for (std::uint64_t s = 0; s < 5; ++s) stream.push_back({noisy_copy(proto, s, 0.3), 0});
  auto forward = blank(1);
  train_online(forward, stream);
  std::vector<Sample> reversed(stream.rbegin(), stream.rend());
  auto backward = blank(1);
  train_online(backward, reversed);
  // The adaptive update is sequential, so the two accumulators differ.
  EXPECT_NE(forward.class_hvs[0], backward.class_hvs[0]);
}

TEST(TrainNaive, AddsWithUnitWeight) {
  auto m = blank(2, 256);
  const auto a = AccumHV::from(random_hv(1, 0, 256));
  const std::vector<Sample> stream{{a, 1}, {a, 1}};
  train_naive(m, stream);
  for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(m.class_hvs[1][i], 2.0F * a[i]);
}

TEST(Retrain, PerfectModelUntouched) {
  auto m = blank(3);
  std::vector<Sample> data;
  for (std::size_t k = 0; k < 3; ++k) data.push_back({AccumHV::from(random_hv(2, k, 4096)), k});
  train_online(m, data);
  const auto before = m;
  EXPECT_EQ(retrain_epoch(m, data), 0U);
  EXPECT_EQ(m, before);
}

TEST(Retrain, MarginalMissMakesNoChange) {
  auto m = blank(2, 256);
  const auto v = random_hv(1, 0, 256);
  bundle_into(m.class_hvs[0], v);
  bundle_into(m.class_hvs[1], v);
  const auto before = m;
  const auto step = retrain_sample(m, AccumHV::from(v), 1);
  EXPECT_TRUE(step.mispredicted);
  EXPECT_EQ(step.predicted, 0U);
  EXPECT_EQ(step.weight, 0.0);
  EXPECT_EQ(m, before);
}

TEST(Retrain, ExactEqualAndOppositeIncrements) {
  // delta_l' = 1 and delta_l = 0.5 exactly, so every quantity below is a dyadic rational.
  auto m = blank(2, 4096, 1.0);
  const auto h = random_hv(6, 0, 4096);
  auto c = h;
  for (std::size_t i = 0; i < 1024; ++i) c.flip(i);
  ASSERT_EQ(dot(c, h), 2048);
  bundle_into(m.class_hvs[0], c);
  bundle_into(m.class_hvs[1], h);
  const auto before = m;
  const auto step = retrain_sample(m, AccumHV::from(h), 0);
  ASSERT_TRUE(step.mispredicted);
  EXPECT_EQ(step.weight, 0.5);
  for (std::size_t i = 0; i < 4096; ++i) {
    const float up = m.class_hvs[0][i] - before.class_hvs[0][i];
    const float down = m.class_hvs[1][i] - before.class_hvs[1][i];
    EXPECT_EQ(up, -down);
    EXPECT_EQ(up, 0.5F * static_cast<float>(h.component(i)));
  }
}

TEST(Retrain, OnlyTwoClassesChangeAndMarginShrinks) {
  rng::Stream s(7, 7);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200 && checked < 60; ++seed) {
    auto m = blank(4, 2048, 0.5);
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::uint64_t j = 0; j < 3; ++j) online_update(m, AccumHV::from(random_hv(seed * 10 + k, j, 2048)), k);
    }
    const auto h = AccumHV::from(random_hv(seed, 99, 2048));
    const std::size_t label = s.below(4);
    const auto before = m;
    const auto d0 = similarities(m, h);
    const auto step = retrain_sample(m, h, label);
    if (!step.mispredicted || step.weight == 0.0) continue;
    ++checked;
    const std::size_t wrong = step.predicted;
    for (std::size_t k = 0; k < 4; ++k) {
      if (k != label && k != wrong) EXPECT_EQ(m.class_hvs[k], before.class_hvs[k]);
    }
    for (std::size_t i = 0; i < 2048; ++i) {
      const double up = double(m.class_hvs[label][i]) - before.class_hvs[label][i];
      const double down = double(m.class_hvs[wrong][i]) - before.class_hvs[wrong][i];
      // Each side adds the same float increment; only the final rounding of each sum may differ.
      EXPECT_NEAR(up, -down, 1e-6 * (1.0 + std::abs(before.class_hvs[wrong][i]) + std::abs(before.class_hvs[label][i])));
    }
    const auto d1 = similarities(m, h);
    EXPECT_GT(d1[label], d0[label]);
    EXPECT_LT(d1[wrong], d0[wrong]);
    EXPECT_LT(d1[wrong] - d1[label], d0[wrong] - d0[label]);
  }
  EXPECT_GE(checked, 30);
}

TEST(Retrain, UnknownLabel) {
  auto m = blank(2, 64);
  bundle_into(m.class_hvs[0], random_hv(1, 0, 64));
  EXPECT_HD_ERROR(ErrorKind::kUnknownClass, retrain_sample(m, AccumHV::from(random_hv(1, 1, 64)), 5));
}

namespace {

std::vector<Sample> two_cluster_data(std::uint64_t seed, std::size_t n, double noise) {
  const auto p0 = random_hv(seed, 0, 4096);
  const auto p1 = random_hv(seed, 1, 4096);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    out.push_back({noisy_copy(label == 0 ? p0 : p1, seed * 1000 + i, noise), label});
  }
  return out;
}

}  // namespace

TEST(TrainIterative, MaxEpochsOne) {
  auto m = blank(2);
  auto data = two_cluster_data(1, 40, 0.45);
  // Flip some labels so training cannot reach zero mispredictions.
  for (std::size_t i = 0; i < data.size(); i += 5) data[i].label ^= 1U;
  train_online(m, data);
  IterativeOptions opt;
  opt.max_epochs = 1;
  const auto r = train_iterative(m, data, opt);
  EXPECT_EQ(r.epochs_run, 1U);
  EXPECT_EQ(r.curve.size(), 1U);
}

TEST(TrainIterative, SeparableDataReachesZero) {
  auto m = blank(2);
  const auto data = two_cluster_data(2, 200, 0.3);
  train_online(m, data);
  IterativeOptions opt;
  opt.max_epochs = 20;
  const auto r = train_iterative(m, data, opt);
  EXPECT_LE(r.epochs_run, 20U);
  EXPECT_EQ(count_mispredictions(m, data), 0U);
  EXPECT_EQ(r.best_mispredictions, 0U);
}

TEST(TrainIterative, PatienceZeroStopsAtFirstStall) {
  auto m = blank(2);
  auto data = two_cluster_data(3, 60, 0.45);
  for (std::size_t i = 0; i < data.size(); i += 4) data[i].label ^= 1U;
  train_online(m, data);
  const std::size_t initial = count_mispredictions(m, data);
  IterativeOptions opt;
  opt.max_epochs = 50;
  opt.patience = 0;
  const auto r = train_iterative(m, data, opt);
  ASSERT_FALSE(r.curve.empty());
  std::size_t best = initial;
  for (std::size_t e = 0; e + 1 < r.curve.size(); ++e) {
    EXPECT_LT(r.curve[e].end_mispredictions, best);
    best = r.curve[e].end_mispredictions;
  }
  if (r.epochs_run < opt.max_epochs) EXPECT_GE(r.curve.back().end_mispredictions, best);
}

TEST(TrainIterative, KeepsBestModel) {
  auto m = blank(2);
  auto data = two_cluster_data(4, 80, 0.45);
  for (std::size_t i = 0; i < data.size(); i += 3) data[i].label ^= 1U;
  train_online(m, data);
  const std::size_t initial = count_mispredictions(m, data);
  const auto r = train_iterative(m, data, {});
  EXPECT_EQ(count_mispredictions(m, data), r.best_mispredictions);
  EXPECT_LE(r.best_mispredictions, initial);
  for (const auto& e : r.curve) EXPECT_GE(e.end_mispredictions, r.best_mispredictions);
}

TEST(TrainIterative, ShuffleIsDeterministic) {
  const auto data = two_cluster_data(5, 80, 0.48);
  IterativeOptions opt;
  opt.shuffle_seed = 77;
  auto a = blank(2);
  auto b = blank(2);
  train_online(a, data);
  train_online(b, data);
  train_iterative(a, data, opt);
  train_iterative(b, data, opt);
  EXPECT_EQ(a, b);
}

TEST(TrainIterative, RejectsZeroEpochs) {
  auto m = blank(2, 64);
  IterativeOptions opt;
  opt.max_epochs = 0;
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, train_iterative(m, {}, opt));
}

TEST(Evaluate, PerfectFit) {
  auto m = blank(3);
  std::vector<Sample> data;
  for (std::size_t k = 0; k < 3; ++k) data.push_back({AccumHV::from(random_hv(2, k, 4096)), k});
  train_online(m, data);
  const auto r = evaluate(m, data);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.n_samples, 3U);
}

TEST(Evaluate, SingleWrongSample) {
  auto m = blank(2, 256);
  const auto v = AccumHV::from(random_hv(1, 0, 256));
  bundle_into(m.class_hvs[0], v);
  const std::vector<Sample> data{{v, 1}};
  const auto r = evaluate(m, data);
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_EQ(r.confusion[1][0], 1U);
  EXPECT_EQ(r.per_class_recall[1], 0.0);
  EXPECT_TRUE(std::isnan(r.per_class_recall[0]));
}

TEST(Evaluate, ConfusionAccounting) {
  auto m = blank(4);
  auto data = two_cluster_data(6, 100, 0.47);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].label = i % 4;
  train_online(m, data);
  const auto r = evaluate(m, data);
  std::size_t total = 0;
  std::size_t trace = 0;
  for (std::size_t t = 0; t < 4; ++t) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < 4; ++p) row += r.confusion[t][p];
    EXPECT_EQ(row, 25U);
    total += row;
    trace += r.confusion[t][t];
    EXPECT_DOUBLE_EQ(r.per_class_recall[t], r.confusion[t][t] / 25.0);
  }
  EXPECT_EQ(total, r.n_samples);
  EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(trace) / static_cast<double>(total));
}

TEST(Evaluate, EmptyDataset) {
  auto m = blank(2, 64);
  bundle_into(m.class_hvs[0], random_hv(1, 0, 64));
  EXPECT_HD_ERROR(ErrorKind::kEmptyDataset, evaluate(m, {}));
}
