#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hdwear/learning.hpp"
#include "hdwear/pipeline.hpp"
#include "hdwear/robustness.hpp"
#include "hdwear/synthetic.hpp"
#include "reference.hpp"

using namespace hdwear;

namespace {

struct Fixture {
  Model model;
  std::vector<Sample> test;
};

Fixture small_benchmark(std::size_t dim = 2048) {
  const auto bench = synthetic::cluster_benchmark(5, 400, 200);
  TrainSettings settings;
  settings.dim = dim;
  settings.seed = 5;
  settings.mode = TrainMode::kOnline;
  auto model = train_pipeline(bench.train, bench.classes, settings).model;
  auto test = encode_windows(model, bench.test);
  return {std::move(model), std::move(test)};
}

std::size_t differing_bits(const BinaryModel& a, const BinaryModel& b) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.class_bits.size(); ++k) n += hamming(a.class_bits[k], b.class_bits[k]);
  return n;
}

}  // namespace

TEST(QuantizeModel, BipolarClassesAreUnchanged) {
  EncoderConfig enc;
  enc.dim = 300;
  auto m = Model::create(enc, 0.5, {"a", "b"});
  const auto a = random_hv(1, 0, 300);
  const auto b = random_hv(1, 1, 300);
  bundle_into(m.class_hvs[0], a);
  bundle_into(m.class_hvs[1], b);
  const auto bm = quantize_model(m, 3);
  EXPECT_EQ(bm.class_bits[0], a);
  EXPECT_EQ(bm.class_bits[1], b);
  EXPECT_EQ(bm.dim, 300U);
  EXPECT_EQ(bm.classes, m.classes);
}

TEST(QuantizeModel, Idempotent) {
  const auto f = small_benchmark();
  EXPECT_EQ(quantize_model(f.model, 9), quantize_model(f.model, 9));
  EXPECT_EQ(quantize_model(f.model, 9).source_hash, crc32_of(serialize_model(f.model)));
}

TEST(QuantizeModel, Untrained) {
  EncoderConfig enc;
  enc.dim = 64;
  EXPECT_HD_ERROR(ErrorKind::kModelNotTrained, quantize_model(Model::create(enc, 0.5, {"a"}), 0));
}

TEST(QuantizeModel, CloseToRealValuedAccuracy) {
  const auto f = small_benchmark(4096);
  const double real = evaluate(f.model, f.test).accuracy;
  const double binary = accuracy(quantize_model(f.model, f.model.encoder.seeds.tie), f.test);
  EXPECT_LE(std::abs(real - binary), 0.03);
}

TEST(Bitflips, RateZeroIsIdentity) {
  const auto f = small_benchmark();
  const auto bm = quantize_model(f.model, 1);
  EXPECT_EQ(inject_bitflips(bm, 0.0, 5), bm);
}

TEST(Bitflips, RateOneNegatesEverything) {
  const auto f = small_benchmark();
  const auto bm = quantize_model(f.model, 1);
  const auto flipped = inject_bitflips(bm, 1.0, 5);
  for (std::size_t k = 0; k < bm.class_bits.size(); ++k) EXPECT_EQ(flipped.class_bits[k], bm.class_bits[k].negated());
  for (const auto& s : f.test) {
    std::vector<double> scores;
    for (const auto& c : bm.class_bits) scores.push_back(dot(s.hv, c));
    std::size_t argmin = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
      if (scores[k] < scores[argmin]) argmin = k;
    }
    EXPECT_EQ(predict(flipped, s.hv), argmin);
  }
}

TEST(Bitflips, ExactCountForTenPercentOfFourClasses) {
  const auto f = small_benchmark(4096);
  const auto bm = quantize_model(f.model, 1);
  ASSERT_EQ(bm.class_bits.size(), 4U);
  EXPECT_EQ(flip_count(0.1, 4 * 4096), 1638U);
  EXPECT_EQ(differing_bits(bm, inject_bitflips(bm, 0.1, 77)), 1638U);
}

TEST(Bitflips, CountExactAtEveryRate) {
  const auto f = small_benchmark(1000);
  const auto bm = quantize_model(f.model, 1);
  for (double rate : {0.0, 0.0001, 0.01, 0.02, 0.04, 0.06, 0.1, 0.12, 0.3333, 0.5, 0.9999, 1.0}) {
    for (std::uint64_t t = 0; t < 3; ++t) {
      const auto expected = static_cast<std::size_t>(std::llround(rate * 4000.0));
      EXPECT_EQ(differing_bits(bm, inject_bitflips(bm, rate, t)), expected) << rate;
    }
  }
}

TEST(Bitflips, DeterministicAndSeedDependent) {
  const auto f = small_benchmark();
  const auto bm = quantize_model(f.model, 1);
  EXPECT_EQ(inject_bitflips(bm, 0.05, 3), inject_bitflips(bm, 0.05, 3));
  EXPECT_NE(inject_bitflips(bm, 0.05, 3), inject_bitflips(bm, 0.05, 4));
}

TEST(Bitflips, PositionsAreSpreadOverClasses) {
  const auto f = small_benchmark(1000);
  const auto bm = quantize_model(f.model, 1);
  const auto c = inject_bitflips(bm, 0.2, 11);
  for (std::size_t k = 0; k < 4; ++k) {
    const double n = static_cast<double>(hamming(bm.class_bits[k], c.class_bits[k]));
    // Hypergeometric mean 200, sd about 11.
    EXPECT_NEAR(n, 200.0, 60.0);
  }
}

TEST(Bitflips, RateOutOfRange) {
  const auto f = small_benchmark();
  const auto bm = quantize_model(f.model, 1);
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, inject_bitflips(bm, -0.01, 0));
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, inject_bitflips(bm, 1.01, 0));
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, inject_bitflips(bm, std::nan(""), 0));
}

TEST(Sweep, ZeroRateHasZeroLoss) {
  const auto f = small_benchmark();
  const std::vector<double> rates{0.0};
  const auto r = robustness_sweep(f.model, f.test, rates, 10, 1);
  ASSERT_EQ(r.rates.size(), 1U);
  for (double a : r.rates[0].trial_acc) EXPECT_EQ(a, r.acc_clean);
  EXPECT_EQ(r.rates[0].mean_loss, 0.0);
  EXPECT_EQ(r.rates[0].sd_acc, 0.0);
}

TEST(Sweep, DefaultRates) {
  EXPECT_EQ(default_flip_rates(), (std::vector<double>{0.01, 0.02, 0.04, 0.06, 0.10, 0.12}));
}

TEST(Sweep, StatisticsAndDeterminism) {
  const auto f = small_benchmark();
  const auto a = robustness_sweep(f.model, f.test, default_flip_rates(), 10, 8);
  const auto b = robustness_sweep(f.model, f.test, default_flip_rates(), 10, 8);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.trials, 10U);
  for (const auto& r : a.rates) {
    ASSERT_EQ(r.trial_acc.size(), 10U);
    double mean = 0;
    for (double x : r.trial_acc) mean += x / 10.0;
    double ss = 0;
    for (double x : r.trial_acc) ss += (x - mean) * (x - mean);
    EXPECT_NEAR(r.mean_acc, mean, 1e-12);
    EXPECT_NEAR(r.sd_acc, std::sqrt(ss / 9.0), 1e-12);
    EXPECT_NEAR(r.mean_loss, a.acc_clean - r.mean_acc, 1e-12);
    EXPECT_GE(r.mean_acc, 0.0);
    EXPECT_LE(r.mean_acc, 1.0);
  }
  EXPECT_EQ(a.to_csv().substr(0, a.to_csv().find('\n')), "rate,mean_acc,sd_acc,mean_loss");
}

TEST(Sweep, GracefulDegradation) {
  const auto f = small_benchmark(4096);
  const auto r = robustness_sweep(f.model, f.test, default_flip_rates(), 10, 2);
  for (const auto& rate : r.rates) EXPECT_LT(rate.mean_loss, 0.10) << rate.rate;
}

TEST(Sweep, NeedsTrials) {
  const auto f = small_benchmark();
  const std::vector<double> rates{0.1};
  EXPECT_HD_ERROR(ErrorKind::kInvalidArgument, robustness_sweep(f.model, f.test, rates, 0, 1));
}
