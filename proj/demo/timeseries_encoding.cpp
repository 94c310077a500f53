// Encodes a sine and a phase-shifted sine as level n-grams and bundles each into a profile.
// A third, noisy copy of the first signal is classified by nearest profile.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "hdwear/codebook.hpp"
#include "hdwear/encoding.hpp"
#include "hdwear/rng.hpp"

namespace {

std::vector<double> wave(double freq, double noise, hdwear::rng::Stream& rs) {
  std::vector<double> out(400);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / 50.0) + noise * rs.normal();
  }
  return out;
}

hdwear::AccumHV profile(const hdwear::TimeseriesEncoding& enc, std::size_t dim) {
  hdwear::AccumHV acc(dim);
  for (const auto& w : enc.windows) hdwear::bundle_into(acc, w, 1.0f);
  return acc;
}

}  // namespace

int main() {
  using namespace hdwear;
  NGramConfig cfg;
  cfg.n = 3;
  cfg.dim = 4096;
  cfg.q_levels = 16;
  const auto lm = make_level_memory(11, cfg.dim, cfg.q_levels);
  rng::Stream rs(3, 0);

  const auto slow = profile(encode_timeseries(wave(1.0, 0.0, rs), cfg, lm), cfg.dim);
  const auto fast = profile(encode_timeseries(wave(3.0, 0.0, rs), cfg, lm), cfg.dim);
  const auto probe = profile(encode_timeseries(wave(1.0, 0.05, rs), cfg, lm), cfg.dim);

  const double s = cosine(probe, slow);
  const double f = cosine(probe, fast);
  std::printf("similarity to 1 Hz profile %.3f, to 3 Hz profile %.3f -> %s\n", s, f, s > f ? "1 Hz" : "3 Hz");
}
