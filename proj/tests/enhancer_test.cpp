#include "modkalm/enhancer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "modkalm/logmmse.hpp"
#include "modkalm/metrics.hpp"
#include "modkalm/stft.hpp"
#include "synth.hpp"

using modkalm::EnhancerConfig;
using modkalm::EnhancerMode;
namespace mt = modkalm::testing;

namespace {

constexpr double kRate = 16000.0;

std::vector<double> Noisy(std::uint64_t seed, double snr_db, double seconds = 2.0) {
  const auto clean = mt::SyntheticSpeech(seed, {.seconds = seconds});
  const auto noise = mt::WhiteNoise(clean.size(), 1.0, seed + 1000);
  return modkalm::MixAtGlobalSnr(clean, noise, snr_db).samples;
}

bool AllFinite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TEST_CASE("mode names round trip and parsing is case-insensitive") {
  for (auto m : {EnhancerMode::kMdkm, EnhancerMode::kMdkr, EnhancerMode::kLogMmse}) {
    CHECK(modkalm::ParseMode(modkalm::ModeName(m)) == m);
  }
  CHECK(modkalm::ParseMode("MDKR") == EnhancerMode::kMdkr);
  CHECK(modkalm::ParseMode("LogMMSE") == EnhancerMode::kLogMmse);
  CHECK_FALSE(modkalm::ParseMode("bogus").has_value());
}

TEST_CASE("configuration guards") {
  CHECK(EnhancerConfig::ForMode(EnhancerMode::kMdkm).noise_order == 0);
  CHECK(EnhancerConfig::ForMode(EnhancerMode::kMdkr).noise_order == 4);
  auto cfg = EnhancerConfig::ForMode(EnhancerMode::kMdkm);
  cfg.noise_order = 4;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = EnhancerConfig::ForMode(EnhancerMode::kMdkr);
  cfg.workers = 0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);

  const auto x = Noisy(1, 0.0, 1.0);
  CHECK_THROWS_AS(modkalm::Enhance({}, kRate, {}), std::invalid_argument);
  CHECK_THROWS_AS(modkalm::Enhance(x, 8000.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(modkalm::Enhance(std::vector<double>(300, 0.1), kRate, {}),
                  std::invalid_argument);
}

TEST_CASE("logMMSE mode reproduces the pre-cleaner") {
  const auto x = Noisy(2, 5.0, 1.0);
  const auto cfg = EnhancerConfig::ForMode(EnhancerMode::kLogMmse);
  const auto result = modkalm::Enhance(x, kRate, cfg);

  const auto spec = modkalm::Analyze(x, cfg.frame);
  const auto noise = modkalm::TrackNoise(spec, cfg.tracker);
  const auto amps = modkalm::LogMmseEnhance(spec, noise, cfg.logmmse);
  const auto ref = modkalm::Synthesize(amps, spec.Phases(), cfg.frame, x.size());
  REQUIRE(result.samples.size() == ref.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    worst = std::max(worst, std::abs(result.samples[i] - ref[i]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("output length matches and is finite in every mode") {
  const auto x = Noisy(3, 0.0, 1.0);
  for (auto m : {EnhancerMode::kMdkm, EnhancerMode::kMdkr, EnhancerMode::kLogMmse}) {
    const auto r = modkalm::Enhance(x, kRate, EnhancerConfig::ForMode(m));
    CHECK(r.samples.size() == x.size());
    CHECK(AllFinite(r.samples));
    CHECK(r.counters.faults == 0);
    CHECK(r.amplitudes.rows() > 0);
  }
}

TEST_CASE("an all-zero input stays silent") {
  const std::vector<double> zeros(8000, 0.0);
  for (auto m : {EnhancerMode::kMdkm, EnhancerMode::kMdkr, EnhancerMode::kLogMmse}) {
    const auto r = modkalm::Enhance(zeros, kRate, EnhancerConfig::ForMode(m));
    REQUIRE(AllFinite(r.samples));
    double peak = 0.0;
    for (double v : r.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak <= 1e-12);
  }
}

TEST_CASE("clean input passes through almost untouched") {
  const auto clean = mt::SyntheticSpeech(4, {.seconds = 2.0});
  for (auto m : {EnhancerMode::kMdkm, EnhancerMode::kMdkr}) {
    const auto r = modkalm::Enhance(clean, kRate, EnhancerConfig::ForMode(m));
    CHECK_MESSAGE(modkalm::SegSnr(clean, r.samples).mean >= 30.0, modkalm::ModeName(m));
  }
}

TEST_CASE("Kalman modes improve segSNR at 0 dB") {
  const auto clean = mt::SyntheticSpeech(5, {.seconds = 2.0});
  const auto noise = mt::WhiteNoise(clean.size(), 1.0, 1005);
  const auto noisy = modkalm::MixAtGlobalSnr(clean, noise, 0.0).samples;
  const double base = modkalm::SegSnr(clean, noisy).mean;
  for (auto m : {EnhancerMode::kMdkm, EnhancerMode::kMdkr}) {
    const auto r = modkalm::Enhance(noisy, kRate, EnhancerConfig::ForMode(m));
    CHECK_MESSAGE(modkalm::SegSnr(clean, r.samples).mean - base >= 2.0, modkalm::ModeName(m));
  }
}

TEST_CASE("worker count does not change the result") {
  const auto x = Noisy(6, 0.0, 1.0);
  for (auto m : {EnhancerMode::kMdkm, EnhancerMode::kMdkr}) {
    auto cfg = EnhancerConfig::ForMode(m);
    const auto one = modkalm::Enhance(x, kRate, cfg);
    cfg.workers = 4;
    const auto four = modkalm::Enhance(x, kRate, cfg);
    CHECK(one.samples == four.samples);
    CHECK(one.counters.kalman.regularizations == four.counters.kalman.regularizations);
  }
}

TEST_CASE("ring sizes are reported for MDKR only") {
  const auto x = Noisy(7, 0.0, 1.0);
  const auto mdkm = modkalm::Enhance(x, kRate, EnhancerConfig::ForMode(EnhancerMode::kMdkm));
  CHECK(mdkm.speech_components.empty());
  const auto mdkr = modkalm::Enhance(x, kRate, EnhancerConfig::ForMode(EnhancerMode::kMdkr));
  REQUIRE(mdkr.speech_components.same_shape(mdkr.amplitudes));
  REQUIRE(mdkr.noise_components.same_shape(mdkr.amplitudes));
  for (int g : mdkr.speech_components.data()) CHECK((g >= 1 && g <= 64));
  for (int g : mdkr.noise_components.data()) CHECK((g >= 1 && g <= 64));
}

TEST_CASE("pure white noise gives mostly single-component speech rings") {
  const auto x = mt::WhiteNoise(16000, 0.1, 8);
  const auto d = modkalm::Diagnose(x, kRate, EnhancerConfig::ForMode(EnhancerMode::kMdkr));
  const auto& g = d.result.speech_components.data();
  const auto ones = std::count(g.begin(), g.end(), 1);
  CHECK(static_cast<double>(ones) / g.size() >= 0.5);
  CHECK(d.speech_prediction_gain.size() == d.result.amplitudes.cols());
  CHECK(d.noise_prediction_gain.size() == d.result.amplitudes.cols());
}
