#include "modkalm/lpc.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"

using modkalm::LpcModel;
using modkalm::ModFrameConfig;

namespace {

// x[n] = -sum b_i x[n-i] + e[n], e ~ N(0, innovation_var); burn-in discarded.
std::vector<double> ArProcess(const std::vector<double>& b, double innovation_var,
                              std::size_t n, unsigned seed, double offset = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(innovation_var));
  const std::size_t burn = 500;
  std::vector<double> x(n + burn, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double v = noise(rng);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (t > i) v -= b[i] * x[t - i - 1];
    }
    x[t] = v;
  }
  std::vector<double> out(x.begin() + burn, x.end());
  for (auto& v : out) v += offset;
  return out;
}

}  // namespace

TEST_CASE("autocorrelation of a constant and of an impulse") {
  const std::vector<double> c(10, 2.0);
  const auto r = modkalm::Autocorrelation(c, 3);
  for (int l = 0; l <= 3; ++l) CHECK(r[l] == doctest::Approx((10.0 - l) / 10.0 * 4.0));

  const std::vector<double> impulse{1.0, 0.0, 0.0, 0.0};
  const auto ri = modkalm::Autocorrelation(impulse, 3);
  CHECK(ri[0] == 0.25);
  CHECK(ri[1] == 0.0);
  CHECK(ri[2] == 0.0);
  CHECK(ri[3] == 0.0);
  CHECK_THROWS_AS(modkalm::Autocorrelation(impulse, 4), std::invalid_argument);
}

TEST_CASE("autocorrelation of an AR(1) sequence has lag-1 ratio near 0.9") {
  const auto x = ArProcess({-0.9}, 1.0, 10000, 11);
  const auto r = modkalm::Autocorrelation(x, 1);
  CHECK(std::abs(r[1] / r[0] - 0.9) <= 0.02);
}

TEST_CASE("Levinson on white and AR(1) autocorrelations") {
  const std::vector<double> white{1.0, 0.0, 0.0, 0.0};
  const auto m = modkalm::Levinson(white, 3);
  REQUIRE(m.order() == 3);
  for (double b : m.coeffs) CHECK(std::abs(b) <= 1e-15);
  CHECK(m.residual_var == doctest::Approx(1.0));

  // Closed-form AR(1) autocovariance for x[n] = 0.5 x[n-1] + e, unit innovation.
  const std::vector<double> ar1{1.0 / 0.75, 0.5 / 0.75};
  const auto m1 = modkalm::Levinson(ar1, 1);
  CHECK(m1.coeffs[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(m1.residual_var == doctest::Approx(1.0).epsilon(1e-14));

  const auto m0 = modkalm::Levinson(ar1, 0);
  CHECK(m0.coeffs.empty());
  CHECK(m0.residual_var == ar1[0]);
}

TEST_CASE("Levinson errors and order reduction") {
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(modkalm::Levinson(zero, 1), std::invalid_argument);
  const std::vector<double> too_short{1.0, 0.5};
  CHECK_THROWS_AS(modkalm::Levinson(too_short, 2), std::invalid_argument);
  // |r1| > r0 is not an autocorrelation: the recursion stops at order 0.
  const std::vector<double> invalid{1.0, 1.5, 0.2};
  const auto m = modkalm::Levinson(invalid, 2);
  CHECK(m.order() == 2);
  CHECK(m.coeffs[0] == 0.0);
  CHECK(m.coeffs[1] == 0.0);
  CHECK(m.residual_var == 1.0);
}

TEST_CASE("Levinson residual is non-increasing in order and the filter is stable") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> seq(40);
    for (auto& v : seq) v = g(rng);
    const auto r = modkalm::Autocorrelation(seq, 6);
    double prev = std::numeric_limits<double>::infinity();
    for (int order = 0; order <= 6; ++order) {
      const auto m = modkalm::Levinson(r, order);
      CHECK(m.residual_var >= 0.0);
      CHECK(m.residual_var <= prev * (1.0 + 1e-12));
      prev = m.residual_var;
    }
    // Minimum phase: step-down recursion recovers reflection coefficients < 1.
    auto a = modkalm::Levinson(r, 6).coeffs;
    for (int i = static_cast<int>(a.size()); i >= 1; --i) {
      const double k = a[i - 1];
      CHECK(std::abs(k) < 1.0);
      std::vector<double> lower(static_cast<std::size_t>(i - 1));
      for (int j = 1; j < i; ++j) lower[j - 1] = (a[j - 1] - k * a[i - j - 1]) / (1 - k * k);
      a = lower;
    }
  }
}

TEST_CASE("speech track of a constant amplitude predicts the constant") {
  const std::vector<double> c(40, 3.5);
  const auto track = modkalm::SpeechLpcTrack(c, ModFrameConfig::SpeechDefault(), 3);
  CHECK(track.size() == 33);
  for (const auto& m : track) {
    const std::vector<double> hist(3, 3.5);
    CHECK(std::abs(m.Predict(hist) - 3.5) <= 1e-6 * 3.5);
  }
  CHECK(track.front().first_frame == 0);
  CHECK(track.front().last_frame == 7);
  CHECK(track.back().last_frame == 39);
}

TEST_CASE("speech track recovers AR(2) coefficients over 64-frame windows") {
  const std::vector<double> truth{-2.0 * 0.9 * std::cos(0.3), 0.81};
  const auto x = ArProcess(truth, 1.0, 64 * 40, 21);
  const ModFrameConfig cfg{64, 64, modkalm::WindowKind::kHamming};
  const auto track = modkalm::SpeechLpcTrack(x, cfg, 2);
  REQUIRE(track.size() == 40);
  double mean0 = 0.0, mean1 = 0.0;
  for (const auto& m : track) {
    mean0 += m.coeffs[0] / track.size();
    mean1 += m.coeffs[1] / track.size();
  }
  CHECK(std::abs(mean0 - truth[0]) <= 0.1);
  CHECK(std::abs(mean1 - truth[1]) <= 0.1);
}

TEST_CASE("speech track of silence is degenerate") {
  const std::vector<double> zeros(20, 0.0);
  const auto track = modkalm::SpeechLpcTrack(zeros, ModFrameConfig::SpeechDefault(), 3);
  for (const auto& m : track) {
    CHECK(m.degenerate);
    CHECK(m.residual_var == 0.0);
    CHECK(m.order() == 3);
    for (double b : m.coeffs) CHECK(b == 0.0);
  }
  const std::vector<double> short_track(5, 1.0);
  CHECK_THROWS_AS(modkalm::SpeechLpcTrack(short_track, ModFrameConfig::SpeechDefault(), 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(modkalm::SpeechLpcTrack(zeros, ModFrameConfig::SpeechDefault(), 8),
                  std::invalid_argument);
}

namespace {

std::vector<double> RayleighAmplitudes(std::size_t n, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> a(n);
  for (auto& v : a) v = scale * std::hypot(g(rng), g(rng));
  return a;
}

}  // namespace

TEST_CASE("noise track on stationary noise settles") {
  const auto a = RayleighAmplitudes(2000, 8);
  const std::vector<std::uint8_t> vad(a.size(), 1);
  const auto track = modkalm::NoiseLpcTrack(a, vad, ModFrameConfig::NoiseDefault(), 4);
  REQUIRE(track.size() == 1 + (2000 - 8) / 2 + 1);
  CHECK(track.front().last_frame == -1);
  // With smoothing 0.9 each update moves the average by a tenth of a
  // Rayleigh-distributed innovation, so the per-update change is a few
  // percent rather than vanishing.
  double change = 0.0, first = 0.0, second = 0.0;
  const std::size_t start = 51, mid = (start + track.size()) / 2;
  for (std::size_t j = start; j < track.size(); ++j) {
    const double prev = track[j - 1].residual_var;
    change += std::abs(track[j].residual_var - prev) / prev;
    (j < mid ? first : second) += track[j].residual_var;
  }
  change /= static_cast<double>(track.size() - start);
  first /= static_cast<double>(mid - start);
  second /= static_cast<double>(track.size() - mid);
  MESSAGE("mean relative change per update " << change);
  CHECK(change < 0.1);
  CHECK(second == doctest::Approx(first).epsilon(0.25));
}

TEST_CASE("noise track without noise-only frames keeps the initial flat model") {
  const auto a = RayleighAmplitudes(100, 9);
  const std::vector<std::uint8_t> vad(a.size(), 0);
  const auto track = modkalm::NoiseLpcTrack(a, vad, ModFrameConfig::NoiseDefault(), 4);
  double ms = 0.0;
  for (int t = 0; t < 6; ++t) ms += a[t] * a[t] / 6.0;
  for (const auto& m : track) {
    for (double b : m.coeffs) CHECK(std::abs(b) <= 1e-12);
    CHECK(m.residual_var == doctest::Approx(ms).epsilon(1e-8));
  }
  const std::vector<std::uint8_t> wrong(10, 1);
  CHECK_THROWS_AS(modkalm::NoiseLpcTrack(a, wrong, ModFrameConfig::NoiseDefault(), 4),
                  std::invalid_argument);
}

TEST_CASE("noise track coefficients are scale invariant") {
  const auto a = RayleighAmplitudes(200, 10);
  std::vector<double> scaled(a);
  for (auto& v : scaled) v *= 7.0;
  const std::vector<std::uint8_t> vad(a.size(), 1);
  const auto t1 = modkalm::NoiseLpcTrack(a, vad, ModFrameConfig::NoiseDefault(), 4);
  const auto t2 = modkalm::NoiseLpcTrack(scaled, vad, ModFrameConfig::NoiseDefault(), 4);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t j = 0; j < t1.size(); ++j) {
    for (int i = 0; i < 4; ++i) CHECK(t2[j].coeffs[i] == doctest::Approx(t1[j].coeffs[i]));
    CHECK(t2[j].residual_var == doctest::Approx(49.0 * t1[j].residual_var));
  }
}

TEST_CASE("4 Hz modulated noise is better predicted at order 4 than order 1") {
  // 8 ms frames: a 4 Hz envelope has a 31.25-frame period.
  auto a = RayleighAmplitudes(1500, 12, 0.05);
  for (std::size_t n = 0; n < a.size(); ++n) {
    a[n] += 1.0 + 0.8 * std::sin(2.0 * std::numbers::pi * 4.0 * n * 0.008);
  }
  const std::vector<std::uint8_t> vad(a.size(), 1);
  auto gain = [&](int order) {
    const auto track = modkalm::NoiseLpcTrack(a, vad, ModFrameConfig::NoiseDefault(), order);
    const auto pred = modkalm::PredictTrajectory(a, track);
    modkalm::RealGrid clean(a.size(), 1), predicted(a.size(), 1);
    // Score after the recursive average has warmed up.
    for (std::size_t n = 200; n < a.size(); ++n) {
      clean(n, 0) = a[n];
      predicted(n, 0) = pred[n];
    }
    return modkalm::PredictionGain(clean, predicted)[0];
  };
  const double g1 = gain(1);
  const double g4 = gain(4);
  MESSAGE("order-1 gain " << g1 << " dB, order-4 gain " << g4 << " dB");
  CHECK(g4 > g1);
}

TEST_CASE("ModelForFrame picks the latest model ending at or before a frame") {
  std::vector<LpcModel> track(3);
  track[0].last_frame = -1;
  track[1].last_frame = 7;
  track[2].last_frame = 9;
  CHECK(&modkalm::ModelForFrame(track, 0) == &track[0]);
  CHECK(&modkalm::ModelForFrame(track, 7) == &track[1]);
  CHECK(&modkalm::ModelForFrame(track, 7, true) == &track[0]);
  CHECK(&modkalm::ModelForFrame(track, 8) == &track[1]);
  CHECK(&modkalm::ModelForFrame(track, 100) == &track[2]);
  std::vector<LpcModel> late(1);
  late[0].last_frame = 7;
  CHECK(&modkalm::ModelForFrame(late, 2) == &late[0]);
}

TEST_CASE("prediction gain sentinels and reference values") {
  modkalm::RealGrid clean(100, 2, 1.0);
  for (std::size_t n = 0; n < 100; ++n) clean(n, 1) = std::sin(0.1 * n);
  CHECK(std::isinf(modkalm::PredictionGain(clean, clean)[0]));
  const modkalm::RealGrid zero(100, 2, 0.0);
  for (double g : modkalm::PredictionGain(clean, zero)) CHECK(g == doctest::Approx(0.0));
  CHECK_THROWS_AS(modkalm::PredictionGain(clean, modkalm::RealGrid(10, 2)),
                  std::invalid_argument);

  // Error power one hundredth of the signal power.
  const std::size_t n = 200000;
  modkalm::RealGrid s(n, 1), p(n, 1);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  for (std::size_t t = 0; t < n; ++t) {
    s(t, 0) = 5.0 + g(rng);
    p(t, 0) = s(t, 0) + std::sqrt(26.0 / 100.0) * g(rng);
  }
  CHECK(modkalm::PredictionGain(s, p)[0] == doctest::Approx(20.0).epsilon(0.1 / 20.0));
}
