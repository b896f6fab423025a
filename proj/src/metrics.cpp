#include "modkalm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modkalm {

SegSnrReport SegSnr(std::span<const double> clean, std::span<const double> test,
                    const SegSnrOptions& options) {
  if (clean.empty()) throw std::invalid_argument("SegSnr: empty reference");
  if (options.frame_len <= 0 || options.frame_inc <= 0) {
    throw std::invalid_argument("SegSnr: invalid framing");
  }
  SegSnrReport report;
  std::vector<double> matched(test.begin(), test.begin() + std::min(test.size(), clean.size()));
  matched.resize(clean.size(), 0.0);
  report.length_adjusted = test.size() != clean.size();

  const auto len = std::min<std::size_t>(static_cast<std::size_t>(options.frame_len), clean.size());
  const auto inc = static_cast<std::size_t>(options.frame_inc);
  const std::size_t frames = (clean.size() - len) / inc + 1;
  std::vector<double> signal(frames, 0.0), error(frames, 0.0);
  double total = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = f * inc; i < f * inc + len; ++i) {
      signal[f] += clean[i] * clean[i];
      const double e = clean[i] - matched[i];
      error[f] += e * e;
    }
    total += signal[f];
  }
  const double threshold = options.silence_fraction * total / static_cast<double>(frames);
  double sum = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    if (!(signal[f] > threshold)) continue;
    // A zero error gives +inf, which the clamp maps to max_db.
    const double db = 10.0 * std::log10(signal[f] / error[f]);
    const double clamped = std::clamp(db, options.min_db, options.max_db);
    report.per_frame.push_back(clamped);
    report.frame_index.push_back(f);
    sum += clamped;
  }
  if (report.per_frame.empty()) throw std::invalid_argument("SegSnr: reference is silent");
  report.frames_used = report.per_frame.size();
  report.mean = sum / static_cast<double>(report.frames_used);
  return report;
}

double GlobalSnrDb(std::span<const double> clean, std::span<const double> noisy) {
  if (clean.size() != noisy.size()) throw std::invalid_argument("GlobalSnrDb: length mismatch");
  double s = 0.0, e = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    s += clean[i] * clean[i];
    e += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
  }
  return 10.0 * std::log10(s / e);
}

Mixture MixAtGlobalSnr(std::span<const double> clean, std::span<const double> noise,
                       double snr_db, std::size_t offset) {
  if (clean.empty() || noise.empty()) throw std::invalid_argument("MixAtGlobalSnr: empty input");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("MixAtGlobalSnr: SNR must be finite");
  Mixture mix;
  mix.tiled = noise.size() < clean.size();
  std::vector<double> aligned(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) aligned[i] = noise[(offset + i) % noise.size()];
  double s = 0.0, e = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    s += clean[i] * clean[i];
    e += aligned[i] * aligned[i];
  }
  if (!(s > 0.0) || !(e > 0.0)) throw std::invalid_argument("MixAtGlobalSnr: silent input");
  mix.noise_gain = std::sqrt(s / (e * std::pow(10.0, snr_db / 10.0)));
  mix.samples.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    mix.samples[i] = clean[i] + mix.noise_gain * aligned[i];
  }
  return mix;
}

}  // namespace modkalm
