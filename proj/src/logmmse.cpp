#include "modkalm/logmmse.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "modkalm/specfun.hpp"

namespace modkalm {

NoiseTrack TrackNoise(const ComplexSpectrogram& noisy, const NoiseTrackerOptions& options) {
  const std::size_t frames = noisy.frames();
  const std::size_t bins = noisy.bins();
  NoiseTrack out;
  out.psd = RealGrid(frames, bins);
  out.noise_only.assign(frames, 0);
  if (frames == 0 || bins == 0) return out;

  RealGrid power(frames, bins);
  double mean_power = 0.0;
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t k = 0; k < bins; ++k) {
      power(n, k) = std::norm(noisy.values(n, k));
      mean_power += power(n, k);
    }
  }
  mean_power /= static_cast<double>(frames * bins);
  out.floor = std::max(options.relative_floor * mean_power, kAbsoluteNoiseFloor);

  const double frame_seconds = noisy.config.frame_inc / noisy.config.sample_rate;
  const auto span = static_cast<std::size_t>(
      std::max(1.0, std::round(options.window_seconds / frame_seconds)));
  const std::size_t init = std::min<std::size_t>(std::max(options.init_frames, 1), frames);

  for (std::size_t k = 0; k < bins; ++k) {
    double smoothed = 0.0;
    for (std::size_t n = 0; n < init; ++n) smoothed += power(n, k);
    smoothed /= static_cast<double>(init);
    // Monotonic deque of (frame, value) holding candidates for the minimum.
    std::deque<std::pair<std::size_t, double>> window;
    double estimate = std::max(options.bias * smoothed, out.floor);
    for (std::size_t n = 0; n < frames; ++n) {
      const double excess = std::max(smoothed / estimate - 1.0, 0.0) / options.smoothing_spread;
      const double alpha =
          std::max(options.smoothing / (1.0 + excess * excess), options.min_smoothing);
      smoothed = alpha * smoothed + (1.0 - alpha) * power(n, k);
      while (!window.empty() && window.back().second >= smoothed) window.pop_back();
      window.emplace_back(n, smoothed);
      while (window.front().first + span <= n) window.pop_front();
      estimate = std::max(options.bias * window.front().second, out.floor);
      out.psd(n, k) = estimate;
    }
  }

  const double threshold = std::pow(10.0, options.vad_snr_db / 10.0);
  for (std::size_t n = 0; n < frames; ++n) {
    std::size_t quiet = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      if (power(n, k) < threshold * out.psd(n, k)) ++quiet;
    }
    out.noise_only[n] = quiet >= options.vad_fraction * static_cast<double>(bins) ? 1 : 0;
  }
  return out;
}

double LogMmseGain(double prior_snr, double posterior_snr) {
  const double v = prior_snr * posterior_snr / (1.0 + prior_snr);
  if (!(v > 0.0)) {
    // xi -> 0 at fixed gamma sends the gain to 0; gamma -> 0 at fixed xi to infinity.
    return prior_snr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return prior_snr / (1.0 + prior_snr) * std::exp(0.5 * specfun::ExpIntegralE1(v));
}

RealGrid LogMmseEnhance(const ComplexSpectrogram& noisy, const NoiseTrack& noise,
                        const LogMmseOptions& options) {
  if (noise.frames() != noisy.frames() || noise.bins() != noisy.bins()) {
    throw std::invalid_argument("LogMmseEnhance: noise track shape mismatch");
  }
  const std::size_t frames = noisy.frames();
  const std::size_t bins = noisy.bins();
  RealGrid out(frames, bins);
  const double a = options.dd_smoothing;
  for (std::size_t k = 0; k < bins; ++k) {
    double previous = 0.0;  // squared estimate of frame n-1
    for (std::size_t n = 0; n < frames; ++n) {
      const double nu2 = noise.psd(n, k);
      const double amp = std::abs(noisy.values(n, k));
      const double gamma = amp * amp / nu2;
      const double prior = std::max(
          a * previous / nu2 + (1.0 - a) * std::max(gamma - 1.0, 0.0), options.min_prior_snr);
      const double gain = std::clamp(LogMmseGain(prior, gamma), options.gain_floor, 1.0);
      out(n, k) = gain * amp;
      previous = out(n, k) * out(n, k);
    }
  }
  return out;
}

}  // namespace modkalm
