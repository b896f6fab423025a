#include "modkalm/stft.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "modkalm/fft.hpp"

namespace modkalm {

std::vector<double> MakeWindow(WindowKind kind, int length) {
  if (length <= 0) throw std::invalid_argument("MakeWindow: length must be positive");
  std::vector<double> w(static_cast<std::size_t>(length), 1.0);
  const double step = 2.0 * std::numbers::pi / length;
  for (int n = 0; n < length; ++n) {
    switch (kind) {
      case WindowKind::kHamming:
        w[n] = 0.54 - 0.46 * std::cos(step * n);
        break;
      case WindowKind::kHann:
        w[n] = 0.5 - 0.5 * std::cos(step * n);
        break;
      case WindowKind::kRectangular:
        break;
    }
  }
  return w;
}

FrameConfig FrameConfig::FromMilliseconds(double sample_rate, double frame_ms,
                                          double inc_ms, WindowKind window) {
  FrameConfig c;
  c.sample_rate = sample_rate;
  c.frame_len = static_cast<int>(std::lround(sample_rate * frame_ms / 1000.0));
  c.frame_inc = static_cast<int>(std::lround(sample_rate * inc_ms / 1000.0));
  c.window = window;
  c.Validate();
  return c;
}

std::size_t FrameConfig::FrameCount(std::size_t length) const {
  if (length == 0) return 0;
  return (length - 1 + static_cast<std::size_t>(lead_pad())) /
             static_cast<std::size_t>(frame_inc) +
         1;
}

void FrameConfig::Validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("FrameConfig: sample rate must be positive");
  }
  if (frame_len <= 0) throw std::invalid_argument("FrameConfig: frame_len must be > 0");
  if (frame_inc <= 0 || frame_inc > frame_len) {
    throw std::invalid_argument("FrameConfig: need 0 < frame_inc <= frame_len");
  }
}

RealGrid ComplexSpectrogram::Amplitudes() const {
  RealGrid out(frames(), bins());
  auto src = values.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::abs(src[i]);
  return out;
}

RealGrid ComplexSpectrogram::Phases() const {
  RealGrid out(frames(), bins());
  auto src = values.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    // std::arg gives [-pi, pi]; fold -pi onto pi.
    const double p = std::arg(src[i]);
    dst[i] = p == -std::numbers::pi ? std::numbers::pi : p;
  }
  return out;
}

ComplexSpectrogram Analyze(std::span<const double> signal, const FrameConfig& config) {
  config.Validate();
  if (signal.size() < static_cast<std::size_t>(config.frame_len)) {
    throw std::invalid_argument("Analyze: signal shorter than one frame (" +
                                std::to_string(signal.size()) + " < " +
                                std::to_string(config.frame_len) + " samples)");
  }
  const int len = config.frame_len;
  const std::size_t frames = config.FrameCount(signal.size());
  const auto window = MakeWindow(config.window, len);
  RealFft fft(len);

  ComplexSpectrogram spec;
  spec.config = config;
  spec.signal_length = signal.size();
  spec.values = ComplexGrid(frames, static_cast<std::size_t>(config.bins()));

  std::vector<double> frame(static_cast<std::size_t>(len));
  const long long pad = config.lead_pad();
  const auto total = static_cast<long long>(signal.size());
  for (std::size_t n = 0; n < frames; ++n) {
    const long long start = static_cast<long long>(n) * config.frame_inc - pad;
    for (int t = 0; t < len; ++t) {
      const long long idx = start + t;
      frame[t] = (idx >= 0 && idx < total) ? signal[idx] * window[t] : 0.0;
    }
    fft.Forward(frame, spec.values.row(n));
  }
  return spec;
}

std::vector<double> Synthesize(const ComplexGrid& values, const FrameConfig& config,
                               std::size_t length) {
  config.Validate();
  if (values.cols() != static_cast<std::size_t>(config.bins())) {
    throw std::invalid_argument("Synthesize: bin count does not match frame length");
  }
  if (values.rows() != config.FrameCount(length)) {
    throw std::invalid_argument("Synthesize: frame count does not match output length");
  }
  const int len = config.frame_len;
  const auto window = MakeWindow(config.window, len);
  RealFft fft(len);

  const long long pad = config.lead_pad();
  const auto total = static_cast<long long>(length);
  std::vector<double> out(length, 0.0);
  std::vector<double> norm(length, 0.0);
  std::vector<double> frame(static_cast<std::size_t>(len));
  for (std::size_t n = 0; n < values.rows(); ++n) {
    fft.Inverse(values.row(n), frame);
    const long long start = static_cast<long long>(n) * config.frame_inc - pad;
    for (int t = 0; t < len; ++t) {
      const long long idx = start + t;
      if (idx < 0 || idx >= total) continue;
      out[idx] += frame[t] * window[t];
      norm[idx] += window[t] * window[t];
    }
  }
  for (std::size_t i = 0; i < length; ++i) {
    if (norm[i] > 0.0) out[i] /= norm[i];
  }
  return out;
}

std::vector<double> Synthesize(const RealGrid& amplitudes, const RealGrid& phases,
                               const FrameConfig& config, std::size_t length) {
  if (!amplitudes.same_shape(phases)) {
    throw std::invalid_argument("Synthesize: amplitude and phase grids differ in shape");
  }
  ComplexGrid values(amplitudes.rows(), amplitudes.cols());
  auto a = amplitudes.data();
  auto p = phases.data();
  auto v = values.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(a[i], p[i]);
  return Synthesize(values, config, length);
}

}  // namespace modkalm
