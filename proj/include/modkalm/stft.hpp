#ifndef MODKALM_STFT_HPP_
#define MODKALM_STFT_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "modkalm/grid.hpp"

namespace modkalm {

enum class WindowKind { kHamming, kHann, kRectangular };

// Periodic window of the given length (w[n] for n = 0..len-1 of a period-len
// cosine taper).
std::vector<double> MakeWindow(WindowKind kind, int length);

struct FrameConfig {
  double sample_rate = 16000.0;
  int frame_len = 512;  // 32 ms
  int frame_inc = 128;  // 8 ms
  WindowKind window = WindowKind::kHamming;

  // Frame length and increment rounded to whole samples.
  static FrameConfig FromMilliseconds(double sample_rate, double frame_ms, double inc_ms,
                                      WindowKind window = WindowKind::kHamming);

  int bins() const { return frame_len / 2 + 1; }
  // Leading zero padding so that every signal sample lies under the same
  // number of frames.
  int lead_pad() const { return frame_len - frame_inc; }
  // Number of frames for a signal of `length` samples.
  std::size_t FrameCount(std::size_t length) const;

  // Throws std::invalid_argument when the configuration is unusable.
  void Validate() const;
};

struct ComplexSpectrogram {
  ComplexGrid values;  // frames x bins, one-sided
  FrameConfig config;
  std::size_t signal_length = 0;

  std::size_t frames() const { return values.rows(); }
  std::size_t bins() const { return values.cols(); }
  RealGrid Amplitudes() const;
  RealGrid Phases() const;  // in (-pi, pi]
};

// Windowed one-sided DFT of each frame. Frame n covers samples
// [n*inc - lead_pad, n*inc - lead_pad + len) of the signal, with zeros
// outside the signal. Throws std::invalid_argument for a signal shorter than
// one frame.
ComplexSpectrogram Analyze(std::span<const double> signal, const FrameConfig& config);

// Weighted overlap-add: inverse DFT of amplitude * e^{j phase}, synthesis
// window, division by the summed squared window at each sample. Returns
// `length` samples aligned with the analysed signal.
std::vector<double> Synthesize(const RealGrid& amplitudes, const RealGrid& phases,
                               const FrameConfig& config, std::size_t length);

// Same, from complex values.
std::vector<double> Synthesize(const ComplexGrid& values, const FrameConfig& config,
                               std::size_t length);

}  // namespace modkalm

#endif  // MODKALM_STFT_HPP_
