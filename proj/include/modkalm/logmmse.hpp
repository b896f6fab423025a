#ifndef MODKALM_LOGMMSE_HPP_
#define MODKALM_LOGMMSE_HPP_

#include <cstdint>
#include <vector>

#include "modkalm/grid.hpp"
#include "modkalm/stft.hpp"

namespace modkalm {

struct NoiseTrackerOptions {
  double window_seconds = 1.5;   // sliding-minimum span
  double bias = 1.5;             // compensates the downward bias of the minimum
  double smoothing = 0.96;       // maximum periodogram smoothing per frame
  double min_smoothing = 0.3;    // lower bound of the adaptive smoothing
  double smoothing_spread = 4.0; // excess power ratio that halves the smoothing
  int init_frames = 6;           // frames averaged to start the smoother
  double vad_snr_db = 3.0;       // a-posteriori SNR below this counts as noise
  double vad_fraction = 0.8;     // share of bins that must be below it
  double relative_floor = 1e-10; // PSD floor relative to the mean power
};

// Smallest PSD value ever reported, used when the input is digital silence.
inline constexpr double kAbsoluteNoiseFloor = 1e-30;

struct NoiseTrack {
  RealGrid psd;                        // frames x bins noise power
  std::vector<std::uint8_t> noise_only;  // per-frame flag, 1 = noise only
  double floor = kAbsoluteNoiseFloor;

  std::size_t frames() const { return psd.rows(); }
  std::size_t bins() const { return psd.cols(); }
};

// Minimum-statistics tracker: recursively smoothed periodogram, minimum over
// a sliding window, scaled by the bias factor and floored at
// max(relative_floor * mean |Z|^2, kAbsoluteNoiseFloor). A frame is noise-only
// when |Z|^2 / psd is below the VAD threshold in at least vad_fraction of bins.
// The smoothing weight of each step is smoothing / (1 + e^2) with
// e = max(P/psd - 1, 0) / smoothing_spread, never below min_smoothing, using P
// and psd of the previous frame: near the maximum in noise, small while speech
// dominates so that the smoothed power drops back as soon as a pause starts.
// Only excess power lowers the weight; a two-sided rule also reacts to the
// downward swings of noise and biases the minimum low.
NoiseTrack TrackNoise(const ComplexSpectrogram& noisy, const NoiseTrackerOptions& options = {});

struct LogMmseOptions {
  double dd_smoothing = 0.98;          // decision-directed weight
  double min_prior_snr = 0.0031622776601683794;  // -25 dB
  double gain_floor = 0.031622776601683794;      // -30 dB
};

// Unclamped log-spectral amplitude gain xi/(1+xi) exp(E1(v)/2) with
// v = xi gamma/(1+xi). At v = 0 returns the limit: 0 for xi = 0, +infinity
// for gamma = 0 with xi > 0.
double LogMmseGain(double prior_snr, double posterior_snr);

// Noisy amplitudes times the clamped gain, with the a-priori SNR of frame n
// from the estimate at frame n-1 (decision-directed). Throws
// std::invalid_argument when the shapes differ.
RealGrid LogMmseEnhance(const ComplexSpectrogram& noisy, const NoiseTrack& noise,
                        const LogMmseOptions& options = {});

}  // namespace modkalm

#endif  // MODKALM_LOGMMSE_HPP_
