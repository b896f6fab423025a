#ifndef MODKALM_LPC_HPP_
#define MODKALM_LPC_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "modkalm/grid.hpp"
#include "modkalm/stft.hpp"

namespace modkalm {

// Linear predictor for an amplitude trajectory. The prediction convention is
//   x_hat[n] = -sum_{i=1..order} coeffs[i-1] * x[n-i],
// so the top row of the companion transition matrix is -coeffs.
struct LpcModel {
  std::vector<double> coeffs;
  double residual_var = 0.0;
  // Acoustic frames [first_frame, last_frame] the model was estimated from.
  // The initialization model of a noise track has last_frame = -1.
  long long first_frame = 0;
  long long last_frame = -1;
  // True when the data carried no energy and the model is all zeros.
  bool degenerate = false;

  int order() const { return static_cast<int>(coeffs.size()); }
  // One-step prediction; `history[0]` is the most recent value. Missing
  // history (shorter span than order) is treated as zero.
  double Predict(std::span<const double> history) const;
};

struct ModFrameConfig {
  int mod_frame_len = 8;  // acoustic frames; 64 ms at an 8 ms increment
  int mod_frame_inc = 1;
  WindowKind window = WindowKind::kHamming;

  static ModFrameConfig SpeechDefault() { return {8, 1, WindowKind::kHamming}; }
  static ModFrameConfig NoiseDefault() { return {8, 2, WindowKind::kHamming}; }
  void Validate() const;
};

struct NoiseTrackOptions {
  double smoothing = 0.9;   // recursive-average constant per modulation frame
  int init_frames = 6;      // acoustic frames used for the flat initial model
};

// Relative diagonal loading applied to autocorrelations before Levinson.
inline constexpr double kLpcDiagonalLoading = 1e-10;

// Biased autocorrelation r[l] = (1/N) sum_t seq[t] seq[t+l], l = 0..max_lag.
// Throws std::invalid_argument when seq.size() <= max_lag.
std::vector<double> Autocorrelation(std::span<const double> seq, int max_lag);

// Levinson-Durbin recursion. Requires r[0] > 0 (std::invalid_argument
// otherwise) and r.size() > order. If a reflection coefficient reaches
// magnitude 1 or the error stops being positive, the recursion stops and the
// remaining coefficients are zero, so the returned model always has `order`
// coefficients.
LpcModel Levinson(std::span<const double> r, int order);

// One model per modulation frame of a pre-cleaned amplitude trajectory. Each
// frame is windowed, its autocorrelation is normalized by the autocorrelation
// of the window itself, lightly loaded, and fed to Levinson.
std::vector<LpcModel> SpeechLpcTrack(std::span<const double> amplitudes,
                                     const ModFrameConfig& config, int order);

// Noise models from a recursively averaged modulation magnitude spectrum,
// updated only on modulation frames whose acoustic frames are all flagged
// noise-only (`noise_only[n] != 0`). The autocorrelation is the inverse DFT
// of the squared averaged magnitudes divided by the window energy. The first element is the initialization
// model (flat spectrum at the mean square of the first frames); then one
// model per modulation frame.
std::vector<LpcModel> NoiseLpcTrack(std::span<const double> amplitudes,
                                    std::span<const std::uint8_t> noise_only,
                                    const ModFrameConfig& config, int order,
                                    const NoiseTrackOptions& options = {});

// The latest model of `track` whose data ends at or before `frame` (or
// strictly before it when `strict`); the earliest model if none qualifies.
// `track` must be non-empty and ordered by last_frame.
const LpcModel& ModelForFrame(std::span<const LpcModel> track, long long frame,
                              bool strict = false);

// One-step predictions of `amplitudes` using, for each frame, the model
// estimated strictly before it. History before the start repeats the first
// value.
std::vector<double> PredictTrajectory(std::span<const double> amplitudes,
                                      std::span<const LpcModel> track);

// Per-bin prediction gain in dB, 10 log10(E|S|^2 / E(|S| - |S_hat|)^2) with
// expectations over frames. A zero error power yields +infinity.
std::vector<double> PredictionGain(const RealGrid& clean, const RealGrid& predicted);

}  // namespace modkalm

#endif  // MODKALM_LPC_HPP_
