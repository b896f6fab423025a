#ifndef MODKALM_ENHANCER_HPP_
#define MODKALM_ENHANCER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modkalm/gaussring.hpp"
#include "modkalm/grid.hpp"
#include "modkalm/kalman.hpp"
#include "modkalm/logmmse.hpp"
#include "modkalm/lpc.hpp"
#include "modkalm/stft.hpp"

namespace modkalm {

enum class EnhancerMode { kMdkm, kMdkr, kLogMmse };

std::string_view ModeName(EnhancerMode mode);
// Case-insensitive; nullopt for unknown names.
std::optional<EnhancerMode> ParseMode(std::string_view name);

struct EnhancerConfig {
  EnhancerMode mode = EnhancerMode::kMdkr;
  FrameConfig frame;  // 32 ms Hamming frames, 8 ms increment, 16 kHz
  ModFrameConfig speech_mod = ModFrameConfig::SpeechDefault();
  ModFrameConfig noise_mod = ModFrameConfig::NoiseDefault();
  int speech_order = 3;
  int noise_order = 4;  // must be 0 in MDKM mode
  RingOptions ring;
  NoiseTrackerOptions tracker;
  LogMmseOptions logmmse;
  NoiseTrackOptions noise_lpc;
  int workers = 1;

  // Defaults for `mode`: as above, with noise_order = 0 for MDKM.
  static EnhancerConfig ForMode(EnhancerMode mode);
  // Throws std::invalid_argument on inconsistent settings.
  void Validate() const;
};

// Per-run event counts.
struct EnhancerCounters {
  KalmanCounters kalman;
  std::int64_t faults = 0;           // cells that fell back to the logMMSE amplitude
  std::int64_t gamma_clamps = 0;     // Gamma shape hit a bound (MDKM)
  std::int64_t variance_clamps = 0;  // posterior variance floored (MDKM)
  std::int64_t degenerate_products = 0;  // MDKR weights underflowed
  std::int64_t posterior_projections = 0;  // MDKR posterior covariance projected
  std::int64_t capped_rings = 0;     // rings limited by RingOptions::max_components

  EnhancerCounters& operator+=(const EnhancerCounters& o);
};

struct EnhanceResult {
  std::vector<double> samples;  // same length as the input
  RealGrid amplitudes;          // enhanced frames x bins
  EnhancerCounters counters;
  // Ring sizes per cell (MDKR only; empty otherwise).
  IntGrid speech_components;
  IntGrid noise_components;
};

// Full pipeline. Throws std::invalid_argument for an empty or too short
// signal or a sample rate that differs from cfg.frame.sample_rate.
EnhanceResult Enhance(std::span<const double> samples, double sample_rate,
                      const EnhancerConfig& config);

struct Diagnostics {
  EnhanceResult result;
  NoiseTrack noise;
  // Per-bin prediction gains (dB) of the speech models on the pre-cleaned
  // amplitudes and of the noise models on the noisy amplitudes.
  std::vector<double> speech_prediction_gain;
  std::vector<double> noise_prediction_gain;
};

Diagnostics Diagnose(std::span<const double> samples, double sample_rate,
                     const EnhancerConfig& config);

}  // namespace modkalm

#endif  // MODKALM_ENHANCER_HPP_
