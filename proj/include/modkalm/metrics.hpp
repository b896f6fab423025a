#ifndef MODKALM_METRICS_HPP_
#define MODKALM_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace modkalm {

struct SegSnrOptions {
  int frame_len = 512;
  int frame_inc = 128;
  double min_db = -10.0;
  double max_db = 35.0;
  // Frames with energy at or below this fraction of the mean frame energy
  // are skipped.
  double silence_fraction = 1e-6;
};

struct SegSnrReport {
  std::vector<double> per_frame;  // clamped dB of each frame used
  std::vector<std::size_t> frame_index;  // index of each used frame
  double mean = 0.0;
  std::size_t frames_used = 0;
  bool length_adjusted = false;  // test was trimmed or zero-padded to match
};

// Mean of clamped 10 log10(sum clean^2 / sum (clean - test)^2) over
// non-silent frames. Throws std::invalid_argument when the reference is
// empty or silent everywhere.
SegSnrReport SegSnr(std::span<const double> clean, std::span<const double> test,
                    const SegSnrOptions& options = {});

// 10 log10(sum clean^2 / sum (noisy - clean)^2) over the whole signal.
double GlobalSnrDb(std::span<const double> clean, std::span<const double> noisy);

struct Mixture {
  std::vector<double> samples;
  double noise_gain = 0.0;
  bool tiled = false;  // the noise was shorter than the clean signal
};

// clean + gain * noise with the gain set by the total-energy ratio, starting
// at `offset` into the noise and wrapping around it as needed. Throws
// std::invalid_argument for empty or silent inputs.
Mixture MixAtGlobalSnr(std::span<const double> clean, std::span<const double> noise,
                       double snr_db, std::size_t offset = 0);

}  // namespace modkalm

#endif  // MODKALM_METRICS_HPP_
