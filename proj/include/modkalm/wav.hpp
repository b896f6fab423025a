#ifndef MODKALM_WAV_HPP_
#define MODKALM_WAV_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace modkalm {

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WavData {
  std::vector<double> samples;  // in [-1, 1)
  int sample_rate = 0;
};

// Reads a 16-bit PCM mono WAV file. With `expected_rate` set, a file at a
// different rate is rejected. Throws WavError.
WavData ReadWav(const std::filesystem::path& path,
                std::optional<int> expected_rate = std::nullopt);

// Writes 16-bit PCM mono. Samples outside [-1, 1) saturate; the number of
// saturated samples is returned. Throws WavError on I/O failure.
std::size_t WriteWav(const std::filesystem::path& path, std::span<const double> samples,
                     int sample_rate);

}  // namespace modkalm

#endif  // MODKALM_WAV_HPP_
