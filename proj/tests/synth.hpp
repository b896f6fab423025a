#ifndef MODKALM_TESTS_SYNTH_HPP_
#define MODKALM_TESTS_SYNTH_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace modkalm::testing {

struct SynthOptions {
  double sample_rate = 16000.0;
  double seconds = 3.0;
  double f0 = 120.0;           // mean fundamental, Hz
  double max_harmonic_hz = 4000.0;
  double frame_rate = 125.0;   // rate of the AR envelope samples, Hz
  double mod_hz = 4.0;         // resonance of the AR(2) envelope
  double mod_depth = 0.4;
  double level = 0.1;          // rms of the voiced segments
};

// Speech-like test signal: voiced segments of 150..350 ms separated by
// 60..200 ms pauses, each segment a harmonic series with a 1/h tilt whose
// per-harmonic amplitudes follow a resonant AR(2) process (log domain) and
// whose fundamental drifts slowly.
std::vector<double> SyntheticSpeech(std::uint64_t seed, const SynthOptions& options = {});

std::vector<double> WhiteNoise(std::size_t length, double rms, std::uint64_t seed);

}  // namespace modkalm::testing

#endif  // MODKALM_TESTS_SYNTH_HPP_
