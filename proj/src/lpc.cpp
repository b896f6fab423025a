#include "modkalm/lpc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include "modkalm/fft.hpp"

namespace modkalm {
namespace {

// sum_t w[t] w[t+l] for l = 0..max_lag.
std::vector<double> WindowLagProducts(std::span<const double> w, int max_lag) {
  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int l = 0; l <= max_lag; ++l) {
    for (std::size_t t = 0; t + l < w.size(); ++t) out[l] += w[t] * w[t + l];
  }
  return out;
}

LpcModel ZeroModel(int order) {
  LpcModel m;
  m.coeffs.assign(static_cast<std::size_t>(order), 0.0);
  m.residual_var = 0.0;
  m.degenerate = true;
  return m;
}

// Levinson on a loaded copy of r, or the zero model if r carries no energy.
LpcModel FitOrZero(std::vector<double> r, int order) {
  if (!(r[0] > 0.0) || !std::isfinite(r[0])) return ZeroModel(order);
  r[0] *= 1.0 + kLpcDiagonalLoading;
  return Levinson(r, order);
}

void CheckOrder(const ModFrameConfig& config, int order) {
  config.Validate();
  if (order < 0 || order >= config.mod_frame_len) {
    throw std::invalid_argument("LPC order must satisfy 0 <= order < mod_frame_len");
  }
}

}  // namespace

double LpcModel::Predict(std::span<const double> history) const {
  double acc = 0.0;
  const std::size_t n = std::min(history.size(), coeffs.size());
  for (std::size_t i = 0; i < n; ++i) acc -= coeffs[i] * history[i];
  return acc;
}

void ModFrameConfig::Validate() const {
  if (mod_frame_len <= 0) throw std::invalid_argument("ModFrameConfig: length must be > 0");
  if (mod_frame_inc <= 0 || mod_frame_inc > mod_frame_len) {
    throw std::invalid_argument("ModFrameConfig: need 0 < mod_frame_inc <= mod_frame_len");
  }
}

std::vector<double> Autocorrelation(std::span<const double> seq, int max_lag) {
  if (max_lag < 0 || seq.size() <= static_cast<std::size_t>(max_lag)) {
    throw std::invalid_argument("Autocorrelation: sequence too short for lag " +
                                std::to_string(max_lag));
  }
  const double inv_n = 1.0 / static_cast<double>(seq.size());
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int l = 0; l <= max_lag; ++l) {
    double acc = 0.0;
    for (std::size_t t = 0; t + l < seq.size(); ++t) acc += seq[t] * seq[t + l];
    r[l] = acc * inv_n;
  }
  return r;
}

LpcModel Levinson(std::span<const double> r, int order) {
  if (order < 0) throw std::invalid_argument("Levinson: negative order");
  if (r.size() <= static_cast<std::size_t>(order)) {
    throw std::invalid_argument("Levinson: need order + 1 autocorrelation lags");
  }
  if (!(r[0] > 0.0)) throw std::invalid_argument("Levinson: r[0] must be positive");

  LpcModel model;
  model.coeffs.assign(static_cast<std::size_t>(order), 0.0);
  std::vector<double> prev(static_cast<std::size_t>(order), 0.0);
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += model.coeffs[j - 1] * r[i - j];
    const double k = -acc / err;
    const double next_err = err * (1.0 - k * k);
    // Stop at the last stable order.
    if (!(std::abs(k) < 1.0) || !(next_err > 0.0)) break;
    prev = model.coeffs;
    for (int j = 1; j < i; ++j) model.coeffs[j - 1] = prev[j - 1] + k * prev[i - j - 1];
    model.coeffs[i - 1] = k;
    err = next_err;
  }
  model.residual_var = err;
  return model;
}

std::vector<LpcModel> SpeechLpcTrack(std::span<const double> amplitudes,
                                     const ModFrameConfig& config, int order) {
  CheckOrder(config, order);
  const auto len = static_cast<std::size_t>(config.mod_frame_len);
  if (amplitudes.size() < len) {
    throw std::invalid_argument("SpeechLpcTrack: trajectory shorter than a modulation frame");
  }
  const auto window = MakeWindow(config.window, config.mod_frame_len);
  const auto window_lags = WindowLagProducts(window, order);
  const std::size_t count = (amplitudes.size() - len) / config.mod_frame_inc + 1;

  std::vector<LpcModel> track;
  track.reserve(count);
  std::vector<double> seg(len);
  std::vector<double> r(static_cast<std::size_t>(order) + 1);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t start = j * config.mod_frame_inc;
    for (std::size_t t = 0; t < len; ++t) seg[t] = amplitudes[start + t] * window[t];
    for (int l = 0; l <= order; ++l) {
      double acc = 0.0;
      for (std::size_t t = 0; t + l < len; ++t) acc += seg[t] * seg[t + l];
      r[l] = acc / window_lags[l];
    }
    LpcModel m = FitOrZero(r, order);
    m.first_frame = static_cast<long long>(start);
    m.last_frame = static_cast<long long>(start + len - 1);
    track.push_back(std::move(m));
  }
  return track;
}

std::vector<LpcModel> NoiseLpcTrack(std::span<const double> amplitudes,
                                    std::span<const std::uint8_t> noise_only,
                                    const ModFrameConfig& config, int order,
                                    const NoiseTrackOptions& options) {
  CheckOrder(config, order);
  const auto len = static_cast<std::size_t>(config.mod_frame_len);
  if (amplitudes.size() < len) {
    throw std::invalid_argument("NoiseLpcTrack: trajectory shorter than a modulation frame");
  }
  if (noise_only.size() != amplitudes.size()) {
    throw std::invalid_argument("NoiseLpcTrack: one noise-only flag per frame required");
  }
  if (!(options.smoothing >= 0.0 && options.smoothing < 1.0) || options.init_frames <= 0) {
    throw std::invalid_argument("NoiseLpcTrack: invalid options");
  }

  const auto window = MakeWindow(config.window, config.mod_frame_len);
  const auto window_lags = WindowLagProducts(window, order);
  const int dft_len = 2 * config.mod_frame_len;
  RealFft fft(dft_len);
  const auto bins = static_cast<std::size_t>(fft.bins());

  // Linear autocorrelation of the averaged spectrum, biased (divided by the
  // window energy) so the Toeplitz system stays positive definite.
  std::vector<double> power(static_cast<std::size_t>(dft_len));
  std::vector<std::complex<double>> spectrum(bins);
  std::vector<double> r(static_cast<std::size_t>(order) + 1);
  auto model_from = [&](std::span<const double> magnitude) {
    for (std::size_t f = 0; f < bins; ++f) spectrum[f] = magnitude[f] * magnitude[f];
    fft.Inverse(spectrum, power);
    for (int l = 0; l <= order; ++l) r[l] = power[l] / window_lags[0];
    return FitOrZero(r, order);
  };

  // Flat initial spectrum whose lag-0 autocorrelation is the mean square of
  // the first frames.
  const std::size_t init = std::min<std::size_t>(options.init_frames, amplitudes.size());
  double mean_square = 0.0;
  for (std::size_t t = 0; t < init; ++t) mean_square += amplitudes[t] * amplitudes[t];
  mean_square /= static_cast<double>(init);
  std::vector<double> average(bins, std::sqrt(mean_square * window_lags[0]));

  const std::size_t count = (amplitudes.size() - len) / config.mod_frame_inc + 1;
  std::vector<LpcModel> track;
  track.reserve(count + 1);
  LpcModel current = model_from(average);
  current.first_frame = 0;
  current.last_frame = -1;
  track.push_back(current);

  std::vector<double> seg(static_cast<std::size_t>(dft_len), 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t start = j * config.mod_frame_inc;
    const bool all_noise = std::all_of(noise_only.begin() + start,
                                       noise_only.begin() + start + len,
                                       [](std::uint8_t f) { return f != 0; });
    if (all_noise) {
      for (std::size_t t = 0; t < len; ++t) seg[t] = amplitudes[start + t] * window[t];
      fft.Forward(seg, spectrum);
      for (std::size_t f = 0; f < bins; ++f) {
        average[f] = options.smoothing * average[f] +
                     (1.0 - options.smoothing) * std::abs(spectrum[f]);
      }
      current = model_from(average);
    }
    current.first_frame = static_cast<long long>(start);
    current.last_frame = static_cast<long long>(start + len - 1);
    track.push_back(current);
  }
  return track;
}

const LpcModel& ModelForFrame(std::span<const LpcModel> track, long long frame,
                              bool strict) {
  if (track.empty()) throw std::invalid_argument("ModelForFrame: empty track");
  const long long limit = strict ? frame - 1 : frame;
  // First model ending after the limit; the one before it is the answer.
  const auto it = std::upper_bound(
      track.begin(), track.end(), limit,
      [](long long value, const LpcModel& m) { return value < m.last_frame; });
  return it == track.begin() ? track.front() : *(it - 1);
}

std::vector<double> PredictTrajectory(std::span<const double> amplitudes,
                                      std::span<const LpcModel> track) {
  std::vector<double> out(amplitudes.size(), 0.0);
  if (amplitudes.empty()) return out;
  std::vector<double> history;
  for (std::size_t n = 0; n < amplitudes.size(); ++n) {
    const LpcModel& m = ModelForFrame(track, static_cast<long long>(n), true);
    history.assign(static_cast<std::size_t>(m.order()), 0.0);
    for (int i = 1; i <= m.order(); ++i) {
      const long long idx = static_cast<long long>(n) - i;
      history[i - 1] = amplitudes[idx >= 0 ? idx : 0];
    }
    out[n] = m.Predict(history);
  }
  return out;
}

std::vector<double> PredictionGain(const RealGrid& clean, const RealGrid& predicted) {
  if (!clean.same_shape(predicted)) {
    throw std::invalid_argument("PredictionGain: grids differ in shape");
  }
  std::vector<double> gain(clean.cols());
  for (std::size_t k = 0; k < clean.cols(); ++k) {
    double signal = 0.0, error = 0.0;
    for (std::size_t n = 0; n < clean.rows(); ++n) {
      const double s = clean(n, k);
      const double e = std::abs(s) - std::abs(predicted(n, k));
      signal += s * s;
      error += e * e;
    }
    gain[k] = error > 0.0 ? 10.0 * std::log10(signal / error)
                          : std::numeric_limits<double>::infinity();
  }
  return gain;
}

}  // namespace modkalm
