#include "modkalm/enhancer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "modkalm/gamma_update.hpp"

namespace modkalm {

std::string_view ModeName(EnhancerMode mode) {
  switch (mode) {
    case EnhancerMode::kMdkm:
      return "mdkm";
    case EnhancerMode::kMdkr:
      return "mdkr";
    case EnhancerMode::kLogMmse:
      return "logmmse";
  }
  return "?";
}

std::optional<EnhancerMode> ParseMode(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto mode : {EnhancerMode::kMdkm, EnhancerMode::kMdkr, EnhancerMode::kLogMmse}) {
    if (lower == ModeName(mode)) return mode;
  }
  return std::nullopt;
}

EnhancerConfig EnhancerConfig::ForMode(EnhancerMode mode) {
  EnhancerConfig c;
  c.mode = mode;
  if (mode == EnhancerMode::kMdkm) c.noise_order = 0;
  return c;
}

void EnhancerConfig::Validate() const {
  frame.Validate();
  speech_mod.Validate();
  noise_mod.Validate();
  if (speech_order < 1 || speech_order >= speech_mod.mod_frame_len) {
    throw std::invalid_argument("speech order must be in [1, speech modulation frame length)");
  }
  if (noise_order < 0 || noise_order >= noise_mod.mod_frame_len) {
    throw std::invalid_argument("noise order must be in [0, noise modulation frame length)");
  }
  if (mode == EnhancerMode::kMdkm && noise_order != 0) {
    throw std::invalid_argument("MDKM assumes stationary noise and requires noise order 0");
  }
  if (ring.max_components < 1) throw std::invalid_argument("ring cap must be >= 1");
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
}

EnhancerCounters& EnhancerCounters::operator+=(const EnhancerCounters& o) {
  kalman += o.kalman;
  faults += o.faults;
  gamma_clamps += o.gamma_clamps;
  variance_clamps += o.variance_clamps;
  degenerate_products += o.degenerate_products;
  posterior_projections += o.posterior_projections;
  capped_rings += o.capped_rings;
  return *this;
}

namespace {

struct Front {
  ComplexSpectrogram spec;
  NoiseTrack noise;
  RealGrid precleaned;
};

Front RunFrontEnd(std::span<const double> samples, double sample_rate,
                  const EnhancerConfig& config) {
  config.Validate();
  if (samples.empty()) throw std::invalid_argument("Enhance: empty signal");
  if (sample_rate != config.frame.sample_rate) {
    throw std::invalid_argument("Enhance: sample rate differs from the configured rate");
  }
  Front f;
  f.spec = Analyze(samples, config.frame);
  const auto needed = static_cast<std::size_t>(
      std::max(config.speech_mod.mod_frame_len, config.noise_mod.mod_frame_len));
  if (f.spec.frames() < needed) {
    throw std::invalid_argument("Enhance: signal shorter than one modulation frame");
  }
  f.noise = TrackNoise(f.spec, config.tracker);
  f.precleaned = LogMmseEnhance(f.spec, f.noise, config.logmmse);
  return f;
}

// Per-bin Kalman filter over all frames.
class BinFilter {
 public:
  BinFilter(const Front& front, const EnhancerConfig& config, std::size_t bin)
      : front_(front), config_(config), bin_(bin) {}

  void Run(EnhanceResult& out, EnhancerCounters& counters) {
    const std::size_t frames = front_.spec.frames();
    const auto speech_track =
        SpeechLpcTrack(front_.precleaned.column(bin_), config_.speech_mod, config_.speech_order);
    std::vector<LpcModel> noise_track;
    const bool joint = config_.mode == EnhancerMode::kMdkr && config_.noise_order > 0;
    const int noise_order = config_.mode == EnhancerMode::kMdkr ? config_.noise_order : 0;
    if (joint) {
      std::vector<double> noisy(frames);
      for (std::size_t n = 0; n < frames; ++n) noisy[n] = std::abs(front_.spec.values(n, bin_));
      noise_track = NoiseLpcTrack(noisy, front_.noise.noise_only, config_.noise_mod,
                                  config_.noise_order, config_.noise_lpc);
    }

    KalmanState state = Start(0, noise_order);
    for (std::size_t n = 0; n < frames; ++n) {
      const auto frame = static_cast<long long>(n);
      double estimate = 0.0;
      bool ok = false;
      try {
        const LpcModel& speech = ModelForFrame(speech_track, frame);
        const LpcModel* noise = joint ? &ModelForFrame(noise_track, frame) : nullptr;
        const Transition transition = BuildTransition(speech, noise);
        Prediction pred = Predict(state, transition, &counters.kalman);
        const MomentPair posterior = Posterior(pred.prior, n, out, counters);
        KalmanState next = Update(pred.state, posterior, &counters.kalman);
        estimate = std::max(posterior.speech_mean(), 0.0);
        ok = std::isfinite(estimate) && next.a.allFinite() && next.P.allFinite();
        if (ok) state = std::move(next);
      } catch (const std::exception&) {
        ok = false;
      }
      if (!ok) {
        ++counters.faults;
        estimate = front_.precleaned(n, bin_);
        state = Start(n, noise_order);
      }
      out.amplitudes(n, bin_) = estimate;
    }
  }

 private:
  KalmanState Start(std::size_t n, int noise_order) const {
    return KalmanState::Initial(config_.speech_order, noise_order,
                                std::abs(front_.spec.values(n, bin_)),
                                std::sqrt(front_.noise.psd(n, bin_)));
  }

  MomentPair Posterior(const MomentPair& prior, std::size_t n, EnhanceResult& out,
                       EnhancerCounters& counters) const {
    const std::complex<double> z = front_.spec.values(n, bin_);
    if (config_.mode == EnhancerMode::kMdkr) {
      MomentPair joint_prior = prior;
      if (config_.noise_order == 0) {
        // Stationary noise: Rayleigh amplitude with E(A^2) = tracked PSD.
        const double nu2 = front_.noise.psd(n, bin_);
        joint_prior.mean(1) = std::sqrt(std::numbers::pi * nu2) / 2.0;
        joint_prior.cov(1, 1) = (1.0 - std::numbers::pi / 4.0) * nu2;
        joint_prior.cov(0, 1) = joint_prior.cov(1, 0) = 0.0;
      }
      const MdkrResult r = MdkrPosterior(joint_prior, z, config_.ring);
      out.speech_components(n, bin_) = r.speech_components;
      out.noise_components(n, bin_) = r.noise_components;
      counters.degenerate_products += r.degenerate ? 1 : 0;
      counters.posterior_projections += r.projected ? 1 : 0;
      counters.capped_rings += (r.speech_capped ? 1 : 0) + (r.noise_capped ? 1 : 0);
      return r.posterior;
    }
    const double noise_power = front_.noise.psd(n, bin_);
    const double mean = std::max(prior.speech_mean(), 0.0);
    const double var = std::max(
        prior.speech_var(),
        std::max(kVarianceFloor * std::max(mean * mean, noise_power),
                 std::numeric_limits<double>::min()));
    const GammaFit fit = FitGammaPrior(mean, var);
    counters.gamma_clamps += fit.clamped ? 1 : 0;
    const AmplitudePosterior post = MdkmPosterior(fit.prior, noise_power, std::abs(z));
    counters.variance_clamps += post.var_clamped ? 1 : 0;
    MomentPair m;
    m.mean(0) = post.mean;
    m.cov(0, 0) = post.var;
    return m;
  }

  const Front& front_;
  const EnhancerConfig& config_;
  std::size_t bin_;
};

EnhanceResult RunFilters(const Front& front, std::span<const double> samples,
                         const EnhancerConfig& config) {
  EnhanceResult out;
  const std::size_t frames = front.spec.frames();
  const std::size_t bins = front.spec.bins();
  if (config.mode == EnhancerMode::kLogMmse) {
    out.amplitudes = front.precleaned;
  } else {
    out.amplitudes = RealGrid(frames, bins);
    if (config.mode == EnhancerMode::kMdkr) {
      out.speech_components = IntGrid(frames, bins);
      out.noise_components = IntGrid(frames, bins);
    }
    // Bins are independent; worker w takes bins w, w + W, ... and keeps its own
    // counters, so the result does not depend on the worker count.
    const auto workers = static_cast<std::size_t>(
        std::min<std::size_t>(static_cast<std::size_t>(config.workers), bins));
    std::vector<EnhancerCounters> counters(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto job = [&](std::size_t w) {
      try {
        for (std::size_t k = w; k < bins; k += workers) {
          BinFilter(front, config, k).Run(out, counters[w]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (workers == 1) {
      job(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(job, w);
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (const auto& c : counters) out.counters += c;
  }
  out.samples = Synthesize(out.amplitudes, front.spec.Phases(), config.frame, samples.size());
  return out;
}

}  // namespace

EnhanceResult Enhance(std::span<const double> samples, double sample_rate,
                      const EnhancerConfig& config) {
  const Front front = RunFrontEnd(samples, sample_rate, config);
  return RunFilters(front, samples, config);
}

Diagnostics Diagnose(std::span<const double> samples, double sample_rate,
                     const EnhancerConfig& config) {
  const Front front = RunFrontEnd(samples, sample_rate, config);
  Diagnostics d;
  d.result = RunFilters(front, samples, config);
  d.noise = front.noise;

  const std::size_t frames = front.spec.frames();
  const std::size_t bins = front.spec.bins();
  RealGrid predicted(frames, bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const auto column = front.precleaned.column(k);
    const auto track = SpeechLpcTrack(column, config.speech_mod, config.speech_order);
    predicted.set_column(k, PredictTrajectory(column, track));
  }
  d.speech_prediction_gain = PredictionGain(front.precleaned, predicted);

  const int q = std::max(config.noise_order, 1);
  const RealGrid noisy = front.spec.Amplitudes();
  for (std::size_t k = 0; k < bins; ++k) {
    const auto column = noisy.column(k);
    const auto track =
        NoiseLpcTrack(column, front.noise.noise_only, config.noise_mod, q, config.noise_lpc);
    predicted.set_column(k, PredictTrajectory(column, track));
  }
  d.noise_prediction_gain = PredictionGain(noisy, predicted);
  return d;
}

}  // namespace modkalm
