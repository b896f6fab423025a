#include "modkalm/gaussring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "modkalm/specfun.hpp"

namespace modkalm {
namespace {

constexpr double kPi = std::numbers::pi;

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double Value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void CheckMoments(double mean, double var, const char* who) {
  if (!(mean >= 0.0) || !(var > 0.0) || !std::isfinite(mean) || !std::isfinite(var)) {
    throw std::domain_error(std::string(who) + ": need mean >= 0 and var > 0");
  }
}

}  // namespace

double NakagamiParams::Mean() const {
  return specfun::GammaHalfRatio(m) * std::sqrt(omega / m);
}

double NakagamiParams::Variance() const {
  const double r = specfun::GammaHalfRatio(m);
  return omega * (1.0 - r * r / m);
}

double NakagamiParams::Density(double a) const {
  if (a <= 0.0) return 0.0;
  const double log_f = std::log(2.0) + m * std::log(m / omega) - specfun::LnGamma(m) +
                       (2.0 * m - 1.0) * std::log(a) - m * a * a / omega;
  return std::exp(log_f);
}

double RicianParams::Mean() const {
  const double k = alpha * alpha / (2.0 * delta2);
  const double laguerre = (1.0 + k) * specfun::BesselI(0, 0.5 * k, true) +
                          k * specfun::BesselI(1, 0.5 * k, true);
  return std::sqrt(delta2 * kPi / 2.0) * laguerre;
}

double RicianParams::Density(double a) const {
  if (a <= 0.0) return 0.0;
  const double arg = a * alpha / delta2;
  return a / delta2 * std::exp(-(a - alpha) * (a - alpha) / (2.0 * delta2)) *
         specfun::BesselI(0, arg, true);
}

NakagamiParams NakagamiFromMoments(double mean, double var) {
  CheckMoments(mean, var, "NakagamiFromMoments");
  NakagamiParams p;
  p.omega = mean * mean + var;
  p.m = p.omega / (4.0 * var);
  return p;
}

RicianParams RicianFromNakagami(const NakagamiParams& params) {
  if (!(params.m > 1.0) || !(params.omega > 0.0)) {
    throw std::invalid_argument("RicianFromNakagami: requires m > 1 (use the Rayleigh fallback)");
  }
  RicianParams r;
  const double alpha2 = params.omega * std::sqrt(1.0 - 1.0 / params.m);
  r.alpha = std::sqrt(alpha2);
  r.delta2 = 0.5 * (params.omega - alpha2);
  return r;
}

double RingGateRatio() { return std::sqrt(kPi / (4.0 - kPi)); }

std::complex<double> GaussringModel::Mean(int g) const {
  if (fallback) return center;
  return center + std::polar(radius, phase + 2.0 * kPi * g / components);
}

std::vector<std::complex<double>> GaussringModel::Means() const {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(components));
  for (int g = 0; g < components; ++g) out[g] = Mean(g);
  return out;
}

GaussringModel BuildRing(double mean, double var, std::complex<double> center,
                         const RingOptions& options, double phase) {
  CheckMoments(mean, var, "BuildRing");
  if (options.max_components < 1) {
    throw std::invalid_argument("BuildRing: max_components must be >= 1");
  }
  GaussringModel ring;
  ring.center = center;
  ring.phase = phase;
  const double sigma = std::sqrt(var);
  const double omega = mean * mean + var;
  if (!(mean / sigma >= RingGateRatio())) {
    ring.components = 1;
    ring.radius = 0.0;
    ring.var = omega;
    ring.fallback = true;
    return ring;
  }
  const RicianParams rice = RicianFromNakagami(NakagamiFromMoments(mean, var));
  const double wanted = std::ceil(kPi * mean / sigma);
  ring.fallback = false;
  ring.radius = rice.alpha;
  double delta2 = rice.delta2;
  if (wanted > options.max_components) {
    const int g = options.max_components;
    ring.components = g;
    ring.capped = true;
    // Per-dimension spacing sigma_eff = pi alpha / G with
    // alpha^2 + 2 sigma_eff^2 = omega.
    const double alpha2 = omega / (1.0 + 2.0 * kPi * kPi / (double(g) * g));
    const double spaced = kPi * kPi * alpha2 / (double(g) * g);
    if (spaced > delta2) {
      delta2 = spaced;
      ring.radius = std::sqrt(alpha2);
    }
  } else {
    ring.components = static_cast<int>(wanted);
  }
  ring.var = 2.0 * delta2;
  return ring;
}

ProductMixture ProductComponents(const GaussringModel& speech, const GaussringModel& noise) {
  ProductMixture out;
  const double sum_var = speech.var + noise.var;
  const double prod_var = speech.var * noise.var / sum_var;
  const double log_norm =
      -std::log(kPi * sum_var) - std::log(double(speech.components) * noise.components);
  const auto s_means = speech.Means();
  const auto n_means = noise.Means();

  std::vector<double> log_w;
  log_w.reserve(s_means.size() * n_means.size());
  out.components.reserve(s_means.size() * n_means.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& os : s_means) {
    for (const auto& on : n_means) {
      const double lw = -std::norm(os - on) / sum_var + log_norm;
      log_w.push_back(lw);
      best = std::max(best, lw);
      out.components.push_back(
          {0.0, prod_var * (os / speech.var + on / noise.var), prod_var});
    }
  }
  if (!std::isfinite(best)) {
    out.degenerate = true;
    const double w = 1.0 / static_cast<double>(out.components.size());
    for (auto& c : out.components) c.weight = w;
    return out;
  }
  CompensatedSum total;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    out.components[i].weight = std::exp(log_w[i] - best);
    total.Add(out.components[i].weight);
  }
  // Drop negligible components and renormalize the rest.
  const double floor = kProductWeightFloor * total.Value();
  std::erase_if(out.components, [floor](const ProductComponent& c) { return c.weight < floor; });
  CompensatedSum kept;
  for (const auto& c : out.components) kept.Add(c.weight);
  const double inv = 1.0 / kept.Value();
  for (auto& c : out.components) c.weight *= inv;
  return out;
}

double SquaredMoments::correlation() const {
  const double denom = std::sqrt(cov(0, 0) * cov(1, 1));
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(cov(0, 1) / denom, -1.0, 1.0);
}

SquaredMoments ComputeSquaredMoments(std::complex<double> mean, double var,
                                     std::complex<double> z) {
  const std::complex<double> m1 = mean;
  const std::complex<double> m2 = mean - z;
  SquaredMoments sq;
  sq.mean << var + std::norm(m1), var + std::norm(m2);
  const double v2 = var * var;
  sq.cov(0, 0) = v2 + 2.0 * var * std::norm(m1);
  sq.cov(1, 1) = v2 + 2.0 * var * std::norm(m2);
  sq.cov(0, 1) = sq.cov(1, 0) = v2 + 2.0 * var * std::real(m1 * std::conj(m2));
  return sq;
}

MomentPair ComponentAmplitudeMoments(const SquaredMoments& sq) {
  MomentPair out;
  double sd[2];
  for (int i = 0; i < 2; ++i) {
    const double omega = sq.mean(i);
    const double var_sq = sq.cov(i, i);
    if (!(var_sq > 0.0)) {
      out.mean(i) = std::sqrt(std::max(omega, 0.0));
      out.cov(i, i) = 0.0;
    } else {
      const double m = omega * omega / var_sq;
      const double r = specfun::GammaHalfRatio(m);
      out.mean(i) = r * std::sqrt(omega / m);
      out.cov(i, i) = std::max(0.0, omega * (1.0 - r * r / m));
    }
    sd[i] = std::sqrt(out.cov(i, i));
  }
  out.cov(0, 1) = out.cov(1, 0) = sq.correlation() * sd[0] * sd[1];
  return out;
}

MdkrResult MdkrPosterior(const MomentPair& prior, std::complex<double> z,
                         const RingOptions& options) {
  const double z_abs = std::abs(z);
  // Tiny positive floors keep degenerate priors (zero variance) usable.
  const double scale2 = std::max({prior.mean(0) * prior.mean(0),
                                  prior.mean(1) * prior.mean(1), z_abs * z_abs});
  const double floor = std::max(1e-12 * scale2, std::numeric_limits<double>::min());
  const double s_var = std::max(prior.cov(0, 0), floor);
  const double n_var = std::max(prior.cov(1, 1), floor);

  const GaussringModel speech = BuildRing(std::max(prior.mean(0), 0.0), s_var, {}, options);
  const GaussringModel noise =
      BuildRing(std::max(prior.mean(1), 0.0), n_var, {z_abs, 0.0}, options);
  const ProductMixture mix = ProductComponents(speech, noise);

  MdkrResult result;
  result.speech_components = speech.components;
  result.noise_components = noise.components;
  result.speech_capped = speech.capped;
  result.noise_capped = noise.capped;
  result.product_components = mix.components.size();
  result.degenerate = mix.degenerate;

  const std::complex<double> zr(z_abs, 0.0);
  std::vector<MomentPair> parts;
  parts.reserve(mix.components.size());
  CompensatedSum mean_acc[2];
  for (const auto& c : mix.components) {
    parts.push_back(ComponentAmplitudeMoments(ComputeSquaredMoments(c.mean, c.var, zr)));
    for (int i = 0; i < 2; ++i) mean_acc[i].Add(c.weight * parts.back().mean(i));
  }
  Eigen::Vector2d mean(mean_acc[0].Value(), mean_acc[1].Value());
  // Two-pass covariance about the mixture mean.
  CompensatedSum cov_acc[3];
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double w = mix.components[k].weight;
    const Eigen::Vector2d d = parts[k].mean - mean;
    cov_acc[0].Add(w * (parts[k].cov(0, 0) + d(0) * d(0)));
    cov_acc[1].Add(w * (parts[k].cov(1, 1) + d(1) * d(1)));
    cov_acc[2].Add(w * (parts[k].cov(0, 1) + d(0) * d(1)));
  }
  Eigen::MatrixXd cov(2, 2);
  cov << cov_acc[0].Value(), cov_acc[2].Value(), cov_acc[2].Value(), cov_acc[1].Value();
  result.projected = ProjectToPsd(cov);
  result.posterior.mean = mean;
  result.posterior.cov = cov;
  return result;
}

}  // namespace modkalm
