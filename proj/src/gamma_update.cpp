#include "modkalm/gamma_update.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "modkalm/specfun.hpp"

namespace modkalm {

double GammaPrior::Mean() const { return scale * specfun::GammaHalfRatio(shape); }

double GammaPrior::Variance() const {
  const double ratio = specfun::GammaHalfRatio(shape);
  return scale * scale * (shape - ratio * ratio);
}

double GammaMomentRatio(double shape) {
  const double ratio = specfun::GammaHalfRatio(shape);
  return ratio * ratio / shape;
}

GammaFit FitGammaPrior(double mean, double var) {
  if (!(mean >= 0.0) || !(var > 0.0) || !std::isfinite(mean) || !std::isfinite(var)) {
    throw std::domain_error("FitGammaPrior: need mean >= 0 and var > 0");
  }
  const double second = mean * mean + var;
  const double target = mean * mean / second;

  GammaFit fit;
  double shape;
  if (target <= GammaMomentRatio(kGammaShapeMin)) {
    shape = kGammaShapeMin;
    fit.clamped = true;
  } else if (target >= GammaMomentRatio(kGammaShapeMax)) {
    shape = kGammaShapeMax;
    fit.clamped = true;
  } else {
    // Solve in log(shape); the ratio is smooth and monotone there.
    auto f = [target](double log_shape) {
      return GammaMomentRatio(std::exp(log_shape)) - target;
    };
    std::uintmax_t iterations = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        f, std::log(kGammaShapeMin), std::log(kGammaShapeMax),
        [&](double lo, double hi) {
          return std::abs(hi - lo) <= 4e-16 * std::max(1.0, std::abs(lo)) ||
                 std::abs(f(0.5 * (lo + hi))) <= 0.1 * kGammaFitTolerance;
        },
        iterations);
    shape = std::exp(0.5 * (bracket.first + bracket.second));
  }
  fit.prior.shape = shape;
  fit.prior.scale = std::sqrt(second / shape);
  return fit;
}

SnrPair MakeSnrPair(const GammaPrior& prior, double noise_power, double y) {
  return {y * y / noise_power, prior.shape * prior.scale * prior.scale / noise_power};
}

AmplitudePosterior MdkmPosterior(const GammaPrior& prior, double noise_power, double y) {
  if (!(noise_power > 0.0) || !(y >= 0.0) || !std::isfinite(noise_power) ||
      !std::isfinite(y)) {
    throw std::domain_error("MdkmPosterior: need noise_power > 0 and y >= 0");
  }
  const double g = prior.shape;
  const SnrPair snr = MakeSnrPair(prior, noise_power, y);
  const double xi = snr.a_priori;
  const double shrink = xi / (g + xi);
  const double v = snr.a_posteriori * shrink;

  AmplitudePosterior out;
  out.mean = specfun::GammaHalfRatio(g) * std::sqrt(noise_power * shrink) *
             specfun::KummerRatio(g + 0.5, g, 1.0, v);
  const double second =
      g * noise_power * shrink * specfun::KummerRatio(g + 1.0, g, 1.0, v);
  const double floor = kVarianceFloor * std::max(y * y, second);
  out.var = second - out.mean * out.mean;
  if (!(out.var >= floor)) {
    out.var = floor;
    out.var_clamped = true;
  }
  return out;
}

}  // namespace modkalm
