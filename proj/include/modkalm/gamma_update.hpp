#ifndef MODKALM_GAMMA_UPDATE_HPP_
#define MODKALM_GAMMA_UPDATE_HPP_

namespace modkalm {

// Amplitude prior p(a) proportional to a^{2 shape - 1} exp(-a^2 / scale^2),
// so that E(A) = scale * Gamma(shape + 1/2) / Gamma(shape) and
// E(A^2) = shape * scale^2.
struct GammaPrior {
  double shape = 1.0;
  double scale = 1.0;

  double Mean() const;
  double Variance() const;
};

struct GammaFit {
  GammaPrior prior;
  bool clamped = false;  // shape hit kGammaShapeMin or kGammaShapeMax
};

inline constexpr double kGammaShapeMin = 1e-3;
inline constexpr double kGammaShapeMax = 1e3;
inline constexpr double kGammaFitTolerance = 1e-10;

// Gamma(g + 1/2)^2 / (g Gamma(g)^2): the ratio E(A)^2 / E(A^2) of the prior,
// strictly increasing from 0 to 1.
double GammaMomentRatio(double shape);

// Moment fit: shape solves GammaMomentRatio(shape) = mean^2/(mean^2 + var) by
// bracketed root finding, scale = sqrt((mean^2 + var)/shape). Shapes outside
// [kGammaShapeMin, kGammaShapeMax] are clamped (and flagged). Throws
// std::domain_error unless mean >= 0 and var > 0.
GammaFit FitGammaPrior(double mean, double var);

struct SnrPair {
  double a_posteriori = 0.0;  // y^2 / noise power
  double a_priori = 0.0;      // E(A^2) / noise power
};

SnrPair MakeSnrPair(const GammaPrior& prior, double noise_power, double y);

struct AmplitudePosterior {
  double mean = 0.0;
  double var = 0.0;
  bool var_clamped = false;
};

// MMSE amplitude and its posterior variance for an observation of amplitude
// y = |S + W| with W complex Gaussian of power noise_power:
//   E(A|y)   = G(g) sqrt(noise_power xi / (g + xi)) M(g + 1/2; 1; v) / M(g; 1; v)
//   E(A^2|y) = g xi noise_power / (g + xi) M(g + 1; 1; v) / M(g; 1; v)
// with v = zeta xi / (g + xi) and G the half-step gamma ratio. The variance is
// E(A^2|y) - E(A|y)^2, floored at kVarianceFloor * max(y^2, E(A^2|y)).
// Throws std::domain_error unless noise_power > 0 and y >= 0.
AmplitudePosterior MdkmPosterior(const GammaPrior& prior, double noise_power, double y);

inline constexpr double kVarianceFloor = 1e-12;

}  // namespace modkalm

#endif  // MODKALM_GAMMA_UPDATE_HPP_
