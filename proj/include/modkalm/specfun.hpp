#ifndef MODKALM_SPECFUN_HPP_
#define MODKALM_SPECFUN_HPP_

#include <cmath>

namespace modkalm::specfun {

// A real number stored as sign * exp(log_abs). Used wherever the magnitude
// can exceed the double range (e.g. the confluent hypergeometric function at
// large arguments).
struct ScaledValue {
  double log_abs = 0.0;
  int sign = 1;

  double Value() const { return sign * std::exp(log_abs); }
};

// ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double LnGamma(double x);

// Gamma(g + 1/2) / Gamma(g) for g > 0, formed from log-gamma differences.
double GammaHalfRatio(double g);

// Modified Bessel function of the first kind, order 0 or 1. With `scaled`
// the result is multiplied by exp(-|x|).
double BesselI(int order, double x, bool scaled = false);

// Kummer's confluent hypergeometric function M(a; b; x) in scaled form.
//
// Supported range: 0 <= a <= kKummerMaxA, b > 0, 0 <= x <= kKummerMaxX.
// Parameters outside the range raise std::domain_error. The Taylor series is
// used for x <= 30; beyond that the large-x asymptotic expansion is used
// whenever it converges to full precision, with the (scaled, overflow-free)
// Taylor series as fallback.
inline constexpr double kKummerMaxA = 1.0e4;
inline constexpr double kKummerMaxX = 1.0e5;
ScaledValue KummerM(double a, double b, double x);

// M(a1; b; x) / M(a2; b; x) computed by subtracting logs. Beyond kKummerMaxX
// the large-x expansion is used when it converges, else the rescaled Taylor
// series up to kKummerRatioMaxX; std::domain_error past that.
inline constexpr double kKummerRatioMaxX = 1.0e7;
double KummerRatio(double a1, double a2, double b, double x);

// Exponential integral E1(x) for x > 0: power series for x <= 1, continued
// fraction above.
double ExpIntegralE1(double x);

}  // namespace modkalm::specfun

#endif  // MODKALM_SPECFUN_HPP_
