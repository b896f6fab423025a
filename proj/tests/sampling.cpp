#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace modkalm::testing {

RingSampleStats SampleRing(const GaussringModel& ring, int draws, std::uint64_t seed) {
  constexpr int kBins = 36;
  constexpr double kPi = std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, ring.components - 1);
  std::normal_distribution<double> g(0.0, std::sqrt(ring.var / 2.0));
  const auto means = ring.Means();
  double s1 = 0.0, s2 = 0.0;
  std::vector<int> bins(kBins, 0);
  for (int i = 0; i < draws; ++i) {
    const std::complex<double> x = means[pick(rng)] - ring.center + std::complex(g(rng), g(rng));
    const double a = std::abs(x);
    s1 += a;
    s2 += a * a;
    const double phase = std::arg(x) + kPi;
    ++bins[std::min(kBins - 1, static_cast<int>(phase / (2.0 * kPi) * kBins))];
  }
  RingSampleStats out;
  out.mean = s1 / draws;
  out.std = std::sqrt(s2 / draws - out.mean * out.mean);
  const double expect = static_cast<double>(draws) / kBins;
  for (int b : bins) out.phase_chi2 += (b - expect) * (b - expect) / expect;
  out.phase_p_value = boost::math::cdf(boost::math::complement(
      boost::math::chi_squared_distribution<double>(kBins - 1), out.phase_chi2));
  return out;
}

}  // namespace modkalm::testing
