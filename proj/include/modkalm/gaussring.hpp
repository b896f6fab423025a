#ifndef MODKALM_GAUSSRING_HPP_
#define MODKALM_GAUSSRING_HPP_

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "modkalm/kalman.hpp"

namespace modkalm {

struct NakagamiParams {
  double m = 1.0;
  double omega = 1.0;  // E(A^2)

  double Mean() const;      // Gamma(m + 1/2)/Gamma(m) sqrt(omega/m)
  double Variance() const;  // omega - Mean()^2
  double Density(double a) const;
};

// Rician amplitude of a complex Gaussian with mean of modulus `alpha` and
// per-dimension variance `delta2`.
struct RicianParams {
  double alpha = 0.0;
  double delta2 = 0.5;

  double Mean() const;
  double Density(double a) const;
};

// Moment match with the lower-bound convention: omega = mean^2 + var,
// m = omega / (4 var). Throws std::domain_error unless mean >= 0, var > 0.
NakagamiParams NakagamiFromMoments(double mean, double var);

// alpha^2 = omega sqrt(1 - 1/m), delta2 = (omega - alpha^2)/2. Throws
// std::invalid_argument for m <= 1, where the Rayleigh fallback applies.
RicianParams RicianFromNakagami(const NakagamiParams& params);

// Smallest amplitude mean/std ratio represented by a ring: sqrt(pi/(4-pi)).
double RingGateRatio();

struct RingOptions {
  int max_components = 64;
};

// Equal-weight mixture of circular complex Gaussians CN(mean_g, var) with
// means center + radius e^{j(phase + 2 pi g / G)}.
struct GaussringModel {
  int components = 1;
  double radius = 0.0;
  double var = 1.0;  // complex variance (2 delta^2)
  std::complex<double> center{0.0, 0.0};
  double phase = 0.0;
  bool fallback = true;
  bool capped = false;

  std::complex<double> Mean(int g) const;
  std::vector<std::complex<double>> Means() const;
};

// Ring for amplitude moments (mean, var). When mean/sqrt(var) reaches the
// gate ratio: G = ceil(pi mean / sqrt(var)) components on the matched Rician
// radius with var = 2 delta2. If G exceeds the cap, G is the cap and the
// variance is widened to keep adjacent centres about two standard deviations
// apart while preserving E(A^2). Otherwise a single Gaussian at the centre
// with var = mean^2 + var (Rayleigh amplitude with the same second moment).
// Throws std::domain_error unless mean >= 0, var > 0.
GaussringModel BuildRing(double mean, double var, std::complex<double> center = {},
                         const RingOptions& options = {}, double phase = 0.0);

struct ProductComponent {
  double weight = 0.0;
  std::complex<double> mean;
  double var = 0.0;
};

struct ProductMixture {
  std::vector<ProductComponent> components;
  bool degenerate = false;  // weights could not be formed; uniform used
};

// Normalized pairwise products of the speech ring and the ring of S implied
// by the noise (centred at the observation). Weights are formed in log space,
// components below kProductWeightFloor are dropped and the rest renormalized.
ProductMixture ProductComponents(const GaussringModel& speech, const GaussringModel& noise);

inline constexpr double kProductWeightFloor = 1e-14;

// Moments of the squared moduli of u = [s, s - z] for s ~ CN(mean, var).
struct SquaredMoments {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;

  double correlation() const;
};

SquaredMoments ComputeSquaredMoments(std::complex<double> mean, double var,
                                     std::complex<double> z);

// Nakagami fits of each squared modulus (omega = E, m = E^2/Var) give the
// amplitude means and variances; the amplitude covariance is the correlation
// of the squares times the two standard deviations.
MomentPair ComponentAmplitudeMoments(const SquaredMoments& sq);

struct MdkrResult {
  MomentPair posterior;
  int speech_components = 0;
  int noise_components = 0;
  std::size_t product_components = 0;
  bool speech_capped = false;
  bool noise_capped = false;
  bool degenerate = false;
  bool projected = false;
};

// Joint posterior amplitude moments of speech and noise given the complex
// observation z and the prior amplitude moments (speech index 0, noise
// index 1; the prior cross term is not used to build the rings). The problem
// is solved with z rotated onto the positive real axis, which leaves the
// amplitude outputs unchanged.
MdkrResult MdkrPosterior(const MomentPair& prior, std::complex<double> z,
                         const RingOptions& options = {});

}  // namespace modkalm

#endif  // MODKALM_GAUSSRING_HPP_
