#ifndef MODKALM_KALMAN_HPP_
#define MODKALM_KALMAN_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "modkalm/lpc.hpp"

namespace modkalm {

// Amplitude moments of the current speech (index 0) and noise (index 1)
// amplitudes. With a speech-only state only index 0 is meaningful.
struct MomentPair {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();

  double speech_mean() const { return mean(0); }
  double noise_mean() const { return mean(1); }
  double speech_var() const { return cov(0, 0); }
  double noise_var() const { return cov(1, 1); }
  double cross_cov() const { return cov(0, 1); }
};

// Event counters surfaced as diagnostics; the library itself does not log.
struct KalmanCounters {
  std::int64_t mean_clamps = 0;       // negative predicted means raised to 0
  std::int64_t regularizations = 0;   // ill-conditioned prior covariance loaded
  std::int64_t psd_projections = 0;   // covariance re-projected onto the PSD cone

  KalmanCounters& operator+=(const KalmanCounters& o) {
    mean_clamps += o.mean_clamps;
    regularizations += o.regularizations;
    psd_projections += o.psd_projections;
    return *this;
  }
};

// Stacked speech lags (most recent first) followed by noise lags.
struct KalmanState {
  Eigen::VectorXd a;
  Eigen::MatrixXd P;
  int speech_order = 0;
  int noise_order = 0;

  int size() const { return speech_order + noise_order; }
  // Number of current amplitudes the update acts on: 2, or 1 without noise lags.
  int observed() const { return noise_order > 0 ? 2 : 1; }

  // Lags filled with the given amplitudes, diagonal covariance of their squares.
  static KalmanState Initial(int speech_order, int noise_order, double speech_amplitude,
                             double noise_amplitude);
};

struct Transition {
  Eigen::MatrixXd F;  // block-diagonal companion matrices
  Eigen::MatrixXd Q;  // observed() x observed() residual covariance
  Eigen::MatrixXd D;  // size() x observed() selection of the current amplitudes
  int speech_order = 0;
  int noise_order = 0;
};

struct Prediction {
  KalmanState state;
  MomentPair prior;
};

// Companion blocks with top rows -coeffs, Q = diag(residual variances) and
// D selecting elements 0 and speech_order. Without a noise model the state is
// speech-only. Throws std::invalid_argument for a speech order below 1.
Transition BuildTransition(const LpcModel& speech, const LpcModel* noise);

// a <- F a, P <- F P F' + D Q D'; prior mean D'a (negative entries clamped
// to 0 and counted) and prior covariance D'PD. Throws std::invalid_argument
// when the transition does not match the state orders.
Prediction Predict(const KalmanState& state, const Transition& transition,
                   KalmanCounters* counters = nullptr);

// Injects posterior moments of the current amplitudes into the full state.
// The state is permuted so the current amplitudes come first, decorrelated
// from the remaining lags by H = [I 0; -M S^-1 I], the current block is
// replaced by the posterior, and the inverse transform is applied:
//   a+ = H^-1 (x + E(mu_post - E'x)),  P+ = P + H^-1 E (S_post - S) E' H^-T
// (all in permuted coordinates). The result is symmetrized and projected onto
// the PSD cone if round-off made it indefinite.
KalmanState Update(const KalmanState& prior_state, const MomentPair& posterior,
                   KalmanCounters* counters = nullptr);

// Permutation V with (V a) = [current speech, current noise, other lags...].
Eigen::PermutationMatrix<Eigen::Dynamic> CurrentFirstPermutation(int speech_order,
                                                                 int noise_order);

// Eigenvalues below -kPsdTolerance * max|eigenvalue| trigger projection.
inline constexpr double kPsdTolerance = 1e-10;
// Prior covariances of the current amplitudes with a larger condition number
// are loaded by kRegularization * trace / 2 on the diagonal.
inline constexpr double kMaxCondition = 1e12;
inline constexpr double kRegularization = 1e-8;

// Symmetrizes `m` and clamps negative eigenvalues to zero when the most
// negative one is below the tolerance. Returns true if a projection happened.
bool ProjectToPsd(Eigen::MatrixXd& m);

}  // namespace modkalm

#endif  // MODKALM_KALMAN_HPP_
