#include "modkalm/kalman.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace modkalm {
namespace {

void FillCompanion(Eigen::MatrixXd& F, int offset, const LpcModel& model) {
  const int order = model.order();
  for (int i = 0; i < order; ++i) F(offset, offset + i) = -model.coeffs[i];
  for (int i = 1; i < order; ++i) F(offset + i, offset + i - 1) = 1.0;
}

// Indices of the current amplitudes, then the remaining lags in order.
std::vector<int> PermutationOrder(int speech_order, int noise_order) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(speech_order + noise_order));
  order.push_back(0);
  if (noise_order > 0) order.push_back(speech_order);
  for (int i = 1; i < speech_order + noise_order; ++i) {
    if (i != speech_order || noise_order == 0) order.push_back(i);
  }
  return order;
}

}  // namespace

Eigen::PermutationMatrix<Eigen::Dynamic> CurrentFirstPermutation(int speech_order,
                                                                 int noise_order) {
  const std::vector<int> order = PermutationOrder(speech_order, noise_order);
  const int n = speech_order + noise_order;
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
  // Eigen places entry i of the operand at position indices(i).
  for (int i = 0; i < n; ++i) perm.indices()(order[i]) = i;
  return perm;
}

KalmanState KalmanState::Initial(int speech_order, int noise_order,
                                 double speech_amplitude, double noise_amplitude) {
  if (speech_order < 1 || noise_order < 0) {
    throw std::invalid_argument("KalmanState: need speech order >= 1, noise order >= 0");
  }
  KalmanState s;
  s.speech_order = speech_order;
  s.noise_order = noise_order;
  const int n = s.size();
  s.a = Eigen::VectorXd::Zero(n);
  s.P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < speech_order; ++i) {
    s.a(i) = speech_amplitude;
    s.P(i, i) = speech_amplitude * speech_amplitude;
  }
  for (int i = speech_order; i < n; ++i) {
    s.a(i) = noise_amplitude;
    s.P(i, i) = noise_amplitude * noise_amplitude;
  }
  return s;
}

Transition BuildTransition(const LpcModel& speech, const LpcModel* noise) {
  if (speech.order() < 1) {
    throw std::invalid_argument("BuildTransition: speech model order must be >= 1");
  }
  Transition t;
  t.speech_order = speech.order();
  t.noise_order = noise != nullptr ? noise->order() : 0;
  const int n = t.speech_order + t.noise_order;
  const int m = t.noise_order > 0 ? 2 : 1;
  t.F = Eigen::MatrixXd::Zero(n, n);
  FillCompanion(t.F, 0, speech);
  if (t.noise_order > 0) FillCompanion(t.F, t.speech_order, *noise);
  t.Q = Eigen::MatrixXd::Zero(m, m);
  t.Q(0, 0) = speech.residual_var;
  t.D = Eigen::MatrixXd::Zero(n, m);
  t.D(0, 0) = 1.0;
  if (m == 2) {
    t.Q(1, 1) = noise->residual_var;
    t.D(t.speech_order, 1) = 1.0;
  }
  return t;
}

Prediction Predict(const KalmanState& state, const Transition& transition,
                   KalmanCounters* counters) {
  if (transition.speech_order != state.speech_order ||
      transition.noise_order != state.noise_order || state.a.size() != state.size() ||
      state.P.rows() != state.size() || state.P.cols() != state.size()) {
    throw std::invalid_argument("Predict: transition orders do not match the state");
  }
  Prediction out;
  out.state.speech_order = state.speech_order;
  out.state.noise_order = state.noise_order;
  out.state.a = transition.F * state.a;
  out.state.P = transition.F * state.P * transition.F.transpose() +
                transition.D * transition.Q * transition.D.transpose();
  out.state.P = 0.5 * (out.state.P + out.state.P.transpose());

  const int m = state.observed();
  const Eigen::VectorXd mu = transition.D.transpose() * out.state.a;
  const Eigen::MatrixXd sigma = transition.D.transpose() * out.state.P * transition.D;
  for (int i = 0; i < m; ++i) {
    out.prior.mean(i) = mu(i);
    if (mu(i) < 0.0) {
      out.prior.mean(i) = 0.0;
      if (counters != nullptr) ++counters->mean_clamps;
    }
    for (int j = 0; j < m; ++j) out.prior.cov(i, j) = sigma(i, j);
  }
  return out;
}

bool ProjectToPsd(Eigen::MatrixXd& m) {
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const auto& values = eig.eigenvalues();
  const double scale = values.cwiseAbs().maxCoeff();
  if (!(values.minCoeff() < -kPsdTolerance * scale)) return false;
  const Eigen::VectorXd clamped = values.cwiseMax(0.0);
  m = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  m = 0.5 * (m + m.transpose());
  return true;
}

KalmanState Update(const KalmanState& prior_state, const MomentPair& posterior,
                   KalmanCounters* counters) {
  const int n = prior_state.size();
  const int m = prior_state.observed();

  // Permutation V: x = V a puts the current amplitudes first.
  const auto perm = CurrentFirstPermutation(prior_state.speech_order,
                                            prior_state.noise_order);
  const Eigen::VectorXd x = perm * prior_state.a;
  const Eigen::MatrixXd px = perm * prior_state.P * perm.transpose();

  Eigen::MatrixXd sigma = px.topLeftCorner(m, m);
  const Eigen::MatrixXd cross = px.bottomLeftCorner(n - m, m);  // M

  // Regularize the current-amplitude block if it is close to singular.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    double load = kRegularization * sigma.trace() / 2.0;
    if (!(load > 0.0)) load = kRegularization;
    sigma += load * Eigen::MatrixXd::Identity(m, m);
    if (counters != nullptr) ++counters->regularizations;
  }
  // M S^-1, the lower-left block of H^-1.
  const Eigen::MatrixXd gain_tail =
      sigma.llt().solve(cross.transpose()).transpose();

  Eigen::VectorXd post_mean(m);
  Eigen::MatrixXd post_cov(m, m);
  for (int i = 0; i < m; ++i) {
    post_mean(i) = posterior.mean(i);
    for (int j = 0; j < m; ++j) post_cov(i, j) = posterior.cov(i, j);
  }

  // H^-1 applied to x with its current block replaced by the posterior mean.
  Eigen::VectorXd xp = x;
  const Eigen::VectorXd innovation = post_mean - x.head(m);
  xp.head(m) = post_mean;
  xp.tail(n - m) += gain_tail * innovation;

  // H^-1 E = [I; M S^-1].
  Eigen::MatrixXd lift(n, m);
  lift.topRows(m).setIdentity();
  lift.bottomRows(n - m) = gain_tail;
  const Eigen::MatrixXd delta = post_cov - px.topLeftCorner(m, m);
  Eigen::MatrixXd pp = px + lift * delta * lift.transpose();

  KalmanState out;
  out.speech_order = prior_state.speech_order;
  out.noise_order = prior_state.noise_order;
  out.a = perm.transpose() * xp;
  out.P = perm.transpose() * pp * perm;
  if (ProjectToPsd(out.P) && counters != nullptr) ++counters->psd_projections;
  return out;
}

}  // namespace modkalm
