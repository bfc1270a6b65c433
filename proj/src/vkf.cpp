// SPDX-License-Identifier: Apache-2.0
#include "mimopred/vkf.hpp"

#include <cmath>
#include <string>

namespace mimopred {

namespace {

/// Stationary covariance of the companion state: P = Φ̄PΦ̄ᴴ + Q by
/// doubling (P ← P + APAᴴ, A ← A²). Returns identity when the model is
/// near-unstable or the series fails to converge — a harmless prior the
/// filter forgets geometrically.
CMatrix stationary_companion_cov(const StateSpace& ss, double radius) {
  const Eigen::Index n = ss.phi_bar.rows();
  if (radius >= 1.0 - 1e-6) return CMatrix::Identity(n, n);
  CMatrix q = CMatrix::Zero(n, n);
  q.topLeftCorner(ss.dim, ss.dim) = ss.innovation_cov;
  CMatrix p = q;
  CMatrix a = ss.phi_bar;
  for (int iter = 0; iter < 100; ++iter) {
    const CMatrix incr = a * p * a.adjoint();
    p += incr;
    if (!p.allFinite()) return CMatrix::Identity(n, n);
    if (incr.norm() <= 1e-14 * p.norm()) return p;
    a = a * a;
  }
  return CMatrix::Identity(n, n);
}

}  // namespace

StateSpace build_state_space(const ArModel& model, const PilotBlock& pilot) {
  const int d = model.dim;
  const int p = model.order;
  if (d != static_cast<int>(pilot.psi_bar.cols()))
    throw ShapeMismatch("build_state_space: model dim " + std::to_string(d) +
                        " != pilot M_r*N " + std::to_string(pilot.psi_bar.cols()));
  if (p < 1 || static_cast<int>(model.coeffs.size()) != p)
    throw ShapeMismatch("build_state_space: malformed model coefficient list");

  StateSpace ss;
  ss.dim = d;
  ss.order = p;
  ss.meas_dim = static_cast<int>(pilot.psi_bar.rows());
  ss.innovation_cov = model.innovation_cov;
  ss.psi_bar = pilot.psi_bar;

  ss.coeff_row.resize(d, d * p);
  for (int i = 0; i < p; ++i) ss.coeff_row.block(0, i * d, d, d) = model.coeffs[i];

  ss.phi_bar = CMatrix::Zero(d * p, d * p);
  ss.phi_bar.topRows(d) = ss.coeff_row;
  for (int i = 1; i < p; ++i)
    ss.phi_bar.block(i * d, (i - 1) * d, d, d) = CMatrix::Identity(d, d);

  ss.theta_bar = CMatrix::Zero(d * p, d);
  ss.theta_bar.topRows(d) = CMatrix::Identity(d, d);

  ss.s = CMatrix::Zero(ss.meas_dim, d * p);
  ss.s.leftCols(d) = pilot.psi_bar;
  return ss;
}

KalmanState init_state(const StateSpace& ss, const AutocorrSet& acorr) {
  if (acorr.order != ss.order || acorr.dim != ss.dim)
    throw ShapeMismatch("init_state: autocorrelation set is order " +
                        std::to_string(acorr.order) + ", dim " +
                        std::to_string(acorr.dim) + "; state space wants " +
                        std::to_string(ss.order) + ", " + std::to_string(ss.dim));
  KalmanState state;
  state.estimate = CVector::Zero(ss.dim * ss.order);
  state.cov = psd_project(acorr.stacked());
  state.slot_index = 0;
  return state;
}

KalmanState init_state(const StateSpace& ss) {
  const double radius = companion_spectral_radius(
      [&] {
        std::vector<CMatrix> coeffs;
        for (int i = 0; i < ss.order; ++i)
          coeffs.push_back(ss.coeff_row.block(0, i * ss.dim, ss.dim, ss.dim));
        return coeffs;
      }());
  KalmanState state;
  state.estimate = CVector::Zero(ss.dim * ss.order);
  state.cov = psd_project(stationary_companion_cov(ss, radius));
  state.slot_index = 0;
  return state;
}

std::pair<CVector, KalmanState> predict(const KalmanState& state, const StateSpace& ss) {
  const int d = ss.dim;
  const int p = ss.order;
  const Eigen::Index dp = ss.phi_bar.rows();
  if (state.estimate.size() != dp || state.cov.rows() != dp)
    throw ShapeMismatch("predict: state dims do not match state space");

  KalmanState next;
  // Φ̄·estimate, exploiting the companion structure: the top block is the
  // AR combination, the rest is the shifted-down history.
  next.estimate.resize(dp);
  next.estimate.head(d) = ss.coeff_row * state.estimate;
  if (p > 1) next.estimate.tail(dp - d) = state.estimate.head(dp - d);

  // Φ̄·M·Φ̄ᴴ the same way (apply Φ̄ to rows, then to columns), then add
  // Θ̄ΣΘ̄ᴴ, whose only nonzero block is the leading d×d corner.
  CMatrix a(dp, dp);  // Φ̄·M
  a.topRows(d).noalias() = ss.coeff_row * state.cov;
  if (p > 1) a.bottomRows(dp - d) = state.cov.topRows(dp - d);
  CMatrix b(dp, dp);  // Φ̄·(Φ̄·M)ᴴ = Φ̄·M·Φ̄ᴴ for Hermitian M
  const CMatrix a_adj = a.adjoint();
  b.topRows(d).noalias() = ss.coeff_row * a_adj;
  if (p > 1) b.bottomRows(dp - d) = a_adj.topRows(dp - d);
  next.cov = b;
  next.cov.topLeftCorner(d, d) += ss.innovation_cov;
  next.cov = hermitize(next.cov);
  next.slot_index = state.slot_index;

  return {next.estimate.head(d), std::move(next)};
}

KalmanState correct(const KalmanState& state, const StateSpace& ss, const CVector& y) {
  const int d = ss.dim;
  if (y.size() != ss.meas_dim)
    throw ShapeMismatch("correct: measurement length " + std::to_string(y.size()) +
                        " != " + std::to_string(ss.meas_dim));

  // S = [Ψ̄ 0 … 0] means S·M touches only the leading d rows of M.
  const CMatrix sm = ss.psi_bar * state.cov.topRows(d);          // M_rτ × dp
  CMatrix innov_cov = sm.leftCols(d) * ss.psi_bar.adjoint();     // S·M·Sᴴ
  innov_cov += CMatrix::Identity(ss.meas_dim, ss.meas_dim);
  const CMatrix gain = hermitian_solve(hermitize(innov_cov), sm).adjoint();  // dp × M_rτ

  KalmanState next;
  const CVector residual = y - ss.psi_bar * state.estimate.head(d);
  next.estimate = state.estimate + gain * residual;
  next.cov = hermitize(state.cov - gain * sm);
  next.slot_index = state.slot_index + 1;
  return next;
}

VkfRun run_vkf(const ArModel& model, const PilotBlock& pilot,
               const MeasurementTrace& measurements, int warmup,
               const AutocorrSet* acorr) {
  const StateSpace ss = build_state_space(model, pilot);
  if (warmup < 0) warmup = model.order;
  if (measurements.slots() <= warmup)
    throw TooFewSamples("run_vkf: " + std::to_string(measurements.slots()) +
                        " measurements <= warmup " + std::to_string(warmup));

  KalmanState state = acorr ? init_state(ss, *acorr) : init_state(ss);
  VkfRun run;
  run.warmup = warmup;
  run.predictions.reserve(measurements.slots());
  for (const CVector& y : measurements.y) {
    auto [channel, propagated] = predict(state, ss);
    run.predictions.push_back(std::move(channel));
    state = correct(propagated, ss, y);
  }
  return run;
}

}  // namespace mimopred
