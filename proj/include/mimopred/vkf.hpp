// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "mimopred/ar.hpp"
#include "mimopred/linalg.hpp"
#include "mimopred/scm.hpp"

namespace mimopred {

/// Order-1 companion rewrite of the AR(p) model plus the measurement map.
///
/// phi_bar carries Φ_1..Φ_p in its first block row and identity blocks on
/// the first sub-block-diagonal; theta_bar selects the leading d entries
/// (Θ̄ᵀΘ̄ = I_d); s = [Ψ̄ 0 … 0] so only the newest channel is observed.
struct StateSpace {
  CMatrix phi_bar;    ///< dp×dp
  CMatrix theta_bar;  ///< dp×d
  CMatrix s;          ///< M_rτ×dp
  CMatrix innovation_cov;  ///< Σ, d×d
  int dim = 0;    ///< d = M_r·N
  int order = 0;  ///< p
  int meas_dim = 0;  ///< M_r·τ

  /// First block row [Φ_1 … Φ_p] (d×dp), cached so the predict step can
  /// exploit the companion structure instead of full dp×dp products.
  CMatrix coeff_row;
  /// Ψ̄ (M_rτ×d), the only nonzero block of s.
  CMatrix psi_bar;
};

/// Filter state: stacked estimate, error covariance, processed-slot count.
struct KalmanState {
  CVector estimate;  ///< length dp
  CMatrix cov;       ///< dp×dp, Hermitian PSD (re-symmetrized every step)
  long slot_index = 0;
};

/// One-step-ahead predictions for every slot of a measurement stream.
/// predictions[i] is ĥ̲_{i|i−1} (from measurements 0..i−1); entries below
/// `warmup` are emitted but flagged as pre-window output.
struct VkfRun {
  std::vector<CVector> predictions;
  int warmup = 0;
};

/// Assemble the companion state space from a fitted model and pilot.
///
/// \throws ShapeMismatch if model dim != pilot M_r·N
StateSpace build_state_space(const ArModel& model, const PilotBlock& pilot);

/// Initial state: zero estimate and M = the stacked autocorrelation R̄_ε
/// (projected PSD so the covariance invariant holds for sampled sets).
///
/// \throws ShapeMismatch if acorr dims disagree with the state space
KalmanState init_state(const StateSpace& ss, const AutocorrSet& acorr);

/// Initial state when no autocorrelation set is available (e.g. a model
/// loaded from disk): M = the model-implied stationary companion
/// covariance (doubling Lyapunov iteration), or identity when the model
/// is too close to instability for the series to converge.
KalmanState init_state(const StateSpace& ss);

/// Time update: propagate through Φ̄ and add the innovation covariance.
/// Returns the predicted channel (leading d entries of the propagated
/// estimate) and the propagated state.
std::pair<CVector, KalmanState> predict(const KalmanState& state, const StateSpace& ss);

/// Measurement update with unit noise covariance:
/// K = M·Sᴴ(S·M·Sᴴ+I)⁻¹, estimate += K(y − S·estimate), M = (I−KS)M,
/// then Hermitian re-symmetrization.
///
/// \throws ShapeMismatch if y length != M_r·τ
/// \throws Singular propagated from the gain solve
KalmanState correct(const KalmanState& state, const StateSpace& ss, const CVector& y);

/// Run the full filter over a measurement stream. warmup < 0 selects the
/// default of p slots. `acorr` (optional) supplies the initial covariance.
///
/// \throws TooFewSamples if measurements length <= warmup
VkfRun run_vkf(const ArModel& model, const PilotBlock& pilot,
               const MeasurementTrace& measurements, int warmup = -1,
               const AutocorrSet* acorr = nullptr);

}  // namespace mimopred
