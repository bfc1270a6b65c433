// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mimopred/linalg.hpp"
#include "mimopred/scm.hpp"

namespace mimopred {

/// Precomputed LMMSE denoiser: g̲ = W·y̲ with W = C_hΨ̄ᴴ(Ψ̄C_hΨ̄ᴴ+I)⁻¹.
struct LmmseContext {
  CMatrix c_h;   ///< d×d channel covariance (sampled or exact), PSD
  CMatrix c_y;   ///< M_rτ×M_rτ measurement covariance, PSD
  CMatrix gain;  ///< d×M_rτ
  int dim = 0;       ///< d
  int meas_dim = 0;  ///< M_rτ
};

/// Build the denoiser from measured data: Ĉ_y = (1/N_s)Σ y̲y̲ᴴ over the
/// first N_s slots, Ĉ_h = Ψ̄⁺(Ĉ_y − I)(Ψ̄ᴴ)⁺ projected PSD.
///
/// \throws TooFewSamples if fewer than N_s measurements (or N_s < 1)
LmmseContext build_lmmse(const PilotBlock& pilot, const MeasurementTrace& measurements,
                         int sample_count);

/// Same denoiser from true channels (oracle route for studies): C_h is
/// the sample covariance of the first N_s snapshots.
LmmseContext build_lmmse(const PilotBlock& pilot, const ChannelTrace& trace,
                         int sample_count);

/// Denoiser from an externally supplied channel covariance.
LmmseContext make_lmmse(const PilotBlock& pilot, const CMatrix& c_h);

/// Apply the precomputed gain: g̲ = W·y̲.
///
/// \throws ShapeMismatch if y length != M_rτ
CVector preprocess(const LmmseContext& ctx, const CVector& y);

/// Real input layout: per time index (oldest first), real parts then
/// imaginary parts. Total length 2·I·d.
///
/// \throws ShapeMismatch on inconsistent window entry lengths
Eigen::VectorXd pack_input(const std::vector<CVector>& window);

/// Inverse of the per-vector packing: 2d reals → complex d-vector.
///
/// \throws ShapeMismatch if length is odd
CVector unpack_output(const Eigen::VectorXd& out);

/// Trainer/network hyperparameters. The network is affine end-to-end by
/// default (no activations — nonlinearities worsen this regression task);
/// relu_hidden reproduces the activation ablation.
struct MlpConfig {
  int input_order = 3;        ///< I, consecutive denoised vectors consumed
  int hidden_layers = 2;      ///< L
  int nodes_per_layer = 512;  ///< f_l
  double learning_rate = 0.001;
  int batch_size = 128;
  int epochs = 1000;
  std::uint64_t seed = 0;
  bool relu_hidden = false;
};

/// Dense network parameters plus Adam moment buffers.
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  ///< W_0..W_L
  std::vector<Eigen::VectorXd> biases;   ///< b_0..b_L
  std::vector<Eigen::MatrixXd> m_weights, v_weights;  ///< Adam moments
  std::vector<Eigen::VectorXd> m_biases, v_biases;
  long step = 0;  ///< Adam update counter
  int input_order = 1;
  bool relu_hidden = false;

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
};

/// Per-epoch mean training loss (per-sample, normalized by the complex
/// output dimension).
struct TrainReport {
  std::vector<double> epoch_loss;
};

/// Fresh model with uniform ±√(6/(fan_in+fan_out)) weights, zero biases.
MlpModel init_model(const MlpConfig& config, int input_dim, int output_dim);

/// Affine chain x → W_0x+b_0 → … → W_Lx+b_L (ReLU between hidden layers
/// only when configured).
///
/// \throws ShapeMismatch if input dim mismatches
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& input);

/// \brief Train on a complex vector sequence to predict its next element.
///
/// Sample n: input = packed window (g̲_{n−I+1}..g̲_n), target = g̲_{n+1}.
/// The target is always the (denoised) measurement-domain vector, never a
/// true channel. Loss per sample ‖f(x)−t‖²/d (d = complex output dim);
/// adaptive-moment updates with decay 0.9/0.999, epsilon 1e-8;
/// mini-batches reshuffled each epoch from a seeded stream. Returns the
/// final-epoch model.
///
/// \throws TooFewSamples if sequence length < n_train + I
/// \throws DivergedLoss if the loss becomes non-finite
MlpModel train(const MlpConfig& config, const std::vector<CVector>& sequence,
               int n_train, TrainReport* report = nullptr);

/// One-step prediction from the last I measurements of a window:
/// preprocess each y̲, pack, forward, unpack.
///
/// \throws TooFewSamples if window shorter than I
CVector predict_mlp(const MlpModel& model, const LmmseContext& ctx,
                    const std::vector<CVector>& y_window);

/// Max over parameters of |g_fd − g_analytic|/(|g_analytic|+1e-12) with
/// central differences of step 1e-5. Intended for small models
/// (≤ ~10³ parameters — cost is one forward pass per parameter per side).
double gradient_check(const MlpModel& model, const Eigen::VectorXd& input,
                      const Eigen::VectorXd& target);

}  // namespace mimopred
