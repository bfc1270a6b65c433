// SPDX-License-Identifier: Apache-2.0
#include "mimopred/mlp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mimopred/rng.hpp"

namespace mimopred {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

LmmseContext finish_context(const PilotBlock& pilot, const CMatrix& c_h_psd,
                            const CMatrix& c_y_psd) {
  LmmseContext ctx;
  ctx.c_h = c_h_psd;
  ctx.c_y = c_y_psd;
  ctx.dim = static_cast<int>(pilot.psi_bar.cols());
  ctx.meas_dim = static_cast<int>(pilot.psi_bar.rows());
  // W = C_hΨ̄ᴴ(Ψ̄C_hΨ̄ᴴ+I)⁻¹, computed as a Hermitian solve against Wᴴ.
  CMatrix denom = pilot.psi_bar * c_h_psd * pilot.psi_bar.adjoint();
  denom += CMatrix::Identity(ctx.meas_dim, ctx.meas_dim);
  ctx.gain =
      hermitian_solve(hermitize(denom), CMatrix(pilot.psi_bar * c_h_psd)).adjoint();
  return ctx;
}

/// Per-layer forward pass keeping pre-activations (z) and activations (a).
void forward_pass(const MlpModel& model, const Eigen::MatrixXd& input,
                  std::vector<Eigen::MatrixXd>& zs, std::vector<Eigen::MatrixXd>& as) {
  const int layers = static_cast<int>(model.weights.size());
  as.assign(layers + 1, {});
  zs.assign(layers + 1, {});  // zs[0] unused
  as[0] = input;
  for (int l = 0; l < layers; ++l) {
    zs[l + 1] = (model.weights[l] * as[l]).colwise() + model.biases[l];
    if (model.relu_hidden && l + 1 < layers)
      as[l + 1] = zs[l + 1].cwiseMax(0.0);
    else
      as[l + 1] = zs[l + 1];
  }
}

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Backprop of the normalized squared loss; `delta` enters as dL/d(output).
Gradients backward_pass(const MlpModel& model, const std::vector<Eigen::MatrixXd>& zs,
                        const std::vector<Eigen::MatrixXd>& as,
                        Eigen::MatrixXd delta) {
  const int layers = static_cast<int>(model.weights.size());
  Gradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  for (int l = layers - 1; l >= 0; --l) {
    g.weights[l] = delta * as[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = model.weights[l].transpose() * delta;
      if (model.relu_hidden)
        delta = delta.cwiseProduct((zs[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

void adam_update(MlpModel& model, const Gradients& g, double lr) {
  model.step += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(model.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(model.step));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    auto& mw = model.m_weights[l];
    auto& vw = model.v_weights[l];
    mw = kBeta1 * mw + (1.0 - kBeta1) * g.weights[l];
    vw = kBeta2 * vw.array() + (1.0 - kBeta2) * g.weights[l].array().square();
    model.weights[l].array() -=
        lr * (mw.array() / bc1) / ((vw.array() / bc2).sqrt() + kAdamEps);
    auto& mb = model.m_biases[l];
    auto& vb = model.v_biases[l];
    mb = kBeta1 * mb + (1.0 - kBeta1) * g.biases[l];
    vb = kBeta2 * vb.array() + (1.0 - kBeta2) * g.biases[l].array().square();
    model.biases[l].array() -=
        lr * (mb.array() / bc1) / ((vb.array() / bc2).sqrt() + kAdamEps);
  }
}

/// Normalized squared loss for a single sample: ‖f(x)−t‖²/d, d = complex
/// output dimension (half the real output length).
double sample_loss(const MlpModel& model, const Eigen::VectorXd& input,
                   const Eigen::VectorXd& target) {
  const Eigen::VectorXd out = forward(model, input);
  return (out - target).squaredNorm() / (static_cast<double>(model.output_dim()) / 2.0);
}

}  // namespace

LmmseContext build_lmmse(const PilotBlock& pilot, const MeasurementTrace& measurements,
                         int sample_count) {
  if (sample_count < 1 || measurements.slots() < sample_count)
    throw TooFewSamples("build_lmmse: need " + std::to_string(sample_count) +
                        " measurements, have " + std::to_string(measurements.slots()));
  const int dy = static_cast<int>(pilot.psi_bar.rows());
  CMatrix c_y = CMatrix::Zero(dy, dy);
  for (int i = 0; i < sample_count; ++i)
    c_y.noalias() += measurements.y[i] * measurements.y[i].adjoint();
  c_y /= static_cast<double>(sample_count);
  const CMatrix pinv = pilot.psi_bar_pinv();
  const CMatrix c_h = psd_project(
      pinv * (c_y - CMatrix::Identity(dy, dy)) * pinv.adjoint());
  return finish_context(pilot, c_h, psd_project(c_y));
}

LmmseContext build_lmmse(const PilotBlock& pilot, const ChannelTrace& trace,
                         int sample_count) {
  if (sample_count < 1 || trace.slots < sample_count)
    throw TooFewSamples("build_lmmse: need " + std::to_string(sample_count) +
                        " snapshots, have " + std::to_string(trace.slots));
  const int d = static_cast<int>(pilot.psi_bar.cols());
  CMatrix c_h = CMatrix::Zero(d, d);
  for (int i = 0; i < sample_count; ++i) {
    const CVector h = trace.vec_slot(i);
    c_h.noalias() += h * h.adjoint();
  }
  c_h /= static_cast<double>(sample_count);
  const CMatrix c_h_psd = psd_project(c_h);
  const int dy = static_cast<int>(pilot.psi_bar.rows());
  const CMatrix c_y = pilot.psi_bar * c_h_psd * pilot.psi_bar.adjoint() +
                      CMatrix::Identity(dy, dy);
  return finish_context(pilot, c_h_psd, hermitize(c_y));
}

LmmseContext make_lmmse(const PilotBlock& pilot, const CMatrix& c_h) {
  if (c_h.rows() != pilot.psi_bar.cols())
    throw ShapeMismatch("make_lmmse: covariance dim != pilot M_r*N");
  const CMatrix c_h_psd = psd_project(c_h);
  const int dy = static_cast<int>(pilot.psi_bar.rows());
  const CMatrix c_y = pilot.psi_bar * c_h_psd * pilot.psi_bar.adjoint() +
                      CMatrix::Identity(dy, dy);
  return finish_context(pilot, c_h_psd, hermitize(c_y));
}

CVector preprocess(const LmmseContext& ctx, const CVector& y) {
  if (y.size() != ctx.meas_dim)
    throw ShapeMismatch("preprocess: y length " + std::to_string(y.size()) +
                        " != " + std::to_string(ctx.meas_dim));
  return ctx.gain * y;
}

Eigen::VectorXd pack_input(const std::vector<CVector>& window) {
  if (window.empty()) throw ShapeMismatch("pack_input: empty window");
  const Eigen::Index d = window[0].size();
  Eigen::VectorXd out(2 * static_cast<Eigen::Index>(window.size()) * d);
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (window[i].size() != d)
      throw ShapeMismatch("pack_input: inconsistent window entry lengths");
    out.segment(2 * static_cast<Eigen::Index>(i) * d, d) = window[i].real();
    out.segment(2 * static_cast<Eigen::Index>(i) * d + d, d) = window[i].imag();
  }
  return out;
}

CVector unpack_output(const Eigen::VectorXd& out) {
  if (out.size() % 2 != 0) throw ShapeMismatch("unpack_output: odd length");
  const Eigen::Index d = out.size() / 2;
  CVector v(d);
  v.real() = out.head(d);
  v.imag() = out.tail(d);
  return v;
}

MlpModel init_model(const MlpConfig& config, int input_dim, int output_dim) {
  if (config.input_order < 1 || config.hidden_layers < 1 || config.nodes_per_layer < 1)
    throw InvalidScenario("init_model: orders/widths must be >= 1");
  if (!(config.learning_rate > 0))
    throw InvalidScenario("init_model: learning rate must be > 0");
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int l = 0; l < config.hidden_layers; ++l) dims.push_back(config.nodes_per_layer);
  dims.push_back(output_dim);

  MlpModel model;
  model.input_order = config.input_order;
  model.relu_hidden = config.relu_hidden;
  Rng rng(mix_seed({config.seed, 0x1417ULL}));
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    model.m_weights.push_back(Eigen::MatrixXd::Zero(fan_out, fan_in));
    model.v_weights.push_back(Eigen::MatrixXd::Zero(fan_out, fan_in));
    model.m_biases.push_back(Eigen::VectorXd::Zero(fan_out));
    model.v_biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.input_dim())
    throw ShapeMismatch("forward: input length " + std::to_string(input.size()) +
                        " != " + std::to_string(model.input_dim()));
  std::vector<Eigen::MatrixXd> zs, as;
  forward_pass(model, input, zs, as);
  return as.back().col(0);
}

MlpModel train(const MlpConfig& config, const std::vector<CVector>& sequence,
               int n_train, TrainReport* report) {
  const int I = config.input_order;
  if (n_train < 1) throw TooFewSamples("train: n_train must be >= 1");
  if (static_cast<int>(sequence.size()) < n_train + I)
    throw TooFewSamples("train: sequence length " + std::to_string(sequence.size()) +
                        " < n_train + I = " + std::to_string(n_train + I));
  const Eigen::Index d = sequence[0].size();
  for (const CVector& g : sequence)
    if (g.size() != d) throw ShapeMismatch("train: inconsistent sequence entry lengths");

  const int in_dim = static_cast<int>(2 * I * d);
  const int out_dim = static_cast<int>(2 * d);
  MlpModel model = init_model(config, in_dim, out_dim);

  // Dataset: window ending at n = I−1+s predicts element n+1.
  Eigen::MatrixXd inputs(in_dim, n_train);
  Eigen::MatrixXd targets(out_dim, n_train);
  std::vector<CVector> window(I);
  for (int s = 0; s < n_train; ++s) {
    const int n = I - 1 + s;
    for (int i = 0; i < I; ++i) window[i] = sequence[n - I + 1 + i];
    inputs.col(s) = pack_input(window);
    targets.col(s) = pack_input({sequence[n + 1]});
  }

  std::vector<int> perm(n_train);
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffle_rng(mix_seed({config.seed, 0x5433ffULL}));
  const double d_complex = static_cast<double>(out_dim) / 2.0;
  if (report) report->epoch_loss.clear();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates from the explicit stream (fully deterministic).
    for (int i = n_train - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.next_u64() %
                                     static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    double epoch_loss_sum = 0.0;
    for (int start = 0; start < n_train; start += config.batch_size) {
      const int b = std::min(config.batch_size, n_train - start);
      Eigen::MatrixXd xb(in_dim, b), tb(out_dim, b);
      for (int i = 0; i < b; ++i) {
        xb.col(i) = inputs.col(perm[start + i]);
        tb.col(i) = targets.col(perm[start + i]);
      }
      std::vector<Eigen::MatrixXd> zs, as;
      forward_pass(model, xb, zs, as);
      const Eigen::MatrixXd diff = as.back() - tb;
      const double loss = diff.squaredNorm() / (d_complex * b);
      if (!std::isfinite(loss))
        throw DivergedLoss("train: loss became non-finite at epoch " +
                           std::to_string(epoch));
      epoch_loss_sum += loss * b;
      const Gradients grads =
          backward_pass(model, zs, as, (2.0 / (d_complex * b)) * diff);
      adam_update(model, grads, config.learning_rate);
    }
    if (report) report->epoch_loss.push_back(epoch_loss_sum / n_train);
  }
  return model;
}

CVector predict_mlp(const MlpModel& model, const LmmseContext& ctx,
                    const std::vector<CVector>& y_window) {
  const int I = model.input_order;
  if (static_cast<int>(y_window.size()) < I)
    throw TooFewSamples("predict_mlp: window of " + std::to_string(y_window.size()) +
                        " < input order " + std::to_string(I));
  std::vector<CVector> gs(I);
  for (int i = 0; i < I; ++i)
    gs[i] = preprocess(ctx, y_window[y_window.size() - I + i]);
  return unpack_output(forward(model, pack_input(gs)));
}

double gradient_check(const MlpModel& model, const Eigen::VectorXd& input,
                      const Eigen::VectorXd& target) {
  const double d_complex = static_cast<double>(model.output_dim()) / 2.0;
  std::vector<Eigen::MatrixXd> zs, as;
  forward_pass(model, input, zs, as);
  const Eigen::MatrixXd diff = as.back() - Eigen::MatrixXd(target);
  const Gradients analytic = backward_pass(model, zs, as, (2.0 / d_complex) * diff);

  constexpr double kStep = 1e-5;
  double worst = 0.0;
  MlpModel probe = model;
  auto check_entry = [&](double& entry, double g_analytic) {
    const double saved = entry;
    entry = saved + kStep;
    const double up = sample_loss(probe, input, target);
    entry = saved - kStep;
    const double down = sample_loss(probe, input, target);
    entry = saved;
    const double g_fd = (up - down) / (2.0 * kStep);
    worst = std::max(worst, std::abs(g_fd - g_analytic) / (std::abs(g_analytic) + 1e-12));
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c)
      for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r)
        check_entry(probe.weights[l](r, c), analytic.weights[l](r, c));
    for (Eigen::Index r = 0; r < probe.biases[l].size(); ++r)
      check_entry(probe.biases[l](r), analytic.biases[l](r));
  }
  return worst;
}

}  // namespace mimopred
