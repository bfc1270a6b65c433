// SPDX-License-Identifier: Apache-2.0
#include "mimopred/ar.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "mimopred/rng.hpp"

namespace mimopred {

namespace {

void check_lag_shapes(const AutocorrSet& a) {
  if (a.dim < 1 || a.order < 1)
    throw ShapeMismatch("autocorr: dim and order must be >= 1");
  if (static_cast<int>(a.lags.size()) != a.order + 1)
    throw ShapeMismatch("autocorr: expected " + std::to_string(a.order + 1) +
                        " lag matrices, got " + std::to_string(a.lags.size()));
  for (const CMatrix& r : a.lags)
    if (r.rows() != a.dim || r.cols() != a.dim)
      throw ShapeMismatch("autocorr: lag matrix is not dim x dim");
}

/// Hermitian eigenvalue-based condition number of the regularized stack.
double stacked_condition(const CMatrix& stacked) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitize(stacked),
                                             Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw EigenFailure("stacked_condition: eigensolver failed");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double m = std::abs(eig.eigenvalues()(i));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

CMatrix AutocorrSet::stacked() const {
  check_lag_shapes(*this);
  const int p = order;
  const int d = dim;
  CMatrix out(d * p, d * p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      const int k = b - a;
      if (k >= 0)
        out.block(a * d, b * d, d, d) = lags[k];
      else
        out.block(a * d, b * d, d, d) = lags[-k].adjoint();
    }
  out += epsilon * CMatrix::Identity(d * p, d * p);
  return out;
}

CMatrix AutocorrSet::lag_row() const {
  check_lag_shapes(*this);
  CMatrix out(dim, dim * order);
  for (int i = 1; i <= order; ++i) out.block(0, (i - 1) * dim, dim, dim) = lags[i];
  return out;
}

double default_epsilon(const CMatrix& r0, int sample_count) {
  const double mean_power = r0.trace().real() / static_cast<double>(r0.rows());
  return 0.3 * mean_power / std::sqrt(static_cast<double>(std::max(sample_count, 1)));
}

double companion_spectral_radius(const std::vector<CMatrix>& coeffs) {
  const int p = static_cast<int>(coeffs.size());
  if (p == 0) return 0.0;
  const int d = static_cast<int>(coeffs[0].rows());
  CMatrix companion = CMatrix::Zero(d * p, d * p);
  for (int i = 0; i < p; ++i) companion.block(0, i * d, d, d) = coeffs[i];
  for (int i = 1; i < p; ++i)
    companion.block(i * d, (i - 1) * d, d, d) = CMatrix::Identity(d, d);
  Eigen::ComplexEigenSolver<CMatrix> eig(companion, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success)
    throw EigenFailure("companion_spectral_radius: eigensolver failed");
  double radius = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    radius = std::max(radius, std::abs(eig.eigenvalues()(i)));
  return radius;
}

AutocorrSet sample_autocorr(const MeasurementTrace& measurements, int order,
                            double epsilon, double noise_variance) {
  if (order < 1) throw ShapeMismatch("sample_autocorr: order must be >= 1");
  const int slots = measurements.slots();
  const int p = order;
  const int n_windows = slots - p + 1;  // stacked windows ỹ_{p−1} … ỹ_{slots−1}
  if (n_windows < p + 1)
    throw TooFewSamples("sample_autocorr: " + std::to_string(n_windows) +
                        " stacked windows, need >= " + std::to_string(p + 1));
  const PilotBlock& pilot = measurements.pilot;
  const int dy = static_cast<int>(pilot.psi_bar.rows());  // M_r·τ
  const int d = static_cast<int>(pilot.psi_bar.cols());   // M_r·N

  // Sample covariance of the stacked measurement vector
  // ỹ_n = [y_nᵀ, y_{n−1}ᵀ, …, y_{n−p+1}ᵀ]ᵀ.
  CMatrix stack_cov = CMatrix::Zero(dy * p, dy * p);
  CVector window(dy * p);
  for (int n = p - 1; n < slots; ++n) {
    for (int a = 0; a < p; ++a) window.segment(a * dy, dy) = measurements.y[n - a];
    stack_cov.noalias() += window * window.adjoint();
  }
  stack_cov /= static_cast<double>(n_windows);

  // Deflate each block through the closed-form pilot pseudo-inverse and
  // average all blocks sharing a lag; noise enters diagonal blocks only.
  const CMatrix pinv = pilot.psi_bar_pinv();
  AutocorrSet out;
  out.dim = d;
  out.order = p;
  out.source = AutocorrSource::kSampled;
  out.sample_count = n_windows;
  out.lags.assign(p + 1, CMatrix::Zero(d, d));
  for (int k = 0; k < p; ++k) {
    CMatrix acc = CMatrix::Zero(dy, dy);
    for (int a = 0; a + k < p; ++a) acc += stack_cov.block(a * dy, (a + k) * dy, dy, dy);
    acc /= static_cast<double>(p - k);
    if (k == 0) acc -= noise_variance * CMatrix::Identity(dy, dy);
    out.lags[k] = pinv * acc * pinv.adjoint();
  }

  // Lag p never appears inside a p-window stack; estimate it from
  // LS-estimate pairs p slots apart (noise is independent across slots,
  // so no deflation term arises at lag > 0).
  CMatrix lag_p = CMatrix::Zero(d, d);
  for (int n = p; n < slots; ++n)
    lag_p.noalias() += measurements.pilot.ls_estimate(measurements.y[n]) *
                       measurements.pilot.ls_estimate(measurements.y[n - p]).adjoint();
  out.lags[p] = lag_p / static_cast<double>(slots - p);

  out.lags[0] = hermitize(out.lags[0]);
  out.epsilon = epsilon < 0 ? default_epsilon(out.lags[0], n_windows) : epsilon;

  const double cond = stacked_condition(out.stacked());
  if (cond > kMaxStackedCondition)
    throw IllConditioned("sample_autocorr: stacked covariance condition " +
                         std::to_string(cond) + " exceeds 1e12 after epsilon " +
                         std::to_string(out.epsilon));
  return out;
}

AutocorrSet exact_autocorr(const std::vector<CVector>& snapshots, int order) {
  if (order < 1) throw ShapeMismatch("exact_autocorr: order must be >= 1");
  const int slots = static_cast<int>(snapshots.size());
  if (slots < order + 1)
    throw TooFewSamples("exact_autocorr: " + std::to_string(slots) +
                        " snapshots, need >= " + std::to_string(order + 1));
  const int d = static_cast<int>(snapshots[0].size());
  AutocorrSet out;
  out.dim = d;
  out.order = order;
  out.source = AutocorrSource::kExact;
  out.sample_count = slots;
  out.epsilon = 0.0;
  out.lags.assign(order + 1, CMatrix::Zero(d, d));
  for (int i = 0; i <= order; ++i) {
    CMatrix acc = CMatrix::Zero(d, d);
    for (int n = i; n < slots; ++n)
      acc.noalias() += snapshots[n] * snapshots[n - i].adjoint();
    out.lags[i] = acc / static_cast<double>(slots - i);
  }
  out.lags[0] = hermitize(out.lags[0]);
  return out;
}

AutocorrSet exact_autocorr(const ChannelTrace& trace, int order) {
  std::vector<CVector> snaps;
  snaps.reserve(trace.slots);
  for (int i = 0; i < trace.slots; ++i) snaps.push_back(trace.vec_slot(i));
  return exact_autocorr(snaps, order);
}

ArModel yule_walker(const AutocorrSet& acorr) {
  check_lag_shapes(acorr);
  const int d = acorr.dim;
  const int p = acorr.order;

  // [Φ_1 … Φ_p]·R̄_ε = [R(1) … R(p)]  ⇔  R̄_ε·Xᴴ = lag_rowᴴ (R̄ Hermitian).
  const CMatrix stacked = acorr.stacked();
  CMatrix coeff_row;
  try {
    coeff_row = hermitian_solve(stacked, CMatrix(acorr.lag_row().adjoint())).adjoint();
  } catch (const Singular& e) {
    throw IllConditioned(std::string("yule_walker: ") + e.what());
  }

  ArModel model;
  model.order = p;
  model.dim = d;
  model.coeffs.reserve(p);
  for (int i = 0; i < p; ++i)
    model.coeffs.push_back(coeff_row.block(0, i * d, d, d));

  CMatrix sigma = acorr.lags[0];
  for (int i = 1; i <= p; ++i)
    sigma -= model.coeffs[i - 1] * acorr.lags[i].adjoint();
  model.innovation_cov = psd_project(sigma);

  model.spectral_radius = companion_spectral_radius(model.coeffs);
  if (model.spectral_radius >= 1.0 + 1e-6)
    std::cerr << "warning: fitted AR(" << p << ") model has companion spectral radius "
              << model.spectral_radius << " >= 1; predictions may diverge\n";
  return model;
}

std::vector<CVector> simulate_ar(const ArModel& model, int slots, std::uint64_t seed) {
  if (slots < 1) throw ShapeMismatch("simulate_ar: slots must be >= 1");
  if (model.spectral_radius >= 1.0)
    throw UnstableModel("simulate_ar: spectral radius " +
                        std::to_string(model.spectral_radius) + " >= 1");
  const int d = model.dim;
  const int p = model.order;

  // Σ^{1/2} via eigendecomposition (Σ may be singular after projection).
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitize(model.innovation_cov));
  if (eig.info() != Eigen::Success)
    throw EigenFailure("simulate_ar: covariance eigendecomposition failed");
  Eigen::VectorXd vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    vals(i) = std::sqrt(std::max(vals(i), 0.0));
  const CMatrix root = eig.eigenvectors() * vals.asDiagonal();

  Rng rng(mix_seed({seed, 0xa25eedULL}));
  const int burn_in = 10 * p;
  std::vector<CVector> history;  // most recent last
  history.reserve(burn_in + slots);
  std::vector<CVector> out;
  out.reserve(slots);
  for (int n = 0; n < burn_in + slots; ++n) {
    CVector h = root * rng.complex_normal_vector(d);
    for (int i = 1; i <= p; ++i) {
      const int idx = n - i;
      if (idx >= 0) h.noalias() += model.coeffs[i - 1] * history[idx];
    }
    history.push_back(h);
    if (n >= burn_in) out.push_back(h);
  }
  return out;
}

}  // namespace mimopred
