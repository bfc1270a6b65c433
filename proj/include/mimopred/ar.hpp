// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mimopred/linalg.hpp"
#include "mimopred/scm.hpp"

namespace mimopred {

enum class AutocorrSource { kExact, kSampled };

/// Condition-number ceiling beyond which a regularized stacked
/// autocorrelation is reported as unusable.
inline constexpr double kMaxStackedCondition = 1e12;

/// Autocorrelation lags R(0..p) of a d-dimensional vector process,
/// plus the regularizer ε applied to the stacked block-Toeplitz form.
struct AutocorrSet {
  int dim = 0;    ///< d = M_r·N
  int order = 0;  ///< p
  std::vector<CMatrix> lags;  ///< R(0), R(1), …, R(p); each d×d
  AutocorrSource source = AutocorrSource::kExact;
  int sample_count = 0;  ///< N_s (stacked windows) when sampled
  double epsilon = 0.0;  ///< added to the stacked form's diagonal

  /// Stacked dp×dp block-Toeplitz covariance R̄_ε: block (a,b) = R(b−a)
  /// with R(−k) = R(k)ᴴ, plus ε·I.
  CMatrix stacked() const;

  /// [R(1) … R(p)], d×dp (the left-hand side row of the normal equations).
  CMatrix lag_row() const;
};

/// Vector AR(p) model h̲_n = Σ Φ_i h̲_{n−i} + u_n, u_n ~ CN(0, Σ).
struct ArModel {
  int order = 0;
  int dim = 0;
  std::vector<CMatrix> coeffs;  ///< Φ_1..Φ_p
  CMatrix innovation_cov;       ///< Σ, Hermitian PSD
  double spectral_radius = 0.0; ///< of the companion form

  bool stable() const { return spectral_radius < 1.0; }
};

/// Default regularizer rule: diagonal loading at the lag-sampling noise
/// floor, 0.3 × (trace(R(0))/d) / sqrt(sample_count). Sampled lag entries
/// fluctuate at roughly power/sqrt(N), and channel autocorrelations are
/// nearly rank-deficient (a few Doppler tones), so loading below that floor
/// lets the Yule-Walker solve amplify noise into unstable coefficients.
double default_epsilon(const CMatrix& r0, int sample_count);

/// Spectral radius of the companion form of Φ_1..Φ_p.
double companion_spectral_radius(const std::vector<CMatrix>& coeffs);

/// \brief Sample the autocorrelation lags from noisy pilot measurements.
///
/// Stacks p consecutive measurement vectors, forms the sample covariance
/// minus the (known) noise covariance, deflates each block through the
/// closed-form pilot pseudo-inverse, and averages all blocks sharing a
/// lag. R(p), absent from the p-window stack, comes from lag-p pairs of
/// per-slot least-squares estimates (no noise deflation needed at lag>0).
/// R(0) is Hermitian-symmetrized.
///
/// \param epsilon  regularizer; negative requests the default rule
/// \param noise_variance  per-entry measurement-noise variance (default 1)
/// \throws TooFewSamples if usable stacked windows < p+1
/// \throws IllConditioned if cond(R̄_ε) > 1e12 even after regularization
AutocorrSet sample_autocorr(const MeasurementTrace& measurements, int order,
                            double epsilon = -1.0, double noise_variance = 1.0);

/// Sample-mean autocorrelation from true channel snapshots (test/oracle
/// utility): R(i) = (1/(slots−i))·Σ_n h̲_n h̲_{n−i}ᴴ.
///
/// \throws TooFewSamples if snapshots < p+1
AutocorrSet exact_autocorr(const std::vector<CVector>& snapshots, int order);
AutocorrSet exact_autocorr(const ChannelTrace& trace, int order);

/// \brief Yule-Walker solve.
///
/// [Φ_1 … Φ_p] = [R(1) … R(p)]·R̄_ε⁻¹ and Σ = R(0) − Σ Φ_i R(i)ᴴ, with Σ
/// projected onto the Hermitian PSD cone. The companion spectral radius
/// is computed and recorded; radius ≥ 1+1e-6 from stationary data is a
/// warning, not an error.
///
/// \throws IllConditioned / Singular propagated from the solve
ArModel yule_walker(const AutocorrSet& acorr);

/// Generate `slots` snapshots of the AR process after a burn-in of 10·p
/// slots, innovations drawn CN(0, Σ) deterministically from `seed`.
///
/// \throws UnstableModel if the companion spectral radius ≥ 1
std::vector<CVector> simulate_ar(const ArModel& model, int slots, std::uint64_t seed);

}  // namespace mimopred
