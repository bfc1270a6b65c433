// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mimopred/linalg.hpp"

namespace mimopred {

/// Spatial-channel-model scenario: array geometry, per-path/subpath
/// parameters, mobility, and timing. Together with `slots` this fully
/// determines a channel trace (generation itself draws no randomness;
/// all random quantities live here, produced by sample_scenario).
struct ScmScenario {
  int bs_rows = 1;        ///< rectangular BS array rows
  int bs_cols = 1;        ///< rectangular BS array cols (M_r = rows·cols)
  int ue_antennas = 1;    ///< N, uniform linear array at the UE
  int path_count = 1;     ///< T
  int subpaths_per_path = 1;  ///< L_s

  std::vector<double> path_powers;  ///< P_t, linear, length T

  /// Per-subpath angles/phases, indexed [t][l].
  std::vector<std::vector<double>> aoa_deg;
  std::vector<std::vector<double>> aod_deg;
  std::vector<std::vector<double>> subpath_phase_rad;

  double speed_kmh = 0.0;
  double travel_angle_deg = 0.0;
  double carrier_hz = 2.3e9;
  double slot_seconds = 0.040;
  double bs_spacing_m = 0.0;  ///< element pitch of the BS grid
  double ue_spacing_m = 0.0;  ///< element pitch of the UE line

  /// The source model writes the UE-side array phase with the arrival
  /// angle; the physically conventional choice is the departure angle.
  /// Default false = departure angle; true reproduces the literal form.
  bool ue_phase_uses_aoa = false;

  std::uint64_t seed = 0;  ///< sampler seed that produced this scenario

  int mr() const { return bs_rows * bs_cols; }
  int dim() const { return mr() * ue_antennas; }
};

/// Time-ordered sequence of M_r×N channel matrices H_n, one per slot,
/// globally scaled so the sample mean of ‖vec(H_n)‖² equals M_r·N.
struct ChannelTrace {
  ScmScenario scenario;
  int slots = 0;
  std::vector<CMatrix> matrices;
  double normalization_gain = 1.0;  ///< scalar applied to every H_n

  int mr() const { return scenario.mr(); }
  int n() const { return scenario.ue_antennas; }
  int dim() const { return scenario.dim(); }
  /// vec(H_i), column-major.
  CVector vec_slot(int i) const { return vec(matrices.at(i)); }
};

/// DFT pilot block: Ψ (τ×N, ΨᵀΨ* = τI_N exactly) and the cached
/// stacked form Ψ̄ = √ρ·(Ψ ⊗ I_{M_r}).
struct PilotBlock {
  int tau = 0;
  int n = 0;
  int mr = 0;
  double rho = 1.0;  ///< linear SNR
  CMatrix psi;       ///< τ×N
  CMatrix psi_bar;   ///< M_rτ × M_rN

  /// Closed-form pseudo-inverse Ψ̄⁺ = (1/(ρτ))·Ψ̄ᴴ, valid because the
  /// pilot columns are orthogonal. Zero matrix when ρ = 0.
  CMatrix psi_bar_pinv() const;

  /// Least-squares channel estimate Ψ̄⁺·y.
  CVector ls_estimate(const CVector& y) const;
};

/// Noisy pilot measurements y̲_n = Ψ̄·h̲_n + w̲_n, one per trace slot.
struct MeasurementTrace {
  PilotBlock pilot;
  std::vector<CVector> y;
  std::uint64_t noise_seed = 0;

  int slots() const { return static_cast<int>(y.size()); }
};

/// Tunable knobs of the simplified urban-microcell scenario sampler.
/// Defaults follow the full-scale setup (8×8 grid, N=2, 6 paths of 20
/// subpaths, exponential power profile, ±60° BS sector, 2° subpath
/// spread, half-wavelength pitch, 2.3 GHz carrier, 40 ms slots).
struct ScenarioPreset {
  int bs_rows = 8;
  int bs_cols = 8;
  int ue_antennas = 2;
  int path_count = 6;
  int subpaths_per_path = 20;
  double power_decay = 0.5;         ///< nats per path index before renormalization
  double bs_sector_deg = 120.0;     ///< AoA drawn uniform in ±sector/2
  double ue_sector_deg = 360.0;     ///< AoD drawn uniform in ±sector/2
  double subpath_spread_deg = 2.0;  ///< per-path spread across subpaths
  double carrier_hz = 2.3e9;
  double slot_seconds = 0.040;
  double bs_spacing_wavelengths = 0.5;
  double ue_spacing_wavelengths = 0.5;
  bool ue_phase_uses_aoa = false;
};

/// Preset named after the environment it approximates.
ScenarioPreset umi_like();

/// Draw a deterministic scenario: per-path center angles uniform in the
/// configured sectors, subpath offsets uniform within the spread,
/// subpath phases uniform in [0, 2π), travel direction uniform.
ScmScenario sample_scenario(std::uint64_t seed, const ScenarioPreset& preset,
                            double speed_kmh);

/// Generate `slots` channel matrices from the scenario and normalize the
/// average vectorized-channel energy to M_r·N.
///
/// \throws InvalidScenario for zero paths/subpaths, negative powers or
///         speed, or inconsistent angle-table shapes
ChannelTrace generate_trace(const ScmScenario& scenario, int slots);

/// Build the DFT pilot block: Ψ = first N columns of the τ-point DFT
/// matrix. Entries at quarter-circle angles are exact, so ΨᵀΨ* = τI_N
/// holds bit-exactly for the pilot lengths used here.
///
/// \throws BadShape if τ < N or τ < 1
PilotBlock dft_pilot(int tau, int n, double rho, int mr);

/// Synthesize measurements y̲_n = Ψ̄·h̲_n + w̲_n with w̲_n i.i.d.
/// CN(0, noise_variance·I), deterministic given noise_seed.
/// noise_variance = 0 is the exact noise-free hook used in tests.
///
/// \throws ShapeMismatch if the pilot and trace dimensions disagree
MeasurementTrace measure(const ChannelTrace& trace, const PilotBlock& pilot,
                         std::uint64_t noise_seed, double noise_variance = 1.0);

}  // namespace mimopred
