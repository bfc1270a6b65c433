// SPDX-License-Identifier: Apache-2.0
#include "mimopred/scm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mimopred/rng.hpp"

namespace mimopred {

namespace {

constexpr double kSpeedOfLight = 299792458.0;  // m/s
constexpr double kPi = std::numbers::pi;

double deg2rad(double deg) { return deg * kPi / 180.0; }

/// τ-point DFT entry exp(−j·2π·k/τ) with exact values at quarter-circle
/// angles (k·4 divisible by τ), so small-τ pilots are bit-exact.
Complex dft_root(std::int64_t k, int tau) {
  k %= tau;
  if (k < 0) k += tau;
  if ((4 * k) % tau == 0) {
    switch ((4 * k) / tau) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, -1.0};
      case 2: return {-1.0, 0.0};
      case 3: return {0.0, 1.0};
    }
  }
  const double angle = -2.0 * kPi * static_cast<double>(k) / tau;
  return {std::cos(angle), std::sin(angle)};
}

void validate_scenario(const ScmScenario& s) {
  if (s.path_count < 1) throw InvalidScenario("path_count must be >= 1");
  if (s.subpaths_per_path < 1) throw InvalidScenario("subpaths_per_path must be >= 1");
  if (s.bs_rows < 1 || s.bs_cols < 1 || s.ue_antennas < 1)
    throw InvalidScenario("antenna counts must be >= 1");
  if (s.speed_kmh < 0) throw InvalidScenario("speed must be >= 0");
  if (static_cast<int>(s.path_powers.size()) != s.path_count)
    throw InvalidScenario("path_powers size != path_count");
  for (double p : s.path_powers)
    if (!(p >= 0) || !std::isfinite(p)) throw InvalidScenario("negative or non-finite path power");
  auto check_table = [&](const std::vector<std::vector<double>>& tab, const char* name) {
    if (static_cast<int>(tab.size()) != s.path_count)
      throw InvalidScenario(std::string(name) + " outer size != path_count");
    for (const auto& row : tab) {
      if (static_cast<int>(row.size()) != s.subpaths_per_path)
        throw InvalidScenario(std::string(name) + " inner size != subpaths_per_path");
      for (double v : row)
        if (!std::isfinite(v)) throw InvalidScenario(std::string(name) + " has non-finite entry");
    }
  };
  check_table(s.aoa_deg, "aoa_deg");
  check_table(s.aod_deg, "aod_deg");
  check_table(s.subpath_phase_rad, "subpath_phase_rad");
}

}  // namespace

ScenarioPreset umi_like() { return ScenarioPreset{}; }

ScmScenario sample_scenario(std::uint64_t seed, const ScenarioPreset& preset,
                            double speed_kmh) {
  if (speed_kmh < 0) throw InvalidScenario("speed must be >= 0");
  Rng rng(mix_seed({seed, 0x5c30u}));
  ScmScenario s;
  s.bs_rows = preset.bs_rows;
  s.bs_cols = preset.bs_cols;
  s.ue_antennas = preset.ue_antennas;
  s.path_count = preset.path_count;
  s.subpaths_per_path = preset.subpaths_per_path;
  s.speed_kmh = speed_kmh;
  s.carrier_hz = preset.carrier_hz;
  s.slot_seconds = preset.slot_seconds;
  const double lambda = kSpeedOfLight / preset.carrier_hz;
  s.bs_spacing_m = preset.bs_spacing_wavelengths * lambda;
  s.ue_spacing_m = preset.ue_spacing_wavelengths * lambda;
  s.ue_phase_uses_aoa = preset.ue_phase_uses_aoa;
  s.seed = seed;

  // Exponential power profile, renormalized to unit total (the trace is
  // rescaled globally afterwards anyway; relative powers shape the fading).
  s.path_powers.resize(s.path_count);
  double total = 0.0;
  for (int t = 0; t < s.path_count; ++t) {
    s.path_powers[t] = std::exp(-preset.power_decay * t);
    total += s.path_powers[t];
  }
  for (double& p : s.path_powers) p /= total;

  s.travel_angle_deg = rng.uniform(-180.0, 180.0);
  s.aoa_deg.assign(s.path_count, std::vector<double>(s.subpaths_per_path));
  s.aod_deg.assign(s.path_count, std::vector<double>(s.subpaths_per_path));
  s.subpath_phase_rad.assign(s.path_count, std::vector<double>(s.subpaths_per_path));
  const double half_spread = preset.subpath_spread_deg / 2.0;
  for (int t = 0; t < s.path_count; ++t) {
    const double aoa_center = rng.uniform(-preset.bs_sector_deg / 2.0, preset.bs_sector_deg / 2.0);
    const double aod_center = rng.uniform(-preset.ue_sector_deg / 2.0, preset.ue_sector_deg / 2.0);
    for (int l = 0; l < s.subpaths_per_path; ++l) {
      s.aoa_deg[t][l] = aoa_center + rng.uniform(-half_spread, half_spread);
      s.aod_deg[t][l] = aod_center + rng.uniform(-half_spread, half_spread);
      s.subpath_phase_rad[t][l] = rng.uniform(0.0, 2.0 * kPi);
    }
  }
  return s;
}

ChannelTrace generate_trace(const ScmScenario& scenario, int slots) {
  if (slots < 1) throw InvalidScenario("slots must be >= 1");
  validate_scenario(scenario);

  const int mr = scenario.mr();
  const int n = scenario.ue_antennas;
  const double lambda = kSpeedOfLight / scenario.carrier_hz;
  const double wave_number = 2.0 * kPi / lambda;
  const double v_ms = scenario.speed_kmh / 3.6;
  const double theta_v = deg2rad(scenario.travel_angle_deg);

  // Distance of BS element m from the reference element over the
  // rectangular grid (column-major enumeration), and of UE element u
  // along its line.
  std::vector<double> bs_dist(mr);
  for (int m = 0; m < mr; ++m) {
    const int r = m % scenario.bs_rows;
    const int c = m / scenario.bs_rows;
    bs_dist[m] = scenario.bs_spacing_m * std::hypot(static_cast<double>(r),
                                                    static_cast<double>(c));
  }

  // Per-subpath static rank-1 term and Doppler rate (radians per slot).
  struct Subpath {
    CVector bs;      // M_r steering phases × amplitude × subpath phase
    Eigen::RowVectorXcd ue;  // N steering phases
    double omega;    // Doppler phase increment per slot
  };
  std::vector<Subpath> terms;
  terms.reserve(static_cast<std::size_t>(scenario.path_count) *
                scenario.subpaths_per_path);
  for (int t = 0; t < scenario.path_count; ++t) {
    const double amp = std::sqrt(scenario.path_powers[t] /
                                 static_cast<double>(scenario.subpaths_per_path));
    for (int l = 0; l < scenario.subpaths_per_path; ++l) {
      const double aoa = deg2rad(scenario.aoa_deg[t][l]);
      const double aod = deg2rad(scenario.aod_deg[t][l]);
      const double ue_angle = scenario.ue_phase_uses_aoa ? aoa : aod;
      Subpath sp;
      sp.bs.resize(mr);
      const Complex phase = std::polar(amp, scenario.subpath_phase_rad[t][l]);
      for (int m = 0; m < mr; ++m)
        sp.bs(m) = phase * std::polar(1.0, wave_number * bs_dist[m] * std::sin(aoa));
      sp.ue.resize(n);
      for (int u = 0; u < n; ++u)
        sp.ue(u) = std::polar(
            1.0, wave_number * scenario.ue_spacing_m * u * std::sin(ue_angle));
      sp.omega = wave_number * v_ms * std::cos(aod - theta_v) * scenario.slot_seconds;
      terms.push_back(std::move(sp));
    }
  }

  ChannelTrace trace;
  trace.scenario = scenario;
  trace.slots = slots;
  trace.matrices.resize(slots);
  double energy = 0.0;
  for (int i = 0; i < slots; ++i) {
    CMatrix h = CMatrix::Zero(mr, n);
    for (const Subpath& sp : terms) {
      const Complex doppler = std::polar(1.0, sp.omega * static_cast<double>(i));
      h.noalias() += (doppler * sp.bs) * sp.ue;
    }
    energy += h.squaredNorm();
    trace.matrices[i] = std::move(h);
  }
  const double mean_energy = energy / slots;
  const double target = static_cast<double>(mr) * n;
  trace.normalization_gain =
      mean_energy > 0 ? std::sqrt(target / mean_energy) : 1.0;
  for (CMatrix& h : trace.matrices) h *= trace.normalization_gain;
  return trace;
}

PilotBlock dft_pilot(int tau, int n, double rho, int mr) {
  if (tau < 1 || n < 1 || mr < 1) throw BadShape("dft_pilot: dimensions must be >= 1");
  if (tau < n) throw BadShape("dft_pilot: need tau >= N, got tau=" +
                              std::to_string(tau) + " N=" + std::to_string(n));
  if (!(rho >= 0)) throw InvalidScenario("dft_pilot: rho must be >= 0");
  PilotBlock p;
  p.tau = tau;
  p.n = n;
  p.mr = mr;
  p.rho = rho;
  p.psi.resize(tau, n);
  for (int r = 0; r < tau; ++r)
    for (int c = 0; c < n; ++c)
      p.psi(r, c) = dft_root(static_cast<std::int64_t>(r) * c, tau);
  p.psi_bar = kronecker(p.psi, CMatrix::Identity(mr, mr)) * std::sqrt(rho);
  return p;
}

CMatrix PilotBlock::psi_bar_pinv() const {
  if (rho == 0.0) return CMatrix::Zero(psi_bar.cols(), psi_bar.rows());
  return psi_bar.adjoint() / (rho * tau);
}

CVector PilotBlock::ls_estimate(const CVector& y) const {
  if (y.size() != psi_bar.rows())
    throw ShapeMismatch("ls_estimate: y length " + std::to_string(y.size()) +
                        " != " + std::to_string(psi_bar.rows()));
  if (rho == 0.0) return CVector::Zero(psi_bar.cols());
  return (psi_bar.adjoint() * y) / (rho * tau);
}

MeasurementTrace measure(const ChannelTrace& trace, const PilotBlock& pilot,
                         std::uint64_t noise_seed, double noise_variance) {
  if (pilot.n != trace.n())
    throw ShapeMismatch("measure: pilot N " + std::to_string(pilot.n) +
                        " != trace N " + std::to_string(trace.n()));
  if (pilot.mr != trace.mr())
    throw ShapeMismatch("measure: pilot M_r " + std::to_string(pilot.mr) +
                        " != trace M_r " + std::to_string(trace.mr()));
  if (noise_variance < 0) throw InvalidScenario("measure: negative noise variance");

  MeasurementTrace out;
  out.pilot = pilot;
  out.noise_seed = noise_seed;
  out.y.resize(trace.slots);
  Rng rng(mix_seed({noise_seed, 0x6d65u}));
  const double sigma = std::sqrt(noise_variance);
  for (int i = 0; i < trace.slots; ++i) {
    CVector w = rng.complex_normal_vector(pilot.psi_bar.rows());
    out.y[i] = pilot.psi_bar * trace.vec_slot(i) + sigma * w;
  }
  return out;
}

}  // namespace mimopred
