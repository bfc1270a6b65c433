// SPDX-License-Identifier: Apache-2.0
#include "mimopred/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mimopred/rng.hpp"

namespace mimopred {

namespace {

double quantile(std::vector<double> sorted, double q) {
  // sorted must be ascending; linear interpolation between order stats.
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

double satc(const CVector& h_prev, const CVector& h_curr) {
  if (h_prev.size() != h_curr.size())
    throw ShapeMismatch("satc: snapshot lengths differ");
  const double n_prev = h_prev.norm();
  const double n_curr = h_curr.norm();
  if (n_prev == 0.0 || n_curr == 0.0) throw ZeroVector("satc: zero-norm snapshot");
  const double eta = (h_prev.dot(h_curr)).real() / (n_prev * n_curr);
  return std::clamp(eta, -1.0, 1.0);
}

double satc_window(const std::vector<CVector>& snapshots) {
  if (snapshots.size() < 2)
    throw TooFewSamples("satc_window: need at least two snapshots");
  double sum = 0.0;
  for (std::size_t i = 1; i < snapshots.size(); ++i)
    sum += satc(snapshots[i - 1], snapshots[i]);
  return sum / static_cast<double>(snapshots.size() - 1);
}

double classify_eta(const MobilityThresholds& thresholds, double eta) {
  if (thresholds.entries.empty())
    throw InvalidScenario("classify_eta: empty thresholds");
  for (const auto& e : thresholds.entries)
    if (eta >= e.eta_threshold) return e.speed_class_kmh;
  return thresholds.entries.back().speed_class_kmh;
}

double estimate_speed_class(const ChannelTrace& trace,
                            const MobilityThresholds& thresholds) {
  if (trace.slots < 2) throw TooFewSamples("estimate_speed_class: need >= 2 slots");
  std::vector<CVector> snaps;
  snaps.reserve(trace.slots);
  for (int i = 0; i < trace.slots; ++i) snaps.push_back(trace.vec_slot(i));
  return classify_eta(thresholds, satc_window(snaps));
}

double estimate_speed_class(const MeasurementTrace& measurements,
                            const MobilityThresholds& thresholds) {
  if (measurements.slots() < 2)
    throw TooFewSamples("estimate_speed_class: need >= 2 measurements");
  std::vector<CVector> snaps;
  snaps.reserve(measurements.y.size());
  for (const CVector& y : measurements.y)
    snaps.push_back(measurements.pilot.ls_estimate(y));
  return classify_eta(thresholds, satc_window(snaps));
}

std::vector<double> satc_samples(const ScenarioSampler& sampler, double speed_kmh,
                                 int trials, const CalibrationOptions& options) {
  std::vector<double> etas;
  etas.reserve(trials);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t seed =
        mix_seed({options.seed, 0xca11b7a7e5ULL, static_cast<std::uint64_t>(i)});
    const ScmScenario scenario = sampler(seed, speed_kmh);
    const ChannelTrace trace = generate_trace(scenario, options.snapshot_slots);
    std::vector<CVector> snaps;
    snaps.reserve(trace.slots);
    for (int k = 0; k < trace.slots; ++k) snaps.push_back(trace.vec_slot(k));
    etas.push_back(satc_window(snaps));
  }
  return etas;
}

double median_eta(const ScenarioSampler& sampler, double speed_kmh, int trials,
                  const CalibrationOptions& options) {
  std::vector<double> etas = satc_samples(sampler, speed_kmh, trials, options);
  std::sort(etas.begin(), etas.end());
  return quantile(etas, 0.5);
}

MobilityThresholds calibrate_thresholds(const std::vector<double>& speed_set,
                                        const ScenarioSampler& sampler, int trials,
                                        const CalibrationOptions& options) {
  if (speed_set.size() < 2)
    throw InvalidScenario("calibrate_thresholds: need at least two speeds");
  if (trials < 30) throw InvalidScenario("calibrate_thresholds: need trials >= 30");

  std::vector<double> speeds = speed_set;
  std::sort(speeds.begin(), speeds.end());

  struct SpeedStats {
    double speed;
    double median;
    double lo_q;  // separation_quantile
    double hi_q;  // 1 − separation_quantile
  };
  std::vector<SpeedStats> stats;
  stats.reserve(speeds.size());
  const double q = options.separation_quantile;
  for (double s : speeds) {
    std::vector<double> etas = satc_samples(sampler, s, trials, options);
    std::sort(etas.begin(), etas.end());
    stats.push_back({s, quantile(etas, 0.5), quantile(etas, q), quantile(etas, 1.0 - q)});
  }

  // Slower speed ⇒ higher η. Adjacent classes must separate: the low
  // quantile of the slower class above the high quantile of the faster.
  for (std::size_t i = 0; i + 1 < stats.size(); ++i) {
    if (stats[i].speed == stats[i + 1].speed)
      throw NonSeparable("calibrate_thresholds: duplicate speed " +
                         std::to_string(stats[i].speed));
    if (!(stats[i].lo_q > stats[i + 1].hi_q))
      throw NonSeparable(
          "calibrate_thresholds: eta distributions overlap between " +
          std::to_string(stats[i].speed) + " and " +
          std::to_string(stats[i + 1].speed) + " km/h at quantile " +
          std::to_string(q));
  }

  MobilityThresholds out;
  out.entries.reserve(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const double threshold = (i + 1 < stats.size())
                                 ? 0.5 * (stats[i].median + stats[i + 1].median)
                                 : -1.0;  // catch-all for the fastest class
    out.entries.push_back({threshold, stats[i].speed});
  }
  return out;
}

int order_for_speed(double speed_kmh, const OrderPolicy& policy) {
  if (speed_kmh < 0) throw InvalidScenario("order_for_speed: negative speed");
  // Guard against ties landing epsilon above an integer (0.3·10 in IEEE
  // is 3.0000000000000004, which must still map to order 3).
  const int raw = static_cast<int>(std::ceil(policy.slope * speed_kmh - 1e-9));
  return std::clamp(raw, policy.min_order, policy.max_order);
}

}  // namespace mimopred
