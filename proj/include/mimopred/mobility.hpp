// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mimopred/linalg.hpp"
#include "mimopred/scm.hpp"

namespace mimopred {

/// Ordered (η threshold, speed class) pairs, descending in η and
/// ascending in speed: slow UEs keep high temporal correlation.
struct MobilityThresholds {
  struct Entry {
    double eta_threshold;   ///< in [−1, 1]
    double speed_class_kmh;
  };
  std::vector<Entry> entries;
};

/// Linear mobility→order map: order = clamp(ceil(slope·speed), min, max).
struct OrderPolicy {
  double slope = 0.3;  ///< AR order per km/h
  int min_order = 1;
  int max_order = 12;
};

/// Spatial average of temporal correlation between two consecutive
/// channel snapshots: Re(h_prevᴴ·h_curr / (‖h_prev‖·‖h_curr‖)), in [−1, 1].
///
/// \throws ShapeMismatch on unequal lengths
/// \throws ZeroVector if either snapshot has zero norm
double satc(const CVector& h_prev, const CVector& h_curr);

/// Mean SATC over all consecutive snapshot pairs of a window (≥ 2
/// snapshots). Averaging pairs suppresses the cross-term jitter of a
/// single pair while the geometry-driven value is common to all pairs.
double satc_window(const std::vector<CVector>& snapshots);

/// First class whose threshold η exceeds; below every threshold the
/// fastest class is returned.
double classify_eta(const MobilityThresholds& thresholds, double eta);

/// Speed class from true channel snapshots.
double estimate_speed_class(const ChannelTrace& trace,
                            const MobilityThresholds& thresholds);

/// Speed class from measurements: η is computed on least-squares channel
/// estimates Ψ̄⁺y̲ (the practical path; true channels are unavailable).
double estimate_speed_class(const MeasurementTrace& measurements,
                            const MobilityThresholds& thresholds);

/// Draws one scenario per (seed, speed) request during calibration.
using ScenarioSampler = std::function<ScmScenario(std::uint64_t seed, double speed_kmh)>;

struct CalibrationOptions {
  std::uint64_t seed = 0;
  /// Snapshots generated per trial; η averaged over the pairs.
  int snapshot_slots = 12;
  /// Separation requirement between adjacent speeds: the q-quantile of
  /// the slower class must exceed the (1−q)-quantile of the faster one.
  /// 0.5 requires strictly ordered medians.
  double separation_quantile = 0.5;
};

/// η samples over `trials` seeded geometries at one speed (noise-free,
/// true channels — the CDF-study protocol).
std::vector<double> satc_samples(const ScenarioSampler& sampler, double speed_kmh,
                                 int trials, const CalibrationOptions& options = {});

/// Median of satc_samples (the per-speed calibration reference point).
double median_eta(const ScenarioSampler& sampler, double speed_kmh, int trials,
                  const CalibrationOptions& options = {});

/// Estimate the per-speed η distributions over random geometries and
/// place thresholds at midpoints between adjacent speed medians.
///
/// \throws InvalidScenario if fewer than 2 distinct speeds or trials < 30
/// \throws NonSeparable if adjacent η distributions fail the quantile
///         separation requirement (reported, never silently ignored)
MobilityThresholds calibrate_thresholds(const std::vector<double>& speed_set,
                                        const ScenarioSampler& sampler, int trials,
                                        const CalibrationOptions& options = {});

/// Complexity order for an estimated speed: clamp(ceil(slope·speed),
/// min_order, max_order). Ceiling over-provisions rather than starving
/// the predictor of order.
int order_for_speed(double speed_kmh, const OrderPolicy& policy);

}  // namespace mimopred
