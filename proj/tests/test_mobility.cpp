// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "mimopred/errors.hpp"
#include "mimopred/mobility.hpp"
#include "mimopred/rng.hpp"
#include "mimopred/scm.hpp"

using namespace mimopred;

namespace {

MobilityThresholds table_3_10_30() {
  MobilityThresholds t;
  t.entries = {{0.99, 3.0}, {0.9, 10.0}, {-1.0, 30.0}};
  return t;
}

ScenarioSampler preset_sampler(const ScenarioPreset& preset) {
  return [preset](std::uint64_t seed, double speed) {
    return sample_scenario(seed, preset, speed);
  };
}

/// Mobility-study ensemble: a wide per-path angular spread at the UE (the
/// dense-scatterer regime, 35 degrees as in classic UMi channel practice)
/// decoheres each path's Doppler tone, so eta concentrates near its
/// speed-dependent mean instead of swinging with the path geometry.
ScenarioPreset mobility_study_preset() {
  ScenarioPreset preset = umi_like();
  preset.subpath_spread_deg = 35.0;
  return preset;
}

}  // namespace

TEST_SUITE("mobility") {

TEST_CASE("satc: identical, negated, and phase-rotated snapshots") {
  Rng rng(3);
  const CVector h = rng.complex_normal_vector(16);
  CHECK(satc(h, h) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(satc(h, CVector(-h)) == doctest::Approx(-1.0).epsilon(1e-12));
  const Complex rot = std::polar(1.0, M_PI / 3.0);
  CHECK(satc(h, CVector(rot * h)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("satc: errors on zero vectors and length mismatch") {
  Rng rng(5);
  const CVector h = rng.complex_normal_vector(4);
  CHECK_THROWS_AS(satc(CVector::Zero(4), h), ZeroVector);
  CHECK_THROWS_AS(satc(h, CVector::Zero(4)), ZeroVector);
  CHECK_THROWS_AS(satc(h, rng.complex_normal_vector(5)), ShapeMismatch);
}

TEST_CASE("satc: invariant to common scaling and bounded by 1") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const CVector a = rng.complex_normal_vector(8);
    const CVector b = rng.complex_normal_vector(8);
    const double eta = satc(a, b);
    CHECK(std::abs(eta) <= 1.0 + 1e-14);
    const Complex rot = std::polar(2.5, rng.uniform(0.0, 6.28));
    CHECK(satc(CVector(rot * a), CVector(rot * b)) ==
          doctest::Approx(eta).epsilon(1e-10));
  }
}

TEST_CASE("classify_eta: threshold table lookup") {
  const MobilityThresholds t = table_3_10_30();
  CHECK(classify_eta(t, 0.95) == 10.0);
  CHECK(classify_eta(t, 0.995) == 3.0);
  CHECK(classify_eta(t, 0.1) == 30.0);
  CHECK(classify_eta(t, -1.0) == 30.0);  // below every threshold: fastest
}

TEST_CASE("estimate_speed_class: static channel maps to the slowest class") {
  const ScmScenario s = sample_scenario(11, umi_like(), 0.0);
  const ChannelTrace trace = generate_trace(s, 8);
  CHECK(estimate_speed_class(trace, table_3_10_30()) == 3.0);
}

TEST_CASE("estimate_speed_class: measurement route agrees at high SNR") {
  ScenarioPreset preset = umi_like();
  preset.bs_rows = 4;
  preset.bs_cols = 4;
  const ScmScenario s = sample_scenario(13, preset, 3.0);
  const ChannelTrace trace = generate_trace(s, 12);
  const PilotBlock pilot = dft_pilot(2, 2, std::pow(10.0, 4.0), 16);
  const MeasurementTrace meas = measure(trace, pilot, 77);
  const MobilityThresholds t = table_3_10_30();
  CHECK(estimate_speed_class(meas, t) == estimate_speed_class(trace, t));
}

TEST_CASE("median eta: ordered and monotone over 3/10/30 km/h") {
  const ScenarioSampler sampler = preset_sampler(umi_like());
  CalibrationOptions options;
  options.seed = 17;
  const double m3 = median_eta(sampler, 3.0, 100, options);
  const double m10 = median_eta(sampler, 10.0, 100, options);
  const double m30 = median_eta(sampler, 30.0, 100, options);
  CHECK(m3 > m10);
  CHECK(m10 > m30);
}

TEST_CASE("satc_samples: single geometry run reproduces that geometry's eta") {
  const ScmScenario fixed = sample_scenario(23, umi_like(), 10.0);
  const ScenarioSampler constant_sampler =
      [fixed](std::uint64_t, double) { return fixed; };
  CalibrationOptions options;
  options.snapshot_slots = 12;
  const std::vector<double> samples =
      satc_samples(constant_sampler, 10.0, 31, options);
  REQUIRE(!samples.empty());
  for (double eta : samples) CHECK(eta == samples.front());
  CHECK(median_eta(constant_sampler, 10.0, 31, options) == samples.front());
}

TEST_CASE("calibrate_thresholds: separates 3 vs 30 km/h with >=90% held-out accuracy") {
  const ScenarioSampler sampler = preset_sampler(mobility_study_preset());
  CalibrationOptions options;
  options.seed = 29;
  const MobilityThresholds t =
      calibrate_thresholds({3.0, 30.0}, sampler, 100, options);
  REQUIRE(t.entries.size() == 2);
  CHECK(t.entries[0].speed_class_kmh == 3.0);
  CHECK(t.entries[1].speed_class_kmh == 30.0);

  CalibrationOptions held_out;
  held_out.seed = 31;  // disjoint seed stream from calibration
  int correct = 0, total = 0;
  for (double speed : {3.0, 30.0}) {
    const std::vector<double> etas = satc_samples(sampler, speed, 100, held_out);
    for (double eta : etas) {
      correct += (classify_eta(t, eta) == speed);
      ++total;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.9);
}

TEST_CASE("calibrate_thresholds: identical speeds are non-separable") {
  const ScenarioSampler sampler = preset_sampler(umi_like());
  CHECK_THROWS_AS(calibrate_thresholds({3.0, 3.0}, sampler, 50, {}), NonSeparable);
}

TEST_CASE("calibrate_thresholds: input validation") {
  const ScenarioSampler sampler = preset_sampler(umi_like());
  CHECK_THROWS_AS(calibrate_thresholds({3.0}, sampler, 50, {}), InvalidScenario);
  CHECK_THROWS_AS(calibrate_thresholds({3.0, 30.0}, sampler, 5, {}), InvalidScenario);
}

TEST_CASE("order_for_speed: paper operating points and clamping") {
  OrderPolicy policy;  // slope 0.3, orders 1..12
  CHECK(order_for_speed(3.0, policy) == 1);
  CHECK(order_for_speed(10.0, policy) == 3);
  CHECK(order_for_speed(30.0, policy) == 9);
  CHECK(order_for_speed(0.0, policy) == policy.min_order);
  CHECK(order_for_speed(1000.0, policy) == policy.max_order);
}

TEST_CASE("order_for_speed: monotone non-decreasing in speed") {
  OrderPolicy policy;
  int prev = 0;
  for (double v = 0.0; v <= 60.0; v += 0.5) {
    const int order = order_for_speed(v, policy);
    CHECK(order >= prev);
    prev = order;
  }
}

}  // TEST_SUITE
