// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "doctest.h"
#include "mimopred/errors.hpp"
#include "mimopred/eval.hpp"
#include "mimopred/rng.hpp"
#include "mimopred/scm.hpp"
#include "test_util.hpp"

using namespace mimopred;
using test_util::random_matrix;

namespace {

/// Small geometry shared by the experiment smoke tests.
ScenarioPreset tiny_preset(int rows, int cols) {
  ScenarioPreset preset = umi_like();
  preset.bs_rows = rows;
  preset.bs_cols = cols;
  preset.ue_antennas = 1;
  return preset;
}

const ResultRow& aggregate_row(const ResultTable& table, const std::string& method,
                               double snr_db) {
  for (const ResultRow& row : table.rows)
    if (row.method == method && row.snr_db == snr_db && row.slot == -1) return row;
  throw std::runtime_error("aggregate row not found: " + method);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("nmse: fixed points and exact scale reporting") {
  Rng rng(2);
  const CVector truth = rng.complex_normal_vector(6);
  CHECK(nmse(truth, truth) == 0.0);
  CHECK(nmse(CVector::Zero(6), truth) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nmse(CVector(2.0 * truth), truth) == doctest::Approx(1.0).epsilon(1e-12));
  for (const Complex alpha : {Complex(0.3, 0.0), Complex(1.7, 0.0), Complex(1.0, 0.5)})
    CHECK(nmse(CVector(alpha * truth), truth) ==
          doctest::Approx(std::norm(alpha - 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(nmse(CVector::Zero(5), truth), ShapeMismatch);
  CHECK_THROWS_AS(nmse(truth, CVector::Zero(6)), ZeroTruth);
}

TEST_CASE("to_db/mean_db: conversion and finite floor") {
  CHECK(to_db(1.0) == 0.0);
  CHECK(to_db(100.0) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::isfinite(to_db(0.0)));
  CHECK(to_db(0.0) < -1000.0);
  const std::vector<double> vals = {1.0, 0.01};
  CHECK(mean_db(vals) == doctest::Approx(10.0 * std::log10(0.505)).epsilon(1e-12));
  CHECK_THROWS_AS(mean_db({}), InvalidScenario);
}

TEST_CASE("outdated_baseline: exact inversion and SVD-pseudo-inverse agreement") {
  Rng rng(4);
  const PilotBlock pilot = dft_pilot(3, 2, 2.7, 2);  // non-exact-angle DFT path
  const CVector h = rng.complex_normal_vector(4);
  const CVector clean = pilot.psi_bar * h;
  CHECK((outdated_baseline(pilot, clean) - h).norm() < 1e-12 * h.norm());

  const CVector y = clean + rng.complex_normal_vector(6);
  const CVector via_svd = pseudo_inverse(pilot.psi_bar) * y;
  CHECK((outdated_baseline(pilot, y) - via_svd).norm() < 1e-10 * via_svd.norm());
  CHECK_THROWS_AS(outdated_baseline(pilot, h), ShapeMismatch);
}

TEST_CASE("outdated_baseline: static-channel NMSE sits on the analytic noise floor") {
  const ChannelTrace trace =
      generate_trace(sample_scenario(5, tiny_preset(2, 1), 0.0), 4000);
  const double rho = 100.0, tau = 2.0;
  const PilotBlock pilot = dft_pilot(2, 1, rho, 2);
  const MeasurementTrace meas = measure(trace, pilot, 7);
  const CVector h = trace.vec_slot(0);
  double mean_nmse = 0.0;
  for (const CVector& y : meas.y)
    mean_nmse += nmse(outdated_baseline(pilot, y), h);
  mean_nmse /= static_cast<double>(meas.slots());
  const double analytic = trace.dim() / (rho * tau * h.squaredNorm());
  CHECK(mean_nmse == doctest::Approx(analytic).epsilon(0.10));
}

TEST_CASE("extrapolation_baseline: zero slope and line through two points") {
  Rng rng(6);
  const PilotBlock pilot = dft_pilot(2, 1, 4.0, 2);
  const CVector h = rng.complex_normal_vector(2);
  const CVector y = pilot.psi_bar * h;
  CHECK((extrapolation_baseline(y, y, pilot) - h).norm() < 1e-12 * h.norm());

  const PilotBlock scalar = dft_pilot(1, 1, 9.0, 1);
  CVector one(1);
  one << Complex(1.0, 0.0);
  const CVector pred = extrapolation_baseline(CVector::Zero(1),
                                              CVector(scalar.psi_bar * one), scalar);
  CHECK(pred(0).real() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(extrapolation_baseline(CVector::Zero(2), CVector::Zero(1), scalar),
                  ShapeMismatch);
}

TEST_CASE("zf_combiner: matched direction for a single unit-norm stream") {
  Rng rng(8);
  CVector h = rng.complex_normal_vector(4);
  h /= h.norm();
  const CMatrix combiner = zf_combiner({CMatrix(h)});
  REQUIRE(combiner.cols() == 1);
  CHECK(combiner.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((combiner.col(0) - h.conjugate()).norm() < 1e-12);
  CHECK(std::abs((combiner.col(0).transpose() * h).value()) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zf_combiner: perfect CSI nulls every other stream") {
  // Orthogonal pair first (exact nulling), then a random stacked matrix.
  CMatrix ortho(4, 2);
  ortho.setZero();
  ortho(0, 0) = Complex(2.0, 0.0);
  ortho(1, 1) = Complex(0.0, 1.5);
  const CMatrix f_ortho = zf_combiner({ortho});
  CHECK(std::abs((f_ortho.col(0).transpose() * ortho.col(1)).value()) < 1e-12);
  CHECK(std::abs((f_ortho.col(1).transpose() * ortho.col(0)).value()) < 1e-12);

  Rng rng(10);
  const CMatrix h1 = random_matrix(rng, 8, 2);
  const CMatrix h2 = random_matrix(rng, 8, 2);
  const CMatrix combiner = zf_combiner({h1, h2});
  REQUIRE(combiner.cols() == 4);
  CMatrix stacked(8, 4);
  stacked << h1, h2;
  for (int j = 0; j < 4; ++j) {
    CHECK(combiner.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) {
      if (i == j) continue;
      CHECK(std::abs((combiner.col(j).transpose() * stacked.col(i)).value()) < 1e-10);
    }
  }
}

TEST_CASE("zf_combiner: rank-deficient stacks are rejected") {
  Rng rng(12);
  const CVector h = rng.complex_normal_vector(4);
  CMatrix dup(4, 2);
  dup << h, h;
  CHECK_THROWS_AS(zf_combiner({dup}), RankDeficient);
  CHECK_THROWS_AS(zf_combiner({random_matrix(rng, 2, 3)}), RankDeficient);
}

TEST_CASE("sum_rate: unit SINR point, zero power, and monotonicity") {
  CVector h(2);
  h << Complex(1.0, 0.0), Complex(0.0, 0.0);
  const CMatrix combiner = zf_combiner({CMatrix(h)});
  CHECK(sum_rate({CMatrix(h)}, combiner, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sum_rate({CMatrix(h)}, combiner, 0.0) == 0.0);
  double prev = -1.0;
  for (double rho : {0.0, 0.5, 1.0, 2.0, 10.0}) {
    const double rate = sum_rate({CMatrix(h)}, combiner, rho);
    CHECK(rate >= prev);
    prev = rate;
  }
}

TEST_CASE("sum_rate: orthogonal users decompose into single-user rates") {
  CMatrix h1(4, 1), h2(4, 1);
  h1.setZero();
  h2.setZero();
  h1(0, 0) = Complex(1.3, 0.0);
  h2(2, 0) = Complex(0.0, 0.9);
  const CMatrix joint = zf_combiner({h1, h2});
  const double two_user = sum_rate({h1, h2}, joint, 2.0);
  const double separate = sum_rate({h1}, zf_combiner({h1}), 2.0) +
                          sum_rate({h2}, zf_combiner({h2}), 2.0);
  CHECK(two_user == doctest::Approx(separate).epsilon(1e-9));
}

TEST_CASE("sum_rate: explicit noise realization replaces the unit expectation") {
  CVector h(2);
  h << Complex(1.0, 0.0), Complex(0.0, 0.0);
  const CMatrix combiner = zf_combiner({CMatrix(h)});
  CVector w(2);
  w << Complex(0.5, 0.0), Complex(0.0, 7.0);  // fᵀw = 0.5 for f = e1
  const double rate = sum_rate({CMatrix(h)}, combiner, 1.0, &w);
  CHECK(rate == doctest::Approx(std::log2(1.0 + 1.0 / 0.25)).epsilon(1e-12));
  CVector bad(3);
  CHECK_THROWS_AS(sum_rate({CMatrix(h)}, combiner, 1.0, &bad), ShapeMismatch);
}

TEST_CASE("complexity_estimate: table rows at the quoted operating points") {
  ComplexityDims vkf;
  vkf.mr_n = 128;
  vkf.p = 3;
  CHECK(complexity_estimate(ComplexityFormula::kVkfTotal, vkf) == 58720256.0);
  CHECK(complexity_estimate(ComplexityFormula::kVkfKalman, vkf) == 2097152.0);
  CHECK(complexity_estimate(ComplexityFormula::kVkfArEstimation, vkf) ==
        std::pow(3.0 * 128.0, 3.0));

  ComplexityDims mlp;
  mlp.mr_n = 128;
  mlp.i = 3;
  mlp.l = 2;
  mlp.alpha = 1;
  CHECK(complexity_estimate(ComplexityFormula::kMlpTest, mlp) == 81920.0);

  ComplexityDims degenerate = vkf;
  degenerate.p = 0;
  CHECK(complexity_estimate(ComplexityFormula::kVkfTotal, degenerate) ==
        std::pow(128.0, 3.0));
}

TEST_CASE("complexity_estimate: totals decompose and bad dims are rejected") {
  ComplexityDims dims;
  dims.mr_n = 64;
  dims.p = 2;
  dims.i = 3;
  dims.l = 2;
  dims.alpha = 4;
  dims.n_epoch = 100;
  dims.n_train = 512;
  CHECK(complexity_estimate(ComplexityFormula::kVkfTotal, dims) ==
        complexity_estimate(ComplexityFormula::kVkfKalman, dims) *
            (dims.p * dims.p * dims.p + 1.0));
  CHECK(complexity_estimate(ComplexityFormula::kMlpTotal, dims) ==
        complexity_estimate(ComplexityFormula::kMlpTrain, dims) +
            complexity_estimate(ComplexityFormula::kMlpTest, dims) +
            complexity_estimate(ComplexityFormula::kMlpLmmse, dims));
  ComplexityDims bad = dims;
  bad.mr_n = 0;
  CHECK_THROWS_AS(complexity_estimate(ComplexityFormula::kVkfTotal, bad),
                  InvalidScenario);
}

TEST_CASE("method names: round trip and rejection") {
  for (Method m : {Method::kOutdated, Method::kExtrapolation, Method::kVkf,
                   Method::kMlp, Method::kMlpRaw})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK_THROWS_AS(method_from_name("kalman"), InvalidScenario);
}

TEST_CASE("run_experiment: deterministic output, byte for byte") {
  ExperimentConfig config;
  config.preset = tiny_preset(2, 1);
  config.tau = 1;
  config.snr_grid_db = {10.0};
  config.eval_slots = 12;
  config.n_samples = 32;
  config.order_p = 2;
  config.input_order = 2;
  config.methods = {Method::kOutdated, Method::kVkf};
  config.ue_speeds_kmh = {3.0};
  config.seed = 3;
  const std::string a = result_table_csv(run_experiment(config));
  const std::string b = result_table_csv(run_experiment(config));
  CHECK(a == b);
  CHECK(a.rfind("method,snr_db,slot,nmse_db,rate_bps_hz,wallclock_s\n", 0) == 0);
}

TEST_CASE("run_experiment: static channel at 40 dB reports the LS noise floor") {
  ExperimentConfig config;
  config.preset = tiny_preset(2, 1);
  config.tau = 2;
  config.snr_grid_db = {40.0};
  config.eval_slots = 50;
  config.n_samples = 16;
  config.methods = {Method::kOutdated};
  config.ue_speeds_kmh = {0.0};
  config.seed = 5;
  config.num_seeds = 4;
  const ResultTable table = run_experiment(config);
  CHECK(table.errors.empty());
  const double floor_db = -10.0 * std::log10(1e4 * 2.0);  // 1/(rho*tau), E‖h‖² = d
  const double got = aggregate_row(table, "outdated", 40.0).nmse_db;
  CHECK(got > floor_db - 2.0);
  CHECK(got < floor_db + 4.0);
}

TEST_CASE("run_experiment: predictors beat the baselines on a mobile trace") {
  ExperimentConfig config;
  config.preset = tiny_preset(2, 2);
  config.tau = 1;
  config.snr_grid_db = {20.0};
  config.eval_slots = 40;
  config.n_samples = 96;
  config.order_p = 2;
  config.input_order = 2;
  config.methods = {Method::kOutdated, Method::kExtrapolation, Method::kVkf};
  config.ue_speeds_kmh = {3.0};
  config.seed = 7;
  const ResultTable table = run_experiment(config);
  CHECK(table.errors.empty());
  const double outdated = aggregate_row(table, "outdated", 20.0).nmse_db;
  const double extrapolation = aggregate_row(table, "extrapolation", 20.0).nmse_db;
  const double vkf = aggregate_row(table, "vkf", 20.0).nmse_db;
  CHECK(vkf <= outdated);
  CHECK(vkf < extrapolation);  // extrapolation cannot track, mirrors the study

  // Structure: one aggregate plus one row per evaluated slot and method,
  // aggregate first within its (method, snr) group.
  REQUIRE(table.rows.size() == 3 * (1 + 40));
  CHECK(table.rows[0].method == "extrapolation");
  CHECK(table.rows[0].slot == -1);
  CHECK(table.rows[1].slot >= 0);
  for (const ResultRow& row : table.rows) CHECK(row.wallclock_s == 0.0);
}

TEST_CASE("run_experiment: timing lands only on aggregate rows") {
  ExperimentConfig config;
  config.preset = tiny_preset(2, 1);
  config.tau = 1;
  config.snr_grid_db = {10.0};
  config.eval_slots = 8;
  config.n_samples = 16;
  config.methods = {Method::kOutdated};
  config.ue_speeds_kmh = {3.0};
  config.timing = true;
  const ResultTable table = run_experiment(config);
  for (const ResultRow& row : table.rows) {
    if (row.slot == -1)
      CHECK(row.wallclock_s > 0.0);
    else
      CHECK(row.wallclock_s == 0.0);
  }
}

TEST_CASE("run_experiment: a failing method leaves partial results and an error") {
  ExperimentConfig config;
  config.preset = tiny_preset(2, 1);
  config.tau = 1;
  config.snr_grid_db = {10.0};
  config.eval_slots = 8;
  config.n_samples = 8;
  config.order_p = 1;
  config.input_order = 1;
  config.mlp_epochs = 2;
  config.mlp_width = 4;
  config.mlp_learning_rate = 1e200;  // guaranteed DivergedLoss inside the cell
  config.methods = {Method::kOutdated, Method::kMlp};
  config.ue_speeds_kmh = {3.0};
  const ResultTable table = run_experiment(config);
  CHECK(!table.errors.empty());
  CHECK_NOTHROW(aggregate_row(table, "outdated", 10.0));
  for (const ResultRow& row : table.rows) CHECK(row.method != "mlp");
}

TEST_CASE("run_experiment: configuration validation") {
  ExperimentConfig config;
  config.preset = tiny_preset(2, 1);
  config.snr_grid_db = {};
  CHECK_THROWS_AS(run_experiment(config), InvalidScenario);
  config.snr_grid_db = {10.0};
  config.methods = {};
  CHECK_THROWS_AS(run_experiment(config), InvalidScenario);
  config.methods = {Method::kOutdated};
  config.ue_speeds_kmh = {};
  CHECK_THROWS_AS(run_experiment(config), InvalidScenario);
  config.ue_speeds_kmh = {3.0, 3.0, 3.0};  // three UEs exceed two receive antennas
  CHECK_THROWS_AS(run_experiment(config), InvalidScenario);
}

}  // TEST_SUITE
