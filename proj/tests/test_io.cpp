// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "mimopred/ar.hpp"
#include "mimopred/errors.hpp"
#include "mimopred/io.hpp"
#include "mimopred/mlp.hpp"
#include "mimopred/rng.hpp"
#include "mimopred/scm.hpp"
#include "test_util.hpp"

using namespace mimopred;
using test_util::random_matrix;
using test_util::random_psd;

namespace {

/// Scratch file that removes itself when the test case ends.
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() /
              ("mimopred_test_" + name)).string()) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

void append_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void append_f64(std::string& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("trace file: documented byte layout, bit for bit") {
  TempFile file("layout.scmt");
  CVector slot(1);
  slot << Complex(1.5, -2.25);
  write_channel_trace(file.path, 1, 1, {slot});

  std::string expected = "SCMT";
  append_u32(expected, 1);  // version
  append_u32(expected, 1);  // M_r
  append_u32(expected, 1);  // N
  append_u32(expected, 1);  // slots
  append_f64(expected, 1.5);
  append_f64(expected, -2.25);
  CHECK(read_text_file(file.path) == expected);

  const TraceFile parsed = read_trace_file(file.path);
  CHECK(!parsed.is_measurement);
  CHECK(parsed.mr == 1);
  CHECK(parsed.n == 1);
  CHECK(parsed.slots == 1);
  REQUIRE(parsed.payload.size() == 1);
  CHECK(parsed.payload[0](0) == Complex(1.5, -2.25));
}

TEST_CASE("trace file: channel trace round trip is exact") {
  ScenarioPreset preset = umi_like();
  preset.bs_rows = 2;
  preset.bs_cols = 1;
  preset.ue_antennas = 2;
  const ChannelTrace trace = generate_trace(sample_scenario(3, preset, 7.0), 5);
  TempFile file("roundtrip.scmt");
  write_channel_trace(file.path, trace);
  const TraceFile parsed = read_trace_file(file.path);
  CHECK(parsed.mr == 2);
  CHECK(parsed.n == 2);
  CHECK(parsed.slots == 5);
  for (int i = 0; i < 5; ++i)
    CHECK((parsed.payload[i] - trace.vec_slot(i)).norm() == 0.0);
}

TEST_CASE("trace file: measurement round trip recovers tau from the payload") {
  ScenarioPreset preset = umi_like();
  preset.bs_rows = 2;
  preset.bs_cols = 1;
  preset.ue_antennas = 1;
  const ChannelTrace trace = generate_trace(sample_scenario(5, preset, 3.0), 4);
  const PilotBlock pilot = dft_pilot(2, 1, 10.0, 2);
  const MeasurementTrace meas = measure(trace, pilot, 17);
  TempFile file("roundtrip.scmy");
  write_measurement_trace(file.path, meas);
  const TraceFile parsed = read_trace_file(file.path);
  CHECK(parsed.is_measurement);
  CHECK(parsed.mr == 2);
  CHECK(parsed.n == 1);
  CHECK(parsed.tau() == 2);
  for (int i = 0; i < 4; ++i)
    CHECK((parsed.payload[i] - meas.y[i]).norm() == 0.0);

  write_channel_trace(file.path, 2, 1, {CVector::Zero(2)});
  CHECK_THROWS_AS(read_trace_file(file.path).tau(), BadShape);
}

TEST_CASE("trace file: malformed inputs are rejected") {
  TempFile file("malformed.scmt");
  CHECK_THROWS_AS(read_trace_file(file.path + ".does-not-exist"), IoFailure);

  CVector slot(2);
  slot << Complex(1.0, 0.0), Complex(0.0, 1.0);
  write_channel_trace(file.path, 2, 1, {slot, slot, slot});
  const std::string good = read_text_file(file.path);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  write_text_file(file.path, bad_magic);
  CHECK_THROWS_AS(read_trace_file(file.path), IoFailure);

  std::string bad_version = good;
  bad_version[4] = 2;
  write_text_file(file.path, bad_version);
  CHECK_THROWS_AS(read_trace_file(file.path), IoFailure);

  write_text_file(file.path, good.substr(0, good.size() - 5));
  CHECK_THROWS_AS(read_trace_file(file.path), IoFailure);

  write_text_file(file.path, good + "zzz");
  CHECK_THROWS_AS(read_trace_file(file.path), IoFailure);

  std::string huge_dim = good;
  const std::uint32_t giant = 1u << 30;
  std::memcpy(&huge_dim[8], &giant, 4);
  write_text_file(file.path, huge_dim);
  CHECK_THROWS_AS(read_trace_file(file.path), IoFailure);

  // SCMT payload must be exactly M_r·N per slot.
  std::string wrong_n = good;
  const std::uint32_t three = 3;
  std::memcpy(&wrong_n[12], &three, 4);
  write_text_file(file.path, wrong_n);
  CHECK_THROWS_AS(read_trace_file(file.path), IoFailure);
}

TEST_CASE("measurement file: per-slot length must divide by M_r") {
  TempFile file("divide.scmy");
  CVector slot(4);
  slot.setZero();
  write_measurement_trace(file.path, 2, 1, {slot});
  std::string bytes = read_text_file(file.path);
  const std::uint32_t three = 3;
  std::memcpy(&bytes[8], &three, 4);  // M_r header field
  write_text_file(file.path, bytes);
  CHECK_THROWS_AS(read_trace_file(file.path), IoFailure);

  CVector odd(3);
  odd.setZero();
  CHECK_THROWS_AS(write_measurement_trace(file.path, 2, 1, {odd}), BadShape);
}

TEST_CASE("ar model: round trip and documented layout") {
  Rng rng(7);
  ArModel model;
  model.dim = 3;
  model.order = 2;
  model.coeffs = {0.3 * random_matrix(rng, 3, 3), 0.1 * random_matrix(rng, 3, 3)};
  model.innovation_cov = random_psd(rng, 3);
  model.spectral_radius = companion_spectral_radius(model.coeffs);

  TempFile file("model.armx");
  write_ar_model(file.path, model);
  const ArModel back = read_ar_model(file.path);
  CHECK(back.dim == 3);
  CHECK(back.order == 2);
  CHECK((back.coeffs[0] - model.coeffs[0]).norm() == 0.0);
  CHECK((back.coeffs[1] - model.coeffs[1]).norm() == 0.0);
  CHECK((back.innovation_cov - model.innovation_cov).norm() == 0.0);
  CHECK(back.spectral_radius == doctest::Approx(model.spectral_radius).epsilon(1e-12));

  // Scalar AR(1) file assembled by hand from the documented layout.
  std::string bytes = "ARMX";
  append_u32(bytes, 1);
  append_u32(bytes, 1);
  append_f64(bytes, 0.5);   // Phi_1
  append_f64(bytes, 0.0);
  append_f64(bytes, 0.19);  // Sigma
  append_f64(bytes, 0.0);
  write_text_file(file.path, bytes);
  const ArModel scalar = read_ar_model(file.path);
  CHECK(scalar.coeffs[0](0, 0) == Complex(0.5, 0.0));
  CHECK(scalar.innovation_cov(0, 0) == Complex(0.19, 0.0));
  CHECK(scalar.spectral_radius == doctest::Approx(0.5).epsilon(1e-12));

  write_text_file(file.path, bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_ar_model(file.path), IoFailure);
  write_text_file(file.path, bytes + "x");
  CHECK_THROWS_AS(read_ar_model(file.path), IoFailure);
}

TEST_CASE("mlp model: round trips with and without optimizer state") {
  MlpConfig config;
  config.input_order = 2;
  config.hidden_layers = 1;
  config.nodes_per_layer = 6;
  config.epochs = 3;
  config.batch_size = 4;
  config.seed = 11;
  Rng rng(13);
  std::vector<CVector> seq;
  for (int i = 0; i < 14; ++i) seq.push_back(rng.complex_normal_vector(2));
  const MlpModel model = train(config, seq, 10);
  REQUIRE(model.step > 0);

  TempFile file("model.mlpx");
  SUBCASE("parameters only") {
    write_mlp_model(file.path, model);
    const MlpModel back = read_mlp_model(file.path);
    CHECK(back.input_order == 2);
    CHECK(back.relu_hidden == false);
    REQUIRE(back.weights.size() == model.weights.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      CHECK((back.weights[l] - model.weights[l]).norm() == 0.0);
      CHECK((back.biases[l] - model.biases[l]).norm() == 0.0);
      CHECK(back.m_weights[l].norm() == 0.0);
      CHECK(back.v_weights[l].norm() == 0.0);
    }
    CHECK(back.step == 0);
  }
  SUBCASE("with optimizer state") {
    write_mlp_model(file.path, model, /*include_optimizer_state=*/true);
    const MlpModel back = read_mlp_model(file.path);
    CHECK(back.step == model.step);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      CHECK((back.m_weights[l] - model.m_weights[l]).norm() == 0.0);
      CHECK((back.v_weights[l] - model.v_weights[l]).norm() == 0.0);
      CHECK((back.m_biases[l] - model.m_biases[l]).norm() == 0.0);
      CHECK((back.v_biases[l] - model.v_biases[l]).norm() == 0.0);
    }
  }
}

TEST_CASE("mlp model: documented layout, bad flags, and broken dimension chains") {
  TempFile file("layout.mlpx");
  std::string bytes = "MLPX";
  append_u32(bytes, 1);  // input order
  append_u32(bytes, 0);  // relu flag
  append_u32(bytes, 1);  // layer count
  append_u32(bytes, 1);  // rows
  append_u32(bytes, 1);  // cols
  append_f64(bytes, 2.5);   // weight
  append_f64(bytes, -1.0);  // bias
  std::string valid = bytes;
  append_u32(valid, 0);  // no optimizer state
  write_text_file(file.path, valid);
  const MlpModel model = read_mlp_model(file.path);
  Eigen::VectorXd x(1);
  x << 3.0;
  CHECK(forward(model, x)(0) == doctest::Approx(2.5 * 3.0 - 1.0).epsilon(1e-15));

  std::string bad_flag = bytes;
  append_u32(bad_flag, 7);
  write_text_file(file.path, bad_flag);
  CHECK_THROWS_AS(read_mlp_model(file.path), IoFailure);

  std::string chain = "MLPX";
  append_u32(chain, 1);
  append_u32(chain, 0);
  append_u32(chain, 2);  // two layers
  append_u32(chain, 1);  // layer 0: 1x1
  append_u32(chain, 1);
  append_u32(chain, 1);  // layer 1: 1x2 (cols != previous rows)
  append_u32(chain, 2);
  for (int i = 0; i < 1 + 1 + 2 + 1; ++i) append_f64(chain, 0.0);
  append_u32(chain, 0);
  write_text_file(file.path, chain);
  CHECK_THROWS_AS(read_mlp_model(file.path), IoFailure);
}

TEST_CASE("key=value: comments, whitespace, and malformed lines") {
  const KeyValueMap pairs =
      parse_key_values("# header comment\n\n a = 1 \nb=two words\t\n");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs.at("a") == "1");
  CHECK(pairs.at("b") == "two words");

  CHECK_THROWS_AS(parse_key_values("a=1\na=2\n"), IoFailure);
  CHECK_THROWS_AS(parse_key_values("no equals sign\n"), IoFailure);
  CHECK_THROWS_AS(parse_key_values("=value\n"), IoFailure);

  TempFile file("pairs.cfg");
  write_key_value_file(file.path, {{"x", "1.5"}, {"y", "hello"}});
  const KeyValueMap back = read_key_value_file(file.path);
  CHECK(back.at("x") == "1.5");
  CHECK(back.at("y") == "hello");
}

TEST_CASE("format_double: exact round trip through text") {
  for (double v : {0.1, 1.0 / 3.0, 1e300, -2.5e-308, 2.3e9, 0.0, -17.25}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("scenario: full field-exact round trip") {
  const ScmScenario scenario = sample_scenario(42, umi_like(), 13.7);
  TempFile file("scenario.cfg");
  write_scenario(file.path, scenario);
  const ScmScenario back = read_scenario(file.path);
  CHECK(back.bs_rows == scenario.bs_rows);
  CHECK(back.bs_cols == scenario.bs_cols);
  CHECK(back.ue_antennas == scenario.ue_antennas);
  CHECK(back.path_count == scenario.path_count);
  CHECK(back.subpaths_per_path == scenario.subpaths_per_path);
  CHECK(back.path_powers == scenario.path_powers);
  CHECK(back.aoa_deg == scenario.aoa_deg);
  CHECK(back.aod_deg == scenario.aod_deg);
  CHECK(back.subpath_phase_rad == scenario.subpath_phase_rad);
  CHECK(back.speed_kmh == scenario.speed_kmh);
  CHECK(back.travel_angle_deg == scenario.travel_angle_deg);
  CHECK(back.carrier_hz == scenario.carrier_hz);
  CHECK(back.slot_seconds == scenario.slot_seconds);
  CHECK(back.bs_spacing_m == scenario.bs_spacing_m);
  CHECK(back.ue_spacing_m == scenario.ue_spacing_m);
  CHECK(back.ue_phase_uses_aoa == scenario.ue_phase_uses_aoa);
  CHECK(back.seed == scenario.seed);
}

TEST_CASE("thresholds: round trip preserves the table") {
  MobilityThresholds thresholds;
  thresholds.entries = {{0.99, 3.0}, {0.9, 10.0}, {-1.0, 30.0}};
  TempFile file("thresholds.cfg");
  write_thresholds(file.path, thresholds);
  const MobilityThresholds back = read_thresholds(file.path);
  REQUIRE(back.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.entries[i].eta_threshold == thresholds.entries[i].eta_threshold);
    CHECK(back.entries[i].speed_class_kmh == thresholds.entries[i].speed_class_kmh);
  }
}

TEST_CASE("experiment config: full round trip of every field") {
  ExperimentConfig config;
  config.preset.bs_rows = 4;
  config.preset.bs_cols = 2;
  config.preset.ue_antennas = 2;
  config.preset.path_count = 3;
  config.preset.subpaths_per_path = 5;
  config.preset.power_decay = 0.7;
  config.preset.subpath_spread_deg = 1.5;
  config.tau = 4;
  config.snr_grid_db = {0.0, 10.0, 20.0};
  config.eval_slots = 64;
  config.n_samples = 256;
  config.adaptive_order = true;
  config.methods = {Method::kVkf, Method::kMlpRaw, Method::kExtrapolation};
  config.ue_speeds_kmh = {3.0, 30.0};
  config.seed = 99;
  config.num_seeds = 3;
  config.ar_epsilon = 1e-5;
  config.mlp_width = 64;
  config.mlp_epochs = 250;
  config.mlp_learning_rate = 0.003;
  config.mlp_batch = 32;
  config.calib_speeds = {3.0, 30.0};
  config.calib_trials = 40;
  config.order_policy.slope = 0.25;
  config.order_policy.min_order = 2;
  config.order_policy.max_order = 10;
  config.timing = true;

  TempFile file("experiment.cfg");
  write_experiment_config(file.path, config);
  const ExperimentConfig back = read_experiment_config(file.path);
  CHECK(back.preset.bs_rows == 4);
  CHECK(back.preset.bs_cols == 2);
  CHECK(back.preset.ue_antennas == 2);
  CHECK(back.preset.path_count == 3);
  CHECK(back.preset.subpaths_per_path == 5);
  CHECK(back.preset.power_decay == 0.7);
  CHECK(back.preset.subpath_spread_deg == 1.5);
  CHECK(back.tau == 4);
  CHECK(back.snr_grid_db == config.snr_grid_db);
  CHECK(back.eval_slots == 64);
  CHECK(back.n_samples == 256);
  CHECK(back.adaptive_order);
  CHECK(back.methods == config.methods);
  CHECK(back.ue_speeds_kmh == config.ue_speeds_kmh);
  CHECK(back.seed == 99);
  CHECK(back.num_seeds == 3);
  CHECK(back.ar_epsilon == 1e-5);
  CHECK(back.mlp_width == 64);
  CHECK(back.mlp_epochs == 250);
  CHECK(back.mlp_learning_rate == 0.003);
  CHECK(back.mlp_batch == 32);
  CHECK(back.calib_speeds == config.calib_speeds);
  CHECK(back.calib_trials == 40);
  CHECK(back.order_policy.slope == 0.25);
  CHECK(back.order_policy.min_order == 2);
  CHECK(back.order_policy.max_order == 10);
  CHECK(back.timing);
}

TEST_CASE("experiment config: unknown keys and half-adaptive orders are rejected") {
  CHECK_THROWS_AS(parse_experiment_config({{"bogus_key", "1"}}), IoFailure);
  CHECK_THROWS_AS(
      parse_experiment_config({{"order_p", "adaptive"}, {"input_order", "3"}}),
      IoFailure);
  const ExperimentConfig adaptive = parse_experiment_config({{"order_p", "adaptive"}});
  CHECK(adaptive.adaptive_order);
  const ExperimentConfig fixed = parse_experiment_config({{"order_p", "4"}});
  CHECK(!fixed.adaptive_order);
  CHECK(fixed.order_p == 4);
  CHECK_THROWS_AS(parse_experiment_config({{"order_p", "4x"}}), IoFailure);
  CHECK_THROWS_AS(parse_experiment_config({{"timing", "maybe"}}), IoFailure);
}

TEST_CASE("text files: round trip and missing-file reporting") {
  TempFile file("plain.txt");
  const std::string content = "line one\nline two\n";
  write_text_file(file.path, content);
  CHECK(read_text_file(file.path) == content);
  CHECK_THROWS_AS(read_text_file(file.path + ".missing"), IoFailure);
}

}  // TEST_SUITE
