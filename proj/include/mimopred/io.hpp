// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mimopred/ar.hpp"
#include "mimopred/eval.hpp"
#include "mimopred/linalg.hpp"
#include "mimopred/mlp.hpp"
#include "mimopred/mobility.hpp"
#include "mimopred/scm.hpp"

namespace mimopred {

/// Parsed binary trace file. Shared container for the channel ("SCMT")
/// and measurement ("SCMY") formats: 4-byte magic, u32 version (=1),
/// u32 M_r, u32 N, u32 slots, then slots payload vectors of little-endian
/// f64 (re, im) pairs in column-major per-slot order. Channel payloads
/// have length M_r·N, measurement payloads M_r·τ (τ is recovered from
/// the payload size, not stored).
struct TraceFile {
  bool is_measurement = false;
  std::uint32_t mr = 0;
  std::uint32_t n = 0;
  std::uint32_t slots = 0;
  std::vector<CVector> payload;

  /// Pilot length implied by the per-slot payload of a measurement file.
  int tau() const;
};

/// \throws IoFailure on filesystem errors or malformed contents
TraceFile read_trace_file(const std::string& path);

void write_channel_trace(const std::string& path, int mr, int n,
                         const std::vector<CVector>& slots);
void write_channel_trace(const std::string& path, const ChannelTrace& trace);
void write_measurement_trace(const std::string& path, int mr, int n,
                             const std::vector<CVector>& slots);
void write_measurement_trace(const std::string& path,
                             const MeasurementTrace& trace);

/// AR model file: magic "ARMX", u32 d, u32 p, then Φ_1..Φ_p and Σ as d×d
/// column-major little-endian f64 (re, im) pairs.
void write_ar_model(const std::string& path, const ArModel& model);
ArModel read_ar_model(const std::string& path);

/// MLP model file: magic "MLPX", then u32 input_order, u32 relu_hidden,
/// u32 layer count, per layer u32 rows and u32 cols; then per layer the
/// weight matrix row-major and the bias as little-endian f64; then a u32
/// flag for an optional optimizer-state section (u64 step plus moment
/// buffers in the same layout).
void write_mlp_model(const std::string& path, const MlpModel& model,
                     bool include_optimizer_state = false);
MlpModel read_mlp_model(const std::string& path);

/// UTF-8 key=value text (one pair per line, `#` comments and blank lines
/// ignored). Values keep full double precision (%.17g).
using KeyValueMap = std::map<std::string, std::string>;
KeyValueMap read_key_value_file(const std::string& path);
KeyValueMap parse_key_values(const std::string& text);
void write_key_value_file(const std::string& path, const KeyValueMap& pairs);

std::string format_double(double value);  ///< %.17g round-trip formatting

/// Scenario round-trip as key=value text (all fields, including the
/// per-subpath angle/phase tables as comma-separated lists).
void write_scenario(const std::string& path, const ScmScenario& scenario);
ScmScenario read_scenario(const std::string& path);

/// Threshold table as key=value text (`count`, `eta.i`, `speed.i`).
void write_thresholds(const std::string& path, const MobilityThresholds& thresholds);
MobilityThresholds read_thresholds(const std::string& path);

/// Experiment config as key=value text. Recognized keys mirror the
/// ExperimentConfig fields (e.g. `snr_grid_db=0,10,20`, `methods=vkf,mlp`,
/// `order_p=3` or `order_p=adaptive`, `preset.bs_rows=4`, ...). Unknown
/// keys raise IoFailure so typos cannot silently change an experiment.
ExperimentConfig parse_experiment_config(const KeyValueMap& pairs);
ExperimentConfig read_experiment_config(const std::string& path);
void write_experiment_config(const std::string& path, const ExperimentConfig& config);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mimopred
