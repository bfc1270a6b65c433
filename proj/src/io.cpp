// SPDX-License-Identifier: Apache-2.0
#include "mimopred/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "mimopred/errors.hpp"

namespace mimopred {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary trace/model formats are little-endian");
static_assert(sizeof(double) == 8, "f64 payload requires 8-byte double");

constexpr std::uint32_t kTraceVersion = 1;
constexpr std::uint32_t kMaxHeaderDim = 1u << 20;  // rejects corrupt headers

// ---------------------------------------------------------------- binary IO

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoFailure("cannot open for writing: " + path);
  }

  void magic(const char (&tag)[5]) { raw(tag, 4); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }

  void complex_column_major(const CMatrix& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        f64(m(r, c).real());
        f64(m(r, c).imag());
      }
    }
  }

  void complex_vector(const CVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      f64(v[i].real());
      f64(v[i].imag());
    }
  }

  void real_row_major(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }

  void real_vector(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }

  void close() {
    out_.close();
    if (!out_) throw IoFailure("write failed: " + path_);
  }

 private:
  void raw(const void* p, std::size_t bytes) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
    if (!out_) throw IoFailure("write failed: " + path_);
  }

  std::string path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    data_ = buffer.str();
  }

  std::string take_magic() {
    if (remaining() < 4) throw IoFailure("truncated file: " + path_);
    std::string tag = data_.substr(pos_, 4);
    pos_ += 4;
    return tag;
  }

  void expect_magic(const char (&tag)[5]) {
    if (take_magic() != tag) {
      throw IoFailure("bad magic in " + path_ + " (expected " +
                      std::string(tag) + ")");
    }
  }

  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  double f64() { return scalar<double>(); }

  CMatrix complex_column_major(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double re = f64();
        const double im = f64();
        m(r, c) = {re, im};
      }
    }
    return m;
  }

  CVector complex_vector(Eigen::Index size) {
    CVector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      const double re = f64();
      const double im = f64();
      v[i] = {re, im};
    }
    return v;
  }

  Eigen::MatrixXd real_row_major(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    }
    return m;
  }

  Eigen::VectorXd real_vector(Eigen::Index size) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = f64();
    return v;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

  void expect_end() const {
    if (pos_ != data_.size()) throw IoFailure("trailing bytes in " + path_);
  }

  const std::string& path() const { return path_; }

 private:
  template <typename T>
  T scalar() {
    if (remaining() < sizeof(T)) throw IoFailure("truncated file: " + path_);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string path_;
  std::string data_;
  std::size_t pos_ = 0;
};

void write_trace_impl(const std::string& path, const char (&tag)[5], int mr,
                      int n, const std::vector<CVector>& slots) {
  if (mr < 1 || n < 1) throw BadShape("trace write: dimensions must be positive");
  const Eigen::Index per_slot = slots.empty() ? 0 : slots.front().size();
  for (const CVector& v : slots) {
    if (v.size() != per_slot) {
      throw BadShape("trace write: inconsistent per-slot lengths");
    }
  }
  BinaryWriter out(path);
  out.magic(tag);
  out.u32(kTraceVersion);
  out.u32(static_cast<std::uint32_t>(mr));
  out.u32(static_cast<std::uint32_t>(n));
  out.u32(static_cast<std::uint32_t>(slots.size()));
  for (const CVector& v : slots) out.complex_vector(v);
  out.close();
}

std::uint32_t checked_dim(std::uint32_t v, const std::string& what,
                          const std::string& path) {
  if (v == 0 || v > kMaxHeaderDim) {
    throw IoFailure("implausible " + what + " in " + path);
  }
  return v;
}

}  // namespace

int TraceFile::tau() const {
  if (!is_measurement) throw BadShape("tau(): not a measurement file");
  if (payload.empty()) throw BadShape("tau(): empty measurement file");
  const Eigen::Index per_slot = payload.front().size();
  if (mr == 0 || per_slot % static_cast<Eigen::Index>(mr) != 0) {
    throw BadShape("tau(): payload length not a multiple of M_r");
  }
  return static_cast<int>(per_slot / static_cast<Eigen::Index>(mr));
}

TraceFile read_trace_file(const std::string& path) {
  BinaryReader in(path);
  const std::string tag = in.take_magic();
  TraceFile file;
  if (tag == "SCMT") {
    file.is_measurement = false;
  } else if (tag == "SCMY") {
    file.is_measurement = true;
  } else {
    throw IoFailure("bad magic in " + path + " (expected SCMT or SCMY)");
  }
  const std::uint32_t version = in.u32();
  if (version != kTraceVersion) {
    throw IoFailure("unsupported version in " + path);
  }
  file.mr = checked_dim(in.u32(), "M_r", path);
  file.n = checked_dim(in.u32(), "N", path);
  file.slots = in.u32();
  if (file.slots > kMaxHeaderDim) throw IoFailure("implausible slot count in " + path);

  if (file.slots == 0) {
    in.expect_end();
    return file;
  }
  const std::size_t payload_bytes = in.remaining();
  const std::size_t per_slot_bytes = payload_bytes / file.slots;
  if (payload_bytes % file.slots != 0 || per_slot_bytes % 16 != 0 ||
      per_slot_bytes == 0) {
    throw IoFailure("payload size inconsistent with slot count in " + path);
  }
  const Eigen::Index per_slot = static_cast<Eigen::Index>(per_slot_bytes / 16);
  const Eigen::Index expected_channel =
      static_cast<Eigen::Index>(file.mr) * static_cast<Eigen::Index>(file.n);
  if (!file.is_measurement && per_slot != expected_channel) {
    throw IoFailure("channel payload length != M_r·N in " + path);
  }
  if (file.is_measurement &&
      per_slot % static_cast<Eigen::Index>(file.mr) != 0) {
    throw IoFailure("measurement payload length not a multiple of M_r in " + path);
  }
  file.payload.reserve(file.slots);
  for (std::uint32_t s = 0; s < file.slots; ++s) {
    file.payload.push_back(in.complex_vector(per_slot));
  }
  in.expect_end();
  return file;
}

void write_channel_trace(const std::string& path, int mr, int n,
                         const std::vector<CVector>& slots) {
  const Eigen::Index expected = static_cast<Eigen::Index>(mr) * n;
  for (const CVector& v : slots) {
    if (v.size() != expected) {
      throw BadShape("channel trace write: per-slot length != M_r·N");
    }
  }
  write_trace_impl(path, "SCMT", mr, n, slots);
}

void write_channel_trace(const std::string& path, const ChannelTrace& trace) {
  std::vector<CVector> slots;
  slots.reserve(trace.matrices.size());
  for (const CMatrix& h : trace.matrices) slots.push_back(vec(h));
  write_channel_trace(path, trace.mr(), trace.n(), slots);
}

void write_measurement_trace(const std::string& path, int mr, int n,
                             const std::vector<CVector>& slots) {
  for (const CVector& v : slots) {
    if (v.size() % std::max(mr, 1) != 0) {
      throw BadShape("measurement trace write: per-slot length not a multiple of M_r");
    }
  }
  write_trace_impl(path, "SCMY", mr, n, slots);
}

void write_measurement_trace(const std::string& path,
                             const MeasurementTrace& trace) {
  write_measurement_trace(path, trace.pilot.mr, trace.pilot.n, trace.y);
}

// ----------------------------------------------------------------- AR model

void write_ar_model(const std::string& path, const ArModel& model) {
  BinaryWriter out(path);
  out.magic("ARMX");
  out.u32(static_cast<std::uint32_t>(model.dim));
  out.u32(static_cast<std::uint32_t>(model.order));
  for (const CMatrix& phi : model.coeffs) out.complex_column_major(phi);
  out.complex_column_major(model.innovation_cov);
  out.close();
}

ArModel read_ar_model(const std::string& path) {
  BinaryReader in(path);
  in.expect_magic("ARMX");
  const std::uint32_t d = checked_dim(in.u32(), "dimension", path);
  const std::uint32_t p = checked_dim(in.u32(), "order", path);
  ArModel model;
  model.dim = static_cast<int>(d);
  model.order = static_cast<int>(p);
  model.coeffs.reserve(p);
  for (std::uint32_t i = 0; i < p; ++i) {
    model.coeffs.push_back(in.complex_column_major(d, d));
  }
  model.innovation_cov = in.complex_column_major(d, d);
  in.expect_end();
  model.spectral_radius = companion_spectral_radius(model.coeffs);
  return model;
}

// ---------------------------------------------------------------- MLP model

void write_mlp_model(const std::string& path, const MlpModel& model,
                     bool include_optimizer_state) {
  if (model.weights.empty() || model.weights.size() != model.biases.size()) {
    throw BadShape("mlp write: malformed model");
  }
  BinaryWriter out(path);
  out.magic("MLPX");
  out.u32(static_cast<std::uint32_t>(model.input_order));
  out.u32(model.relu_hidden ? 1u : 0u);
  out.u32(static_cast<std::uint32_t>(model.weights.size()));
  for (const Eigen::MatrixXd& w : model.weights) {
    out.u32(static_cast<std::uint32_t>(w.rows()));
    out.u32(static_cast<std::uint32_t>(w.cols()));
  }
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    out.real_row_major(model.weights[i]);
    out.real_vector(model.biases[i]);
  }
  out.u32(include_optimizer_state ? 1u : 0u);
  if (include_optimizer_state) {
    out.u64(static_cast<std::uint64_t>(model.step));
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      out.real_row_major(model.m_weights[i]);
      out.real_row_major(model.v_weights[i]);
      out.real_vector(model.m_biases[i]);
      out.real_vector(model.v_biases[i]);
    }
  }
  out.close();
}

MlpModel read_mlp_model(const std::string& path) {
  BinaryReader in(path);
  in.expect_magic("MLPX");
  MlpModel model;
  model.input_order = static_cast<int>(checked_dim(in.u32(), "input order", path));
  model.relu_hidden = in.u32() != 0;
  const std::uint32_t layers = checked_dim(in.u32(), "layer count", path);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(layers);
  for (auto& [rows, cols] : shapes) {
    rows = checked_dim(in.u32(), "layer rows", path);
    cols = checked_dim(in.u32(), "layer cols", path);
  }
  for (std::uint32_t i = 1; i < layers; ++i) {
    if (shapes[i].second != shapes[i - 1].first) {
      throw IoFailure("layer dimension chain broken in " + path);
    }
  }
  for (const auto& [rows, cols] : shapes) {
    model.weights.push_back(in.real_row_major(rows, cols));
    model.biases.push_back(in.real_vector(rows));
  }
  const std::uint32_t has_optimizer = in.u32();
  if (has_optimizer == 1) {
    model.step = static_cast<long>(in.u64());
    for (const auto& [rows, cols] : shapes) {
      model.m_weights.push_back(in.real_row_major(rows, cols));
      model.v_weights.push_back(in.real_row_major(rows, cols));
      model.m_biases.push_back(in.real_vector(rows));
      model.v_biases.push_back(in.real_vector(rows));
    }
  } else if (has_optimizer == 0) {
    model.step = 0;
    for (const auto& [rows, cols] : shapes) {
      model.m_weights.push_back(Eigen::MatrixXd::Zero(rows, cols));
      model.v_weights.push_back(Eigen::MatrixXd::Zero(rows, cols));
      model.m_biases.push_back(Eigen::VectorXd::Zero(rows));
      model.v_biases.push_back(Eigen::VectorXd::Zero(rows));
    }
  } else {
    throw IoFailure("bad optimizer-state flag in " + path);
  }
  in.expect_end();
  return model;
}

// ------------------------------------------------------------ key=value IO

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    throw IoFailure("key '" + key + "': not a number: '" + value + "'");
  }
  if (used != value.size()) {
    throw IoFailure("key '" + key + "': trailing characters in '" + value + "'");
  }
  return parsed;
}

long parse_long(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  long parsed = 0;
  try {
    parsed = std::stol(value, &used);
  } catch (const std::exception&) {
    throw IoFailure("key '" + key + "': not an integer: '" + value + "'");
  }
  if (used != value.size()) {
    throw IoFailure("key '" + key + "': trailing characters in '" + value + "'");
  }
  return parsed;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  unsigned long long parsed = 0;
  try {
    parsed = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw IoFailure("key '" + key + "': not an unsigned integer: '" + value + "'");
  }
  if (used != value.size()) {
    throw IoFailure("key '" + key + "': trailing characters in '" + value + "'");
  }
  return parsed;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "0" || value == "false") return false;
  if (value == "1" || value == "true") return true;
  throw IoFailure("key '" + key + "': expected 0/1/true/false, got '" + value + "'");
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream stream(value);
  while (std::getline(stream, current, ',')) items.push_back(trim(current));
  if (!value.empty() && value.back() == ',') items.push_back("");
  return items;
}

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_commas(value)) {
    out.push_back(parse_double(item, key));
  }
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

/// Tracks which keys a reader consumed so typos surface as errors.
class KeyValueView {
 public:
  explicit KeyValueView(const KeyValueMap& pairs) : pairs_(pairs) {}
  explicit KeyValueView(KeyValueMap&&) = delete;  // would dangle: the view only borrows

  bool has(const std::string& key) const { return pairs_.count(key) != 0; }

  const std::string& require(const std::string& key) {
    const auto it = pairs_.find(key);
    if (it == pairs_.end()) throw IoFailure("missing key '" + key + "'");
    consumed_.insert(key);
    return it->second;
  }

  const std::string* optional(const std::string& key) {
    const auto it = pairs_.find(key);
    if (it == pairs_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  void expect_all_consumed() const {
    for (const auto& [key, value] : pairs_) {
      if (consumed_.count(key) == 0) {
        throw IoFailure("unknown key '" + key + "'");
      }
    }
  }

 private:
  const KeyValueMap& pairs_;
  std::set<std::string> consumed_;
};

}  // namespace

KeyValueMap parse_key_values(const std::string& text) {
  KeyValueMap pairs;
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw IoFailure("line " + std::to_string(line_number) + ": missing '='");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw IoFailure("line " + std::to_string(line_number) + ": empty key");
    }
    if (!pairs.emplace(key, value).second) {
      throw IoFailure("duplicate key '" + key + "'");
    }
  }
  return pairs;
}

KeyValueMap read_key_value_file(const std::string& path) {
  try {
    return parse_key_values(read_text_file(path));
  } catch (const IoFailure& err) {
    throw IoFailure(path + ": " + err.what());
  }
}

void write_key_value_file(const std::string& path, const KeyValueMap& pairs) {
  std::string text;
  for (const auto& [key, value] : pairs) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  write_text_file(path, text);
}

// ------------------------------------------------------------------ scenario

void write_scenario(const std::string& path, const ScmScenario& scenario) {
  KeyValueMap pairs;
  pairs["bs_rows"] = std::to_string(scenario.bs_rows);
  pairs["bs_cols"] = std::to_string(scenario.bs_cols);
  pairs["ue_antennas"] = std::to_string(scenario.ue_antennas);
  pairs["path_count"] = std::to_string(scenario.path_count);
  pairs["subpaths_per_path"] = std::to_string(scenario.subpaths_per_path);
  pairs["path_powers"] = join_doubles(scenario.path_powers);
  for (int t = 0; t < scenario.path_count; ++t) {
    const std::string suffix = "." + std::to_string(t);
    pairs["aoa_deg" + suffix] = join_doubles(scenario.aoa_deg.at(t));
    pairs["aod_deg" + suffix] = join_doubles(scenario.aod_deg.at(t));
    pairs["subpath_phase_rad" + suffix] =
        join_doubles(scenario.subpath_phase_rad.at(t));
  }
  pairs["speed_kmh"] = format_double(scenario.speed_kmh);
  pairs["travel_angle_deg"] = format_double(scenario.travel_angle_deg);
  pairs["carrier_hz"] = format_double(scenario.carrier_hz);
  pairs["slot_seconds"] = format_double(scenario.slot_seconds);
  pairs["bs_spacing_m"] = format_double(scenario.bs_spacing_m);
  pairs["ue_spacing_m"] = format_double(scenario.ue_spacing_m);
  pairs["ue_phase_uses_aoa"] = scenario.ue_phase_uses_aoa ? "1" : "0";
  pairs["seed"] = std::to_string(scenario.seed);
  write_key_value_file(path, pairs);
}

ScmScenario read_scenario(const std::string& path) {
  const KeyValueMap pairs = read_key_value_file(path);
  KeyValueView view(pairs);
  ScmScenario s;
  s.bs_rows = static_cast<int>(parse_long(view.require("bs_rows"), "bs_rows"));
  s.bs_cols = static_cast<int>(parse_long(view.require("bs_cols"), "bs_cols"));
  s.ue_antennas =
      static_cast<int>(parse_long(view.require("ue_antennas"), "ue_antennas"));
  s.path_count =
      static_cast<int>(parse_long(view.require("path_count"), "path_count"));
  s.subpaths_per_path = static_cast<int>(
      parse_long(view.require("subpaths_per_path"), "subpaths_per_path"));
  s.path_powers = parse_double_list(view.require("path_powers"), "path_powers");
  if (s.path_count < 1) throw IoFailure(path + ": path_count must be positive");
  for (int t = 0; t < s.path_count; ++t) {
    const std::string suffix = "." + std::to_string(t);
    s.aoa_deg.push_back(
        parse_double_list(view.require("aoa_deg" + suffix), "aoa_deg" + suffix));
    s.aod_deg.push_back(
        parse_double_list(view.require("aod_deg" + suffix), "aod_deg" + suffix));
    s.subpath_phase_rad.push_back(parse_double_list(
        view.require("subpath_phase_rad" + suffix), "subpath_phase_rad" + suffix));
  }
  s.speed_kmh = parse_double(view.require("speed_kmh"), "speed_kmh");
  s.travel_angle_deg =
      parse_double(view.require("travel_angle_deg"), "travel_angle_deg");
  s.carrier_hz = parse_double(view.require("carrier_hz"), "carrier_hz");
  s.slot_seconds = parse_double(view.require("slot_seconds"), "slot_seconds");
  s.bs_spacing_m = parse_double(view.require("bs_spacing_m"), "bs_spacing_m");
  s.ue_spacing_m = parse_double(view.require("ue_spacing_m"), "ue_spacing_m");
  s.ue_phase_uses_aoa =
      parse_bool(view.require("ue_phase_uses_aoa"), "ue_phase_uses_aoa");
  s.seed = parse_u64(view.require("seed"), "seed");
  view.expect_all_consumed();
  return s;
}

// ---------------------------------------------------------------- thresholds

void write_thresholds(const std::string& path,
                      const MobilityThresholds& thresholds) {
  KeyValueMap pairs;
  pairs["count"] = std::to_string(thresholds.entries.size());
  for (std::size_t i = 0; i < thresholds.entries.size(); ++i) {
    pairs["eta." + std::to_string(i)] =
        format_double(thresholds.entries[i].eta_threshold);
    pairs["speed." + std::to_string(i)] =
        format_double(thresholds.entries[i].speed_class_kmh);
  }
  write_key_value_file(path, pairs);
}

MobilityThresholds read_thresholds(const std::string& path) {
  const KeyValueMap pairs = read_key_value_file(path);
  KeyValueView view(pairs);
  const long count = parse_long(view.require("count"), "count");
  if (count < 1) throw IoFailure(path + ": threshold count must be positive");
  MobilityThresholds thresholds;
  for (long i = 0; i < count; ++i) {
    const std::string idx = std::to_string(i);
    MobilityThresholds::Entry entry{};
    entry.eta_threshold = parse_double(view.require("eta." + idx), "eta." + idx);
    entry.speed_class_kmh =
        parse_double(view.require("speed." + idx), "speed." + idx);
    thresholds.entries.push_back(entry);
  }
  view.expect_all_consumed();
  return thresholds;
}

// ----------------------------------------------------------- experiment cfg

namespace {

std::string join_methods(const std::vector<Method>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i > 0) out += ',';
    out += method_name(methods[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const KeyValueMap& pairs) {
  KeyValueView view(pairs);
  ExperimentConfig cfg;

  const auto take_int = [&view](const std::string& key, int& field) {
    if (const std::string* v = view.optional(key)) {
      field = static_cast<int>(parse_long(*v, key));
    }
  };
  const auto take_double = [&view](const std::string& key, double& field) {
    if (const std::string* v = view.optional(key)) field = parse_double(*v, key);
  };
  const auto take_bool = [&view](const std::string& key, bool& field) {
    if (const std::string* v = view.optional(key)) field = parse_bool(*v, key);
  };

  take_int("preset.bs_rows", cfg.preset.bs_rows);
  take_int("preset.bs_cols", cfg.preset.bs_cols);
  take_int("preset.ue_antennas", cfg.preset.ue_antennas);
  take_int("preset.path_count", cfg.preset.path_count);
  take_int("preset.subpaths_per_path", cfg.preset.subpaths_per_path);
  take_double("preset.power_decay", cfg.preset.power_decay);
  take_double("preset.bs_sector_deg", cfg.preset.bs_sector_deg);
  take_double("preset.ue_sector_deg", cfg.preset.ue_sector_deg);
  take_double("preset.subpath_spread_deg", cfg.preset.subpath_spread_deg);
  take_double("preset.carrier_hz", cfg.preset.carrier_hz);
  take_double("preset.slot_seconds", cfg.preset.slot_seconds);
  take_double("preset.bs_spacing_wavelengths", cfg.preset.bs_spacing_wavelengths);
  take_double("preset.ue_spacing_wavelengths", cfg.preset.ue_spacing_wavelengths);
  take_bool("preset.ue_phase_uses_aoa", cfg.preset.ue_phase_uses_aoa);

  take_int("tau", cfg.tau);
  if (const std::string* v = view.optional("snr_grid_db")) {
    cfg.snr_grid_db = parse_double_list(*v, "snr_grid_db");
  }
  take_int("slots", cfg.eval_slots);
  take_int("n_samples", cfg.n_samples);

  // `order_p` and `input_order` take a count or the word "adaptive";
  // adaptivity applies to both jointly (one mobility estimate drives both).
  bool p_adaptive = false;
  bool i_adaptive = false;
  if (const std::string* v = view.optional("order_p")) {
    if (*v == "adaptive") {
      p_adaptive = true;
    } else {
      cfg.order_p = static_cast<int>(parse_long(*v, "order_p"));
    }
  }
  if (const std::string* v = view.optional("input_order")) {
    if (*v == "adaptive") {
      i_adaptive = true;
    } else {
      cfg.input_order = static_cast<int>(parse_long(*v, "input_order"));
    }
  }
  if (p_adaptive != i_adaptive && (view.has("order_p") && view.has("input_order"))) {
    throw IoFailure("order_p and input_order must both be adaptive or both numeric");
  }
  cfg.adaptive_order = p_adaptive || i_adaptive;

  if (const std::string* v = view.optional("methods")) {
    cfg.methods.clear();
    for (const std::string& name : split_commas(*v)) {
      try {
        cfg.methods.push_back(method_from_name(name));
      } catch (const InvalidScenario& err) {
        throw IoFailure(err.what());
      }
    }
  }
  if (const std::string* v = view.optional("ue_speeds_kmh")) {
    cfg.ue_speeds_kmh = parse_double_list(*v, "ue_speeds_kmh");
  }
  if (const std::string* v = view.optional("seed")) {
    cfg.seed = parse_u64(*v, "seed");
  }
  take_int("num_seeds", cfg.num_seeds);
  take_double("ar_epsilon", cfg.ar_epsilon);
  take_int("mlp_width", cfg.mlp_width);
  take_int("mlp_epochs", cfg.mlp_epochs);
  take_double("mlp_learning_rate", cfg.mlp_learning_rate);
  take_int("mlp_batch", cfg.mlp_batch);
  if (const std::string* v = view.optional("calib_speeds")) {
    cfg.calib_speeds = parse_double_list(*v, "calib_speeds");
  }
  take_int("calib_trials", cfg.calib_trials);
  take_double("policy.slope", cfg.order_policy.slope);
  take_int("policy.min_order", cfg.order_policy.min_order);
  take_int("policy.max_order", cfg.order_policy.max_order);
  take_bool("timing", cfg.timing);

  view.expect_all_consumed();
  return cfg;
}

ExperimentConfig read_experiment_config(const std::string& path) {
  try {
    return parse_experiment_config(read_key_value_file(path));
  } catch (const IoFailure& err) {
    const std::string what = err.what();
    if (what.find(path) == std::string::npos) {
      throw IoFailure(path + ": " + what);
    }
    throw;
  }
}

void write_experiment_config(const std::string& path,
                             const ExperimentConfig& cfg) {
  KeyValueMap pairs;
  pairs["preset.bs_rows"] = std::to_string(cfg.preset.bs_rows);
  pairs["preset.bs_cols"] = std::to_string(cfg.preset.bs_cols);
  pairs["preset.ue_antennas"] = std::to_string(cfg.preset.ue_antennas);
  pairs["preset.path_count"] = std::to_string(cfg.preset.path_count);
  pairs["preset.subpaths_per_path"] = std::to_string(cfg.preset.subpaths_per_path);
  pairs["preset.power_decay"] = format_double(cfg.preset.power_decay);
  pairs["preset.bs_sector_deg"] = format_double(cfg.preset.bs_sector_deg);
  pairs["preset.ue_sector_deg"] = format_double(cfg.preset.ue_sector_deg);
  pairs["preset.subpath_spread_deg"] = format_double(cfg.preset.subpath_spread_deg);
  pairs["preset.carrier_hz"] = format_double(cfg.preset.carrier_hz);
  pairs["preset.slot_seconds"] = format_double(cfg.preset.slot_seconds);
  pairs["preset.bs_spacing_wavelengths"] =
      format_double(cfg.preset.bs_spacing_wavelengths);
  pairs["preset.ue_spacing_wavelengths"] =
      format_double(cfg.preset.ue_spacing_wavelengths);
  pairs["preset.ue_phase_uses_aoa"] = cfg.preset.ue_phase_uses_aoa ? "1" : "0";
  pairs["tau"] = std::to_string(cfg.tau);
  pairs["snr_grid_db"] = join_doubles(cfg.snr_grid_db);
  pairs["slots"] = std::to_string(cfg.eval_slots);
  pairs["n_samples"] = std::to_string(cfg.n_samples);
  pairs["order_p"] = cfg.adaptive_order ? "adaptive" : std::to_string(cfg.order_p);
  pairs["input_order"] =
      cfg.adaptive_order ? "adaptive" : std::to_string(cfg.input_order);
  pairs["methods"] = join_methods(cfg.methods);
  pairs["ue_speeds_kmh"] = join_doubles(cfg.ue_speeds_kmh);
  pairs["seed"] = std::to_string(cfg.seed);
  pairs["num_seeds"] = std::to_string(cfg.num_seeds);
  pairs["ar_epsilon"] = format_double(cfg.ar_epsilon);
  pairs["mlp_width"] = std::to_string(cfg.mlp_width);
  pairs["mlp_epochs"] = std::to_string(cfg.mlp_epochs);
  pairs["mlp_learning_rate"] = format_double(cfg.mlp_learning_rate);
  pairs["mlp_batch"] = std::to_string(cfg.mlp_batch);
  pairs["calib_speeds"] = join_doubles(cfg.calib_speeds);
  pairs["calib_trials"] = std::to_string(cfg.calib_trials);
  pairs["policy.slope"] = format_double(cfg.order_policy.slope);
  pairs["policy.min_order"] = std::to_string(cfg.order_policy.min_order);
  pairs["policy.max_order"] = std::to_string(cfg.order_policy.max_order);
  pairs["timing"] = cfg.timing ? "1" : "0";
  write_key_value_file(path, pairs);
}

// ----------------------------------------------------------------- text IO

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoFailure("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace mimopred
