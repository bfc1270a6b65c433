// SPDX-License-Identifier: Apache-2.0
#include "mimopred/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mimopred/ar.hpp"
#include "mimopred/errors.hpp"
#include "mimopred/mlp.hpp"
#include "mimopred/rng.hpp"
#include "mimopred/vkf.hpp"

namespace mimopred {
namespace {

constexpr double kDbFloor = 1e-300;  // keeps to_db finite for exact zeros

double cube(double x) { return x * x * x; }

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  const auto now = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(now - start).count();
}

}  // namespace

double nmse(const CVector& pred, const CVector& truth) {
  if (pred.size() != truth.size()) {
    throw ShapeMismatch("nmse: prediction and truth lengths differ");
  }
  const double denom = truth.squaredNorm();
  if (denom == 0.0) {
    throw ZeroTruth("nmse: reference vector has zero norm");
  }
  return (pred - truth).squaredNorm() / denom;
}

double to_db(double linear) {
  return 10.0 * std::log10(std::max(linear, kDbFloor));
}

double mean_db(const std::vector<double>& linear_values) {
  if (linear_values.empty()) {
    throw InvalidScenario("mean_db: empty sample set");
  }
  const double sum =
      std::accumulate(linear_values.begin(), linear_values.end(), 0.0);
  return to_db(sum / static_cast<double>(linear_values.size()));
}

CVector outdated_baseline(const PilotBlock& pilot, const CVector& y) {
  return pilot.ls_estimate(y);
}

CVector extrapolation_baseline(const CVector& y_prev, const CVector& y_curr,
                               const PilotBlock& pilot) {
  return 2.0 * pilot.ls_estimate(y_curr) - pilot.ls_estimate(y_prev);
}

CMatrix zf_combiner(const std::vector<CMatrix>& predicted_channels) {
  if (predicted_channels.empty()) {
    throw ShapeMismatch("zf_combiner: no channels given");
  }
  const Eigen::Index mr = predicted_channels.front().rows();
  Eigen::Index total_streams = 0;
  for (const CMatrix& h : predicted_channels) {
    if (h.rows() != mr) {
      throw ShapeMismatch("zf_combiner: inconsistent receive dimensions");
    }
    total_streams += h.cols();
  }
  if (total_streams > mr) {
    throw RankDeficient("zf_combiner: more streams than receive antennas");
  }
  CMatrix stacked(mr, total_streams);
  Eigen::Index offset = 0;
  for (const CMatrix& h : predicted_channels) {
    stacked.middleCols(offset, h.cols()) = h;
    offset += h.cols();
  }
  const CMatrix gram = stacked.adjoint() * stacked;
  CMatrix rows_t;  // N_t × M_r, row j = unnormalized f_jᵀ
  try {
    rows_t = hermitian_solve(gram, CMatrix(stacked.adjoint()));
  } catch (const Singular&) {
    throw RankDeficient("zf_combiner: stacked channel matrix is rank deficient");
  }
  for (Eigen::Index j = 0; j < rows_t.rows(); ++j) {
    const double norm = rows_t.row(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw RankDeficient("zf_combiner: degenerate combiner row");
    }
    rows_t.row(j) /= norm;
  }
  // Column j of the result is f_j; transpose without conjugation keeps the
  // f_jᵀ·h combining convention.
  return rows_t.transpose();
}

double sum_rate(const std::vector<CMatrix>& true_channels, const CMatrix& combiner,
                double rho, const CVector* noise_realization) {
  if (true_channels.empty()) {
    throw ShapeMismatch("sum_rate: no channels given");
  }
  const Eigen::Index mr = combiner.rows();
  Eigen::Index total_streams = 0;
  for (const CMatrix& h : true_channels) {
    if (h.rows() != mr) {
      throw ShapeMismatch("sum_rate: channel/combiner receive dimensions differ");
    }
    total_streams += h.cols();
  }
  if (combiner.cols() != total_streams) {
    throw ShapeMismatch("sum_rate: combiner stream count mismatch");
  }
  if (noise_realization != nullptr && noise_realization->size() != mr) {
    throw ShapeMismatch("sum_rate: noise realization length mismatch");
  }

  double rate = 0.0;
  Eigen::Index stream = 0;
  for (std::size_t k = 0; k < true_channels.size(); ++k) {
    for (Eigen::Index m = 0; m < true_channels[k].cols(); ++m, ++stream) {
      const auto f = combiner.col(stream);
      const double signal =
          std::norm((f.transpose() * true_channels[k].col(m)).value());
      double interference = 0.0;
      Eigen::Index other = 0;
      for (std::size_t kp = 0; kp < true_channels.size(); ++kp) {
        for (Eigen::Index mp = 0; mp < true_channels[kp].cols(); ++mp, ++other) {
          if (other == stream) continue;
          interference +=
              std::norm((f.transpose() * true_channels[kp].col(mp)).value());
        }
      }
      const double noise_power =
          noise_realization != nullptr
              ? std::norm((f.transpose() * (*noise_realization)).value())
              : f.squaredNorm();
      const double sinr = rho * signal / (rho * interference + noise_power);
      rate += std::log2(1.0 + sinr);
    }
  }
  return rate;
}

double complexity_estimate(ComplexityFormula formula, const ComplexityDims& dims) {
  if (dims.mr_n <= 0 || dims.p < 0 || dims.i <= 0 || dims.l <= 0 ||
      dims.alpha <= 0 || dims.n_epoch < 0 || dims.n_train < 0) {
    throw InvalidScenario("complexity_estimate: dimensions out of range");
  }
  const double m2 = dims.mr_n * dims.mr_n;
  const double m3 = m2 * dims.mr_n;
  // per-vector MLP cost: α(I + (L−1)α + 1)·(M_rN)²
  const double mlp_unit = dims.alpha * (dims.i + (dims.l - 1.0) * dims.alpha + 1.0) * m2;
  switch (formula) {
    case ComplexityFormula::kVkfArEstimation:
      return cube(dims.p * dims.mr_n);
    case ComplexityFormula::kVkfKalman:
      return m3;
    case ComplexityFormula::kVkfTotal:
      return (cube(dims.p) + 1.0) * m3;
    case ComplexityFormula::kMlpLmmse:
      return m3;
    case ComplexityFormula::kMlpTrain:
      return dims.n_epoch * dims.n_train * mlp_unit;
    case ComplexityFormula::kMlpTest:
      return mlp_unit;
    case ComplexityFormula::kMlpTotal:
      return (dims.n_epoch * dims.n_train + 1.0) * mlp_unit + m3;
  }
  throw InvalidScenario("complexity_estimate: unknown formula");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kOutdated: return "outdated";
    case Method::kExtrapolation: return "extrapolation";
    case Method::kVkf: return "vkf";
    case Method::kMlp: return "mlp";
    case Method::kMlpRaw: return "mlp_raw";
  }
  throw InvalidScenario("method_name: unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "outdated") return Method::kOutdated;
  if (name == "extrapolation") return Method::kExtrapolation;
  if (name == "vkf") return Method::kVkf;
  if (name == "mlp") return Method::kMlp;
  if (name == "mlp_raw") return Method::kMlpRaw;
  throw InvalidScenario(
      "unknown method '" + name +
      "' (expected outdated|extrapolation|vkf|mlp|mlp_raw)");
}

namespace {

// Per-(method, snr) accumulators over seeds/UEs/slots.
struct CellAccumulator {
  std::vector<double> nmse_sum;   // per eval slot, linear
  std::vector<long> nmse_count;   // per eval slot
  std::vector<double> rate_sum;   // per eval slot
  std::vector<long> rate_count;
  double wall_seconds = 0.0;
};

struct ResolvedOrders {
  int p = 1;
  int input = 1;
};

std::vector<CVector> slice(const std::vector<CVector>& xs, int begin, int count) {
  return std::vector<CVector>(xs.begin() + begin, xs.begin() + begin + count);
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  if (config.snr_grid_db.empty()) {
    throw InvalidScenario("run_experiment: empty SNR grid");
  }
  if (config.methods.empty()) {
    throw InvalidScenario("run_experiment: no methods selected");
  }
  if (config.ue_speeds_kmh.empty()) {
    throw InvalidScenario("run_experiment: no UEs configured");
  }
  if (config.eval_slots < 1 || config.n_samples < 8 || config.num_seeds < 1) {
    throw InvalidScenario("run_experiment: eval_slots/n_samples/num_seeds out of range");
  }
  if (!config.adaptive_order &&
      (config.order_p < 1 || config.input_order < 1)) {
    throw InvalidScenario("run_experiment: orders must be positive");
  }

  const int mr = config.preset.bs_rows * config.preset.bs_cols;
  const int n = config.preset.ue_antennas;
  const int ue_count = static_cast<int>(config.ue_speeds_kmh.size());
  if (static_cast<Eigen::Index>(ue_count) * n > mr) {
    throw InvalidScenario("run_experiment: total streams exceed receive antennas");
  }
  if (config.tau < n) {
    throw InvalidScenario("run_experiment: pilot length below UE antenna count");
  }

  const int max_p = config.adaptive_order ? config.order_policy.max_order
                                          : config.order_p;
  const int max_i = config.adaptive_order ? config.order_policy.max_order
                                          : config.input_order;
  const int margin = std::max({max_p, max_i, 2});
  const int eval_start = config.n_samples + margin;
  const int total_slots = eval_start + config.eval_slots;

  // Mobility thresholds are calibrated once per experiment when orders adapt.
  MobilityThresholds thresholds;
  if (config.adaptive_order) {
    const ScenarioPreset preset = config.preset;
    ScenarioSampler sampler = [preset](std::uint64_t seed, double speed) {
      return sample_scenario(seed, preset, speed);
    };
    CalibrationOptions calib_options;
    calib_options.seed = mix_seed({config.seed, 0xca1Bull});
    thresholds = calibrate_thresholds(config.calib_speeds, sampler,
                                      config.calib_trials, calib_options);
  }

  const std::size_t method_count = config.methods.size();
  const std::size_t snr_count = config.snr_grid_db.size();
  std::vector<CellAccumulator> cells(method_count * snr_count);
  for (CellAccumulator& cell : cells) {
    cell.nmse_sum.assign(config.eval_slots, 0.0);
    cell.nmse_count.assign(config.eval_slots, 0);
    cell.rate_sum.assign(config.eval_slots, 0.0);
    cell.rate_count.assign(config.eval_slots, 0);
  }
  ResultTable table;

  for (int seed_idx = 0; seed_idx < config.num_seeds; ++seed_idx) {
    std::vector<ChannelTrace> traces;
    traces.reserve(ue_count);
    for (int k = 0; k < ue_count; ++k) {
      const ScmScenario scenario = sample_scenario(
          mix_seed({config.seed, 0xd209ull, static_cast<std::uint64_t>(seed_idx),
                    static_cast<std::uint64_t>(k)}),
          config.preset, config.ue_speeds_kmh[k]);
      traces.push_back(generate_trace(scenario, total_slots));
    }

    for (std::size_t snr_idx = 0; snr_idx < snr_count; ++snr_idx) {
      const double snr_db = config.snr_grid_db[snr_idx];
      const double rho = std::pow(10.0, snr_db / 10.0);
      const PilotBlock pilot = dft_pilot(config.tau, n, rho, mr);

      std::vector<MeasurementTrace> meas;
      meas.reserve(ue_count);
      for (int k = 0; k < ue_count; ++k) {
        meas.push_back(measure(
            traces[k], pilot,
            mix_seed({config.seed, 0x9015eull,
                      static_cast<std::uint64_t>(seed_idx),
                      static_cast<std::uint64_t>(k),
                      static_cast<std::uint64_t>(snr_idx)})));
      }

      // Resolve per-UE orders, either fixed or from the mobility estimate
      // over the fitting window.
      std::vector<ResolvedOrders> orders(ue_count);
      for (int k = 0; k < ue_count; ++k) {
        if (config.adaptive_order) {
          MeasurementTrace window;
          window.pilot = pilot;
          window.y = slice(meas[k].y, 0, config.n_samples);
          window.noise_seed = meas[k].noise_seed;
          const double speed_class = estimate_speed_class(window, thresholds);
          const int order = order_for_speed(speed_class, config.order_policy);
          orders[k] = ResolvedOrders{order, order};
        } else {
          orders[k] = ResolvedOrders{config.order_p, config.input_order};
        }
      }

      for (std::size_t m_idx = 0; m_idx < method_count; ++m_idx) {
        const Method method = config.methods[m_idx];
        CellAccumulator& cell = cells[m_idx * snr_count + snr_idx];
        const auto start_time = std::chrono::steady_clock::now();
        try {
          // predictions[k][e] = ĥ for slot eval_start+e from data ≤ slot−1
          std::vector<std::vector<CVector>> predictions(
              ue_count, std::vector<CVector>(config.eval_slots));

          for (int k = 0; k < ue_count; ++k) {
            const int p = orders[k].p;
            const int input = orders[k].input;
            switch (method) {
              case Method::kOutdated: {
                for (int e = 0; e < config.eval_slots; ++e) {
                  predictions[k][e] =
                      outdated_baseline(pilot, meas[k].y[eval_start + e - 1]);
                }
                break;
              }
              case Method::kExtrapolation: {
                for (int e = 0; e < config.eval_slots; ++e) {
                  predictions[k][e] = extrapolation_baseline(
                      meas[k].y[eval_start + e - 2],
                      meas[k].y[eval_start + e - 1], pilot);
                }
                break;
              }
              case Method::kVkf: {
                MeasurementTrace fit_window;
                fit_window.pilot = pilot;
                fit_window.y = slice(meas[k].y, 0, config.n_samples + p - 1);
                fit_window.noise_seed = meas[k].noise_seed;
                const AutocorrSet acorr =
                    sample_autocorr(fit_window, p, config.ar_epsilon);
                const ArModel model = yule_walker(acorr);
                const VkfRun run = run_vkf(model, pilot, meas[k], p, &acorr);
                for (int e = 0; e < config.eval_slots; ++e) {
                  predictions[k][e] = run.predictions[eval_start + e];
                }
                break;
              }
              case Method::kMlp: {
                MlpConfig mlp_config;
                mlp_config.input_order = input;
                mlp_config.nodes_per_layer = config.mlp_width;
                mlp_config.learning_rate = config.mlp_learning_rate;
                mlp_config.batch_size = config.mlp_batch;
                mlp_config.epochs = config.mlp_epochs;
                mlp_config.seed = mix_seed(
                    {config.seed, 0x3170ull,
                     static_cast<std::uint64_t>(seed_idx),
                     static_cast<std::uint64_t>(k),
                     static_cast<std::uint64_t>(snr_idx)});
                const LmmseContext context =
                    build_lmmse(pilot, meas[k], config.n_samples);
                std::vector<CVector> sequence(config.n_samples + input);
                for (int t = 0; t < config.n_samples + input; ++t) {
                  sequence[t] = preprocess(context, meas[k].y[t]);
                }
                const MlpModel model =
                    train(mlp_config, sequence, config.n_samples);
                for (int e = 0; e < config.eval_slots; ++e) {
                  std::vector<CVector> window(
                      meas[k].y.begin() + (eval_start + e - input),
                      meas[k].y.begin() + (eval_start + e));
                  predictions[k][e] = predict_mlp(model, context, window);
                }
                break;
              }
              case Method::kMlpRaw: {
                // Ablation: train directly on raw pilot observations and
                // map the predicted observation back by least squares.
                MlpConfig mlp_config;
                mlp_config.input_order = input;
                mlp_config.nodes_per_layer = config.mlp_width;
                mlp_config.learning_rate = config.mlp_learning_rate;
                mlp_config.batch_size = config.mlp_batch;
                mlp_config.epochs = config.mlp_epochs;
                mlp_config.seed = mix_seed(
                    {config.seed, 0x3171ull,
                     static_cast<std::uint64_t>(seed_idx),
                     static_cast<std::uint64_t>(k),
                     static_cast<std::uint64_t>(snr_idx)});
                const std::vector<CVector> sequence =
                    slice(meas[k].y, 0, config.n_samples + input);
                const MlpModel model =
                    train(mlp_config, sequence, config.n_samples);
                for (int e = 0; e < config.eval_slots; ++e) {
                  std::vector<CVector> window(
                      meas[k].y.begin() + (eval_start + e - input),
                      meas[k].y.begin() + (eval_start + e));
                  const CVector y_hat =
                      unpack_output(forward(model, pack_input(window)));
                  predictions[k][e] = pilot.ls_estimate(y_hat);
                }
                break;
              }
            }
          }

          for (int e = 0; e < config.eval_slots; ++e) {
            for (int k = 0; k < ue_count; ++k) {
              cell.nmse_sum[e] +=
                  nmse(predictions[k][e], traces[k].vec_slot(eval_start + e));
              cell.nmse_count[e] += 1;
            }
            std::vector<CMatrix> predicted_mats(ue_count);
            std::vector<CMatrix> true_mats(ue_count);
            for (int k = 0; k < ue_count; ++k) {
              predicted_mats[k] = unvec(predictions[k][e], mr, n);
              true_mats[k] = traces[k].matrices[eval_start + e];
            }
            const CMatrix combiner = zf_combiner(predicted_mats);
            cell.rate_sum[e] += sum_rate(true_mats, combiner, rho);
            cell.rate_count[e] += 1;
          }
          cell.wall_seconds += elapsed_seconds(start_time);
        } catch (const Error& err) {
          char label[160];
          std::snprintf(label, sizeof(label), "%s snr=%g seed=%d: %s",
                        method_name(method).c_str(), snr_db, seed_idx,
                        err.what());
          table.errors.emplace_back(label);
        }
      }
    }
  }

  // Emit rows: one aggregate row (slot = −1) plus per-slot rows.
  for (std::size_t m_idx = 0; m_idx < method_count; ++m_idx) {
    for (std::size_t snr_idx = 0; snr_idx < snr_count; ++snr_idx) {
      const CellAccumulator& cell = cells[m_idx * snr_count + snr_idx];
      double total_nmse = 0.0;
      long total_nmse_count = 0;
      double total_rate = 0.0;
      long total_rate_count = 0;
      for (int e = 0; e < config.eval_slots; ++e) {
        total_nmse += cell.nmse_sum[e];
        total_nmse_count += cell.nmse_count[e];
        total_rate += cell.rate_sum[e];
        total_rate_count += cell.rate_count[e];
      }
      if (total_nmse_count == 0) {
        continue;  // method failed everywhere at this SNR; reported in errors
      }
      ResultRow aggregate;
      aggregate.method = method_name(config.methods[m_idx]);
      aggregate.snr_db = config.snr_grid_db[snr_idx];
      aggregate.slot = -1;
      aggregate.nmse_db = to_db(total_nmse / static_cast<double>(total_nmse_count));
      aggregate.rate_bps_hz = total_rate / static_cast<double>(total_rate_count);
      aggregate.wallclock_s = config.timing ? cell.wall_seconds : 0.0;
      table.rows.push_back(aggregate);
      for (int e = 0; e < config.eval_slots; ++e) {
        if (cell.nmse_count[e] == 0) continue;
        ResultRow row;
        row.method = aggregate.method;
        row.snr_db = aggregate.snr_db;
        row.slot = eval_start + e;
        row.nmse_db = to_db(cell.nmse_sum[e] / static_cast<double>(cell.nmse_count[e]));
        row.rate_bps_hz = cell.rate_sum[e] / static_cast<double>(cell.rate_count[e]);
        row.wallclock_s = 0.0;
        table.rows.push_back(row);
      }
    }
  }

  std::sort(table.rows.begin(), table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              if (a.method != b.method) return a.method < b.method;
              if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
              return a.slot < b.slot;
            });
  return table;
}

std::string result_table_csv(const ResultTable& table) {
  std::string out = "method,snr_db,slot,nmse_db,rate_bps_hz,wallclock_s\n";
  char line[256];
  for (const ResultRow& row : table.rows) {
    std::snprintf(line, sizeof(line), "%s,%.10g,%ld,%.10g,%.10g,%.6f\n",
                  row.method.c_str(), row.snr_db, row.slot, row.nmse_db,
                  row.rate_bps_hz, row.wallclock_s);
    out += line;
  }
  return out;
}

}  // namespace mimopred
