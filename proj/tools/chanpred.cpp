// SPDX-License-Identifier: Apache-2.0
//
// chanpred — batch CLI for channel-trace simulation, mobility estimation,
// model fitting, one-step-ahead prediction, and experiment evaluation.
// All randomness is seeded; identical invocations produce byte-identical
// output files.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mimopred/ar.hpp"
#include "mimopred/errors.hpp"
#include "mimopred/eval.hpp"
#include "mimopred/io.hpp"
#include "mimopred/mlp.hpp"
#include "mimopred/mobility.hpp"
#include "mimopred/rng.hpp"
#include "mimopred/scm.hpp"
#include "mimopred/vkf.hpp"

using namespace mimopred;

namespace {

void add_preset_flags(CLI::App* cmd, ScenarioPreset& preset) {
  cmd->add_option("--bs-rows", preset.bs_rows, "BS array rows");
  cmd->add_option("--bs-cols", preset.bs_cols, "BS array columns");
  cmd->add_option("--ue-antennas", preset.ue_antennas, "UE antennas N");
  cmd->add_option("--paths", preset.path_count, "propagation paths T");
  cmd->add_option("--subpaths", preset.subpaths_per_path, "subpaths per path");
  cmd->add_option("--power-decay", preset.power_decay,
                  "exponential path-power decay rate");
  cmd->add_option("--bs-sector-deg", preset.bs_sector_deg, "AoA sector width");
  cmd->add_option("--ue-sector-deg", preset.ue_sector_deg, "AoD sector width");
  cmd->add_option("--subpath-spread-deg", preset.subpath_spread_deg,
                  "per-path angular spread");
  cmd->add_option("--carrier-hz", preset.carrier_hz, "carrier frequency");
  cmd->add_option("--slot-seconds", preset.slot_seconds, "slot duration");
  cmd->add_flag("--ue-phase-aoa", preset.ue_phase_uses_aoa,
                "use the arrival angle in the UE-side phase");
}

double snr_to_rho(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

/// Measurement trace from an SCMY file plus a pilot rebuilt from its
/// header (τ comes from the payload, ρ from the --snr-db flag).
MeasurementTrace load_measurements(const std::string& path, double rho) {
  const TraceFile file = read_trace_file(path);
  if (!file.is_measurement) {
    throw IoFailure(path + ": expected a measurement (SCMY) file");
  }
  MeasurementTrace trace;
  trace.pilot = dft_pilot(file.tau(), static_cast<int>(file.n), rho,
                          static_cast<int>(file.mr));
  trace.y = file.payload;
  return trace;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
  ScenarioPreset preset;
  std::uint64_t seed = 1;
  double speed_kmh = 3.0;
  int slots = 0;
  std::string out;
  std::string scenario_out;
  std::string measurements_out;
  int tau = 2;
  double snr_db = 20.0;
  std::uint64_t noise_seed = 1;
};

int run_simulate(const SimulateArgs& args) {
  const ScmScenario scenario =
      sample_scenario(args.seed, args.preset, args.speed_kmh);
  const ChannelTrace trace = generate_trace(scenario, args.slots);
  write_channel_trace(args.out, trace);
  if (!args.scenario_out.empty()) {
    write_scenario(args.scenario_out, scenario);
  }
  if (!args.measurements_out.empty()) {
    const PilotBlock pilot = dft_pilot(args.tau, scenario.ue_antennas,
                                       snr_to_rho(args.snr_db), scenario.mr());
    const MeasurementTrace meas = measure(trace, pilot, args.noise_seed);
    write_measurement_trace(args.measurements_out, meas);
  }
  return 0;
}

// ----------------------------------------------------------------- mobility

struct MobilityArgs {
  std::string trace_path;
  std::string measurements_path;
  std::string thresholds_path;
};

int run_mobility(const MobilityArgs& args) {
  if (args.trace_path.empty() && args.measurements_path.empty()) {
    throw InvalidScenario("mobility: provide --trace or --measurements");
  }
  const MobilityThresholds thresholds = read_thresholds(args.thresholds_path);
  double eta = 0.0;
  if (!args.measurements_path.empty()) {
    // η is scale-invariant, so the pilot SNR does not matter here.
    const MeasurementTrace meas = load_measurements(args.measurements_path, 1.0);
    std::vector<CVector> estimates;
    estimates.reserve(meas.y.size());
    for (const CVector& y : meas.y) estimates.push_back(meas.pilot.ls_estimate(y));
    eta = satc_window(estimates);
  } else {
    const TraceFile file = read_trace_file(args.trace_path);
    if (file.is_measurement) {
      throw IoFailure(args.trace_path + ": expected a channel (SCMT) file");
    }
    eta = satc_window(file.payload);
  }
  const double speed_class = classify_eta(thresholds, eta);
  std::printf("eta=%s\n", format_double(eta).c_str());
  std::printf("speed_class_kmh=%s\n", format_double(speed_class).c_str());
  return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  ScenarioPreset preset;
  std::vector<double> speeds = {3.0, 10.0, 30.0};
  int trials = 100;
  CalibrationOptions options;
  std::string out;
};

int run_calibrate(const CalibrateArgs& args) {
  const ScenarioPreset preset = args.preset;
  const ScenarioSampler sampler = [preset](std::uint64_t seed, double speed) {
    return sample_scenario(seed, preset, speed);
  };
  const MobilityThresholds thresholds =
      calibrate_thresholds(args.speeds, sampler, args.trials, args.options);
  write_thresholds(args.out, thresholds);
  return 0;
}

// ------------------------------------------------------------------- fit-ar

struct FitArArgs {
  std::string measurements_path;
  int order = 0;
  double epsilon = -1.0;
  double snr_db = 20.0;
  double noise_variance = 1.0;
  std::string out;
};

int run_fit_ar(const FitArArgs& args) {
  const MeasurementTrace meas =
      load_measurements(args.measurements_path, snr_to_rho(args.snr_db));
  const AutocorrSet acorr =
      sample_autocorr(meas, args.order, args.epsilon, args.noise_variance);
  const ArModel model = yule_walker(acorr);
  write_ar_model(args.out, model);
  return 0;
}

// ------------------------------------------------------------------ predict

struct PredictArgs {
  std::string method;
  std::string model_path;
  std::string measurements_path;
  std::string out;
  double snr_db = 20.0;
  int warmup = -1;
  int lmmse_samples = 0;  ///< 0 = all slots
  bool raw = false;       ///< model was trained on raw observations
};

int run_predict(const PredictArgs& args) {
  const MeasurementTrace meas =
      load_measurements(args.measurements_path, snr_to_rho(args.snr_db));
  const int mr = meas.pilot.mr;
  const int n = meas.pilot.n;
  const int dim = mr * n;
  std::vector<CVector> predictions;

  if (args.method == "vkf") {
    const ArModel model = read_ar_model(args.model_path);
    const VkfRun run = run_vkf(model, meas.pilot, meas, args.warmup);
    predictions = run.predictions;
  } else if (args.method == "mlp") {
    const MlpModel model = read_mlp_model(args.model_path);
    const int input = model.input_order;
    if (meas.slots() <= input) {
      throw TooFewSamples("predict: need more measurement slots than the input order");
    }
    const int lmmse_samples =
        args.lmmse_samples > 0 ? args.lmmse_samples : meas.slots();
    LmmseContext context;
    if (!args.raw) {
      context = build_lmmse(meas.pilot, meas, lmmse_samples);
    }
    predictions.assign(meas.slots(), CVector::Zero(dim));
    for (int s = input; s < meas.slots(); ++s) {
      const std::vector<CVector> window(meas.y.begin() + (s - input),
                                        meas.y.begin() + s);
      if (args.raw) {
        const CVector y_hat = unpack_output(forward(model, pack_input(window)));
        predictions[s] = meas.pilot.ls_estimate(y_hat);
      } else {
        predictions[s] = predict_mlp(model, context, window);
      }
    }
  } else {
    throw InvalidScenario("predict: unknown method '" + args.method +
                          "' (expected vkf|mlp)");
  }
  write_channel_trace(args.out, mr, n, predictions);
  return 0;
}

// ---------------------------------------------------------------- train-mlp

struct TrainMlpArgs {
  std::string measurements_path;
  MlpConfig config;
  double snr_db = 20.0;
  int n_train = 0;        ///< 0 = all available windows
  int lmmse_samples = 0;  ///< 0 = same as n_train
  bool raw = false;
  bool save_optimizer = false;
  std::string out;
};

int run_train_mlp(const TrainMlpArgs& args) {
  const MeasurementTrace meas =
      load_measurements(args.measurements_path, snr_to_rho(args.snr_db));
  const int input = args.config.input_order;
  const int n_train =
      args.n_train > 0 ? args.n_train : meas.slots() - input;
  if (n_train < 1) {
    throw TooFewSamples("train-mlp: no training windows available");
  }

  std::vector<CVector> sequence;
  if (args.raw) {
    sequence = meas.y;
  } else {
    const int lmmse_samples =
        args.lmmse_samples > 0 ? args.lmmse_samples : n_train;
    const LmmseContext context = build_lmmse(meas.pilot, meas, lmmse_samples);
    sequence.reserve(meas.y.size());
    for (const CVector& y : meas.y) sequence.push_back(preprocess(context, y));
  }
  const MlpModel model = train(args.config, sequence, n_train);
  write_mlp_model(args.out, model, args.save_optimizer);
  return 0;
}

// ----------------------------------------------------------------- evaluate

int run_evaluate(ExperimentConfig config, const std::string& orders,
                 const std::string& out_path) {
  if (!orders.empty()) {
    if (orders == "adaptive") {
      config.adaptive_order = true;
    } else {
      config.adaptive_order = false;
      const auto comma = orders.find(',');
      const std::string p_text =
          comma == std::string::npos ? orders : orders.substr(0, comma);
      const std::string i_text =
          comma == std::string::npos ? orders : orders.substr(comma + 1);
      try {
        config.order_p = std::stoi(p_text);
        config.input_order = std::stoi(i_text);
      } catch (const std::exception&) {
        throw InvalidScenario("--orders: expected 'p', 'p,I', or 'adaptive'");
      }
    }
  }
  const ResultTable table = run_experiment(config);
  write_text_file(out_path, result_table_csv(table));
  for (const std::string& err : table.errors) {
    std::fprintf(stderr, "method error: %s\n", err.c_str());
  }
  return table.errors.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"massive-MIMO channel prediction toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "sample a scenario and write a channel trace");
  add_preset_flags(simulate, sim.preset);
  simulate->add_option("--seed", sim.seed, "scenario seed");
  simulate->add_option("--speed-kmh", sim.speed_kmh, "UE speed");
  simulate->add_option("--slots", sim.slots, "number of slots")->required();
  simulate->add_option("--out", sim.out, "output channel trace (SCMT)")->required();
  simulate->add_option("--scenario-out", sim.scenario_out,
                       "also dump the sampled scenario as key=value text");
  simulate->add_option("--measurements-out", sim.measurements_out,
                       "also write noisy pilot measurements (SCMY)");
  simulate->add_option("--tau", sim.tau, "pilot length");
  simulate->add_option("--snr-db", sim.snr_db, "pilot SNR in dB");
  simulate->add_option("--noise-seed", sim.noise_seed, "measurement noise seed");

  MobilityArgs mob;
  CLI::App* mobility = app.add_subcommand(
      "mobility", "classify UE mobility from a trace or measurements");
  mobility->add_option("--trace", mob.trace_path, "channel trace (SCMT)");
  mobility->add_option("--measurements", mob.measurements_path,
                       "pilot measurements (SCMY); preferred when given");
  mobility->add_option("--thresholds", mob.thresholds_path,
                       "calibrated threshold file")->required();

  CalibrateArgs cal;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "calibrate mobility thresholds over random geometries");
  add_preset_flags(calibrate, cal.preset);
  calibrate->add_option("--speeds", cal.speeds, "speed classes in km/h")
      ->delimiter(',');
  calibrate->add_option("--trials", cal.trials, "trials per speed");
  calibrate->add_option("--seed", cal.options.seed, "calibration seed");
  calibrate->add_option("--snapshot-slots", cal.options.snapshot_slots,
                        "snapshots per trial");
  calibrate->add_option("--quantile", cal.options.separation_quantile,
                        "required separation quantile");
  calibrate->add_option("--out", cal.out, "threshold file")->required();

  FitArArgs fit;
  CLI::App* fit_ar = app.add_subcommand(
      "fit-ar", "fit a vector AR model from pilot measurements");
  fit_ar->add_option("--measurements", fit.measurements_path, "SCMY file")
      ->required();
  fit_ar->add_option("--order", fit.order, "AR order p")->required();
  fit_ar->add_option("--eps", fit.epsilon,
                     "diagonal regularizer (negative = default rule)");
  fit_ar->add_option("--snr-db", fit.snr_db, "pilot SNR the file was made with");
  fit_ar->add_option("--noise-var", fit.noise_variance,
                     "measurement noise variance");
  fit_ar->add_option("--out", fit.out, "output model (ARMX)")->required();

  PredictArgs pred;
  CLI::App* predict = app.add_subcommand(
      "predict", "one-step-ahead channel prediction over a measurement file");
  predict->add_option("--method", pred.method, "vkf|mlp")->required();
  predict->add_option("--model", pred.model_path, "ARMX or MLPX model")
      ->required();
  predict->add_option("--measurements", pred.measurements_path, "SCMY file")
      ->required();
  predict->add_option("--out", pred.out, "predictions (SCMT)")->required();
  predict->add_option("--snr-db", pred.snr_db, "pilot SNR the file was made with");
  predict->add_option("--warmup", pred.warmup,
                      "VKF slots without emitted predictions (-1 = order)");
  predict->add_option("--lmmse-samples", pred.lmmse_samples,
                      "slots used for the LMMSE covariance (0 = all)");
  predict->add_flag("--raw", pred.raw, "model was trained on raw observations");

  TrainMlpArgs tr;
  CLI::App* train_mlp = app.add_subcommand(
      "train-mlp", "train the LMMSE-preprocessed MLP predictor");
  train_mlp->add_option("--measurements", tr.measurements_path, "SCMY file")
      ->required();
  train_mlp->add_option("--order", tr.config.input_order, "input order I");
  train_mlp->add_option("--epochs", tr.config.epochs, "training epochs");
  train_mlp->add_option("--width", tr.config.nodes_per_layer, "hidden width");
  train_mlp->add_option("--layers", tr.config.hidden_layers, "hidden layers");
  train_mlp->add_option("--lr", tr.config.learning_rate, "learning rate");
  train_mlp->add_option("--batch", tr.config.batch_size, "mini-batch size");
  train_mlp->add_option("--seed", tr.config.seed, "shuffle/init seed");
  train_mlp->add_flag("--relu", tr.config.relu_hidden,
                      "apply ReLU between hidden layers (ablation)");
  train_mlp->add_option("--snr-db", tr.snr_db, "pilot SNR the file was made with");
  train_mlp->add_option("--n-train", tr.n_train, "training windows (0 = all)");
  train_mlp->add_option("--lmmse-samples", tr.lmmse_samples,
                        "slots for the LMMSE covariance (0 = n-train)");
  train_mlp->add_flag("--raw", tr.raw, "train on raw observations (ablation)");
  train_mlp->add_flag("--save-optimizer", tr.save_optimizer,
                      "persist optimizer state in the model file");
  train_mlp->add_option("--out", tr.out, "output model (MLPX)")->required();

  std::string ev_config_path;
  std::string ev_out;
  std::string ev_orders;
  std::uint64_t ev_seed = 0;
  std::vector<double> ev_snrs;
  int ev_slots = 0;
  std::vector<std::string> ev_methods;
  bool ev_timing = false;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "run the experiment protocol and write a result CSV");
  evaluate->add_option("--config", ev_config_path, "key=value experiment config")
      ->required();
  evaluate->add_option("--out", ev_out, "result CSV path")->required();
  CLI::Option* seed_opt =
      evaluate->add_option("--seed", ev_seed, "override: experiment seed");
  CLI::Option* snr_opt =
      evaluate->add_option("--snr-db", ev_snrs, "override: SNR grid")
          ->delimiter(',');
  CLI::Option* slots_opt =
      evaluate->add_option("--slots", ev_slots, "override: evaluated slots");
  evaluate->add_option("--orders", ev_orders,
                       "override: 'p', 'p,I', or 'adaptive'");
  CLI::Option* methods_opt =
      evaluate->add_option("--methods", ev_methods, "override: method list")
          ->delimiter(',');
  evaluate->add_flag("--timing", ev_timing, "record wallclock in the CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (mobility->parsed()) return run_mobility(mob);
    if (calibrate->parsed()) return run_calibrate(cal);
    if (fit_ar->parsed()) return run_fit_ar(fit);
    if (predict->parsed()) return run_predict(pred);
    if (train_mlp->parsed()) return run_train_mlp(tr);
    if (evaluate->parsed()) {
      ExperimentConfig config = read_experiment_config(ev_config_path);
      if (seed_opt->count() > 0) config.seed = ev_seed;
      if (snr_opt->count() > 0) config.snr_grid_db = ev_snrs;
      if (slots_opt->count() > 0) config.eval_slots = ev_slots;
      if (methods_opt->count() > 0) {
        config.methods.clear();
        for (const std::string& name : ev_methods) {
          config.methods.push_back(method_from_name(name));
        }
      }
      config.timing = config.timing || ev_timing;
      return run_evaluate(config, ev_orders, ev_out);
    }
  } catch (const Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
