// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimopred/linalg.hpp"
#include "mimopred/mobility.hpp"
#include "mimopred/scm.hpp"

namespace mimopred {

/// Normalized mean square error ‖pred−truth‖²/‖truth‖² (linear).
/// Aggregation must average linear values, then convert to dB.
///
/// \throws ShapeMismatch on length mismatch
/// \throws ZeroTruth if ‖truth‖ = 0
double nmse(const CVector& pred, const CVector& truth);

/// 10·log10(x), floored far below any meaningful error level so table
/// entries stay finite.
double to_db(double linear);

/// Mean of linear values, in dB.
double mean_db(const std::vector<double>& linear_values);

/// No-prediction baseline: the latest least-squares estimate Ψ̄⁺y̲_n
/// reused for slot n+1.
CVector outdated_baseline(const PilotBlock& pilot, const CVector& y);

/// First-order extrapolation through the last two LS estimates:
/// 2·ĥ_n − ĥ_{n−1} (the line through two points evaluated one slot ahead).
CVector extrapolation_baseline(const CVector& y_prev, const CVector& y_curr,
                               const PilotBlock& pilot);

/// Zero-forcing combiner from per-UE predicted channels: rows of
/// (Ĥ̄ᴴĤ̄)⁻¹Ĥ̄ᴴ renormalized to unit norm, returned as the M_r×N_t matrix
/// whose column j is the combiner vector of stream j.
///
/// \throws RankDeficient if the stacked matrix loses column rank (or M_r < N_t)
CMatrix zf_combiner(const std::vector<CMatrix>& predicted_channels);

/// Sum rate Σ_k Σ_m log2(1+SINR_{k,m}) with per-stream signal,
/// inter-UE and inter-stream interference terms; the noise term is the
/// expectation E|fᵀw̲|² = 1 (unit-norm combiner, unit noise covariance)
/// unless an explicit noise realization is supplied.
///
/// \throws ShapeMismatch on inconsistent shapes
double sum_rate(const std::vector<CMatrix>& true_channels, const CMatrix& combiner,
                double rho, const CVector* noise_realization = nullptr);

/// Table-style leading-term operation counts (all constants = 1).
enum class ComplexityFormula {
  kVkfArEstimation,  ///< (p·M_rN)³
  kVkfKalman,        ///< (M_rN)³
  kVkfTotal,         ///< (p³+1)·(M_rN)³
  kMlpLmmse,         ///< (M_rN)³
  kMlpTrain,         ///< N_epoch·N_train·α(I+(L−1)α+1)·(M_rN)²
  kMlpTest,          ///< α(I+(L−1)α+1)·(M_rN)²
  kMlpTotal,         ///< (N_epoch·N_train+1)·α(I+(L−1)α+1)·(M_rN)² + (M_rN)³
};

struct ComplexityDims {
  double mr_n = 1;     ///< M_r·N
  double p = 1;        ///< AR order
  double i = 1;        ///< input order I
  double l = 1;        ///< hidden layers L
  double alpha = 1;    ///< width factor (f_l = α·M_rN)
  double n_epoch = 1;
  double n_train = 1;
};

double complexity_estimate(ComplexityFormula formula, const ComplexityDims& dims);

enum class Method { kOutdated, kExtrapolation, kVkf, kMlp, kMlpRaw };

std::string method_name(Method m);
Method method_from_name(const std::string& name);  // throws InvalidScenario

/// Full experiment description (desk-scale analog of the reference
/// protocol). N_s and N_train are the same quantity here (`n_samples`),
/// matching the evaluation setup they mirror.
struct ExperimentConfig {
  ScenarioPreset preset;  ///< geometry/carrier/slot preset (desk or full scale)
  int tau = 2;
  std::vector<double> snr_grid_db = {20.0};
  int eval_slots = 100;   ///< prediction slots averaged per the protocol
  int n_samples = 512;    ///< N_s = N_train
  int order_p = 3;        ///< AR order when not adaptive
  int input_order = 3;    ///< MLP input order I when not adaptive
  bool adaptive_order = false;  ///< resolve p and I from the SATC estimate
  std::vector<Method> methods = {Method::kOutdated, Method::kVkf, Method::kMlp};
  std::vector<double> ue_speeds_kmh = {3.0};  ///< one entry per UE (K = size)
  std::uint64_t seed = 1;
  int num_seeds = 1;  ///< Monte-Carlo repetitions (independent drops)
  double ar_epsilon = -1.0;  ///< negative = default rule

  int mlp_width = 512;
  int mlp_epochs = 1000;
  double mlp_learning_rate = 0.001;
  int mlp_batch = 128;

  std::vector<double> calib_speeds = {3.0, 10.0, 30.0};
  int calib_trials = 50;
  OrderPolicy order_policy;

  bool timing = false;  ///< record wallclock into rows (off keeps outputs
                        ///< byte-identical across runs)
};

/// One result row; slot = −1 marks the aggregate over all evaluated slots.
struct ResultRow {
  std::string method;
  double snr_db = 0.0;
  long slot = -1;
  double nmse_db = 0.0;
  double rate_bps_hz = 0.0;
  double wallclock_s = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  /// Method-level failures (partial results above are still valid).
  std::vector<std::string> errors;
};

/// Run the Monte-Carlo protocol: per seed and UE, draw a scenario and
/// trace, synthesize measurements per SNR, fit per config, predict the
/// evaluation window one step ahead, and aggregate NMSE (linear mean →
/// dB) and ZF sum rate across seeds/UEs. Rows are sorted
/// (method, snr, slot) and deterministic given the config.
ResultTable run_experiment(const ExperimentConfig& config);

/// Serialize with the fixed header
/// `method,snr_db,slot,nmse_db,rate_bps_hz,wallclock_s`.
std::string result_table_csv(const ResultTable& table);

}  // namespace mimopred
