// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace mimopred {

/// Deterministic random stream used everywhere randomness is needed.
///
/// All draws go through an explicit mt19937_64 engine with Box-Muller
/// normals, so a given seed produces the same stream on every platform
/// and standard-library version (std::normal_distribution is not
/// required to be reproducible across implementations; this is).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal N(0, 1) via Box-Muller (one value per call,
  /// second value of each pair is cached).
  double gaussian();

  /// Circularly symmetric complex normal CN(0, 1): real and imaginary
  /// parts are independent N(0, 1/2).
  std::complex<double> complex_normal();

  /// Length-n vector of i.i.d. CN(0, 1) entries.
  Eigen::VectorXcd complex_normal_vector(Eigen::Index n);

  /// Raw 64-bit draw (for shuffling and seed derivation).
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes an arbitrary list of 64-bit values into a single well-spread
/// seed (splitmix64 finalizer over a running hash). Used to derive
/// independent per-UE / per-slot / per-trial streams from one base seed.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace mimopred
