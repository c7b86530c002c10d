//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_DATAGEN_H_
#define FDBN_DATAGEN_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "fdbn/dbn.h"

namespace fdbn {

using Rng = std::mt19937_64;

/// splitmix64 finalizer applied to (seed, stream); used for every derived
/// sub-seed so that results do not depend on generation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class LagDecay {
  kPerLag,    // lag i scaled by 1 / eta^(i-1)
  kUniform,   // every lag scaled by 1 / eta^(p-1)
};

struct GenConfig {
  int d = 5;
  int p = 1;
  double intra_mean_degree = 4.0;
  double inter_mean_out_degree = 1.0;
  double eta = 1.5;
  double noise_std = 1.0;
  std::uint64_t seed = 0;
  LagDecay decay = LagDecay::kPerLag;
  bool burn_in = false;

  /// Throws ArgumentError unless d >= 2, p >= 1, eta >= 1, noise_std > 0 and
  /// both degrees are nonnegative.
  void validate() const;
};

struct ClientDataset {
  Mat x_t;     // n_k x d
  Mat x_lag;   // n_k x (p*d)

  int n() const { return static_cast<int>(x_t.rows()); }
};

Mat gen_intra_dag(const GenConfig &cfg);
Mat gen_inter_graphs(const GenConfig &cfg);

/// Intra DAG and lag graphs from independent sub-seeds of cfg.seed.
WeightedDbn gen_truth(const GenConfig &cfg);

/// Independent truths for K clients, client k drawn from derive_seed(seed, k).
std::vector<WeightedDbn> gen_hetero_truths(const GenConfig &cfg, int k);

struct SimulatedSeries {
  std::vector<Mat> series;  // one (T+1) x d matrix per realization
  std::vector<Mat> noise;   // injected noise, same shapes
};

/// Simulates M realizations of length T+1. The first p rows of each
/// realization are noise; later rows follow
/// x_t^T = (sum_i x_{t-i}^T A_i + u_t^T) (I - W)^{-1}.
/// With burn_in, 100 extra steps are simulated and dropped first.
SimulatedSeries simulate_svar(const WeightedDbn &truth, int t_len, int m,
                              double noise_std, std::uint64_t seed,
                              bool burn_in = false);

/// Lagged designs of one realization: row r of X_t is x_{p+r}, row r of
/// X_lag is [x_{p+r-1}, ..., x_{r}].
ClientDataset build_designs(const Mat &series, int p);

/// Row-stacked designs of several realizations.
ClientDataset build_designs(const std::vector<Mat> &series, int p);

/// Contiguous row blocks; the first n mod K clients get one extra row.
std::vector<ClientDataset> partition(const Mat &x_t, const Mat &x_lag, int k);

/// Row concatenation of client designs in the given order.
ClientDataset concatenate(const std::vector<ClientDataset> &clients);

/// Dataset of n rows from ceil(n / (L - p)) realizations of L rows each,
/// truncated to n. realization_len <= 0 selects L = p + 1, i.e. one
/// independent realization per row.
ClientDataset gen_dataset(const WeightedDbn &truth, int n, int realization_len,
                          double noise_std, std::uint64_t seed, bool burn_in);

// Series CSV: header `realization,t,v0,...,v{d-1}`, one row per time step.
void write_series_csv(std::ostream &os, const std::vector<Mat> &series);

/// Rows must be grouped by realization with t = 0, 1, ... consecutive.
/// Violations raise IngestError with the offending line.
std::vector<Mat> read_series_csv(std::istream &is);

}  // namespace fdbn

#endif  // FDBN_DATAGEN_H_
