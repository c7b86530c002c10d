//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_BASELINES_H_
#define FDBN_BASELINES_H_

#include <vector>

#include "fdbn/datagen.h"
#include "fdbn/objective.h"

namespace fdbn {

class ThreadPool;

struct DynotearsConfig {
  double lambda_w = 0.05;
  double lambda_a = 0.05;
  double h_tol = 1e-8;
  double rho_init = 1.0;
  double rho_mult = 10.0;
  int max_outer = 100;
  double progress_ratio = 0.25;
  double rho_max = 1e16;
  BoundMinimizeConfig inner { .rel_ftol = 1e-12 };

  void validate() const;
};

struct DynotearsResult {
  WeightedDbn dbn;
  double h = 0;
  int outer_iterations = 0;
  bool converged = false;
  int inner_failures = 0;
};

/// Centralized fit of l(W, A) + lambda_w |W|_1 + lambda_a |A|_1 subject to
/// h(W) = 0 by the augmented Lagrangian method on the nonnegative split.
DynotearsResult dynotears_fit(const GramStats &g, const DynotearsConfig &cfg);
DynotearsResult dynotears_fit(const ClientDataset &data,
                              const DynotearsConfig &cfg);

struct AveResult {
  WeightedDbn averaged;
  BinaryDbn graph;
};

/// Entry-wise mean of the client fits, then thresholding. The averaged W
/// may contain cycles.
AveResult ave_baseline(const std::vector<WeightedDbn> &fits, double tau_w,
                       double tau_a);

struct BestResult {
  int client = 0;
  BinaryDbn graph;
};

/// Thresholded client fit with the lowest SHD(W) + SHD(A) against `truth`;
/// ties go to the lowest client index.
BestResult best_baseline(const std::vector<WeightedDbn> &fits,
                         const BinaryDbn &truth, double tau_w, double tau_a);

/// dynotears_fit on the row concatenation of every client.
DynotearsResult alldata_baseline(const std::vector<ClientDataset> &datasets,
                                 const DynotearsConfig &cfg);

/// One dynotears_fit per client, run on `pool` when given.
std::vector<WeightedDbn> fit_clients(const std::vector<ClientDataset> &datasets,
                                     const DynotearsConfig &cfg,
                                     ThreadPool *pool = nullptr);

}  // namespace fdbn

#endif  // FDBN_BASELINES_H_
