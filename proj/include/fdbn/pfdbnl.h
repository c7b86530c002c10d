//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_PFDBNL_H_
#define FDBN_PFDBNL_H_

#include <cstdint>
#include <vector>

#include "fdbn/fdbnl.h"

namespace fdbn {

struct PfdbnlConfig: FdbnlConfig {
  double mu = 0.1;
  int participants = 0;  // clients per round; 0 means all

  PfdbnlConfig() {
    lambda_w = 0.1;
    lambda_a = 0.1;
  }

  void validate(int clients) const;
};

struct PfdbnlState {
  Mat w, a;                        // global model
  std::vector<Mat> wk, ak;         // personal models
  std::vector<Mat> wt, at;         // auxiliaries
  std::vector<Mat> beta, gamma;
  double alpha = 0;
  double rho1 = 1;
  double rho2 = 1;
  int round = 0;

  static PfdbnlState initial(int d, int p, int k, const PfdbnlConfig &cfg);
};

struct PersonalSolution {
  Mat w, a;
  BoundMinimizeResult solver;
};

/// Minimizes l(W, A) + mu ||W - wt||^2 + mu ||A - at||^2 + alpha h(W)
/// + rho1/2 h(W)^2 + lambda_w |W|_1 + lambda_a |A|_1 over W with zero
/// diagonal, warm-started at (w0, a0).
PersonalSolution personal_update(const GramStats &g, const Mat &wt,
                                 const Mat &at, double alpha, double rho1,
                                 double mu, const FdbnlConfig &cfg,
                                 const Mat &w0, const Mat &a0);

struct AuxSolution {
  Mat wt, at;
};

/// Closed-form minimizer of mu ||Wk - Wt||^2 + <beta, Wt - W>
/// + rho2/2 ||Wt - W||^2 (and the A analogue) over (Wt, At).
AuxSolution aux_update(const Mat &wk, const Mat &ak, const Mat &w,
                       const Mat &a, const Mat &beta, const Mat &gamma,
                       double rho2, double mu);

struct GlobalModel {
  Mat w, a;
};

/// W = mean_k(Wt_k + beta_k / rho2), A likewise.
GlobalModel global_aggregate(const std::vector<Mat> &wt,
                             const std::vector<Mat> &at,
                             const std::vector<Mat> &beta,
                             const std::vector<Mat> &gamma, double rho2);

/// Multiplier steps for the listed clients, alpha += rho1 * mean_k h(Wk)
/// over all clients, then penalty growth.
void dual_update_personalized(PfdbnlState &state,
                              const std::vector<int> &participants,
                              const FdbnlConfig &cfg);

/// j distinct client ids drawn uniformly from 0..k-1, ascending. With
/// j == k no random numbers are consumed.
std::vector<int> sample_clients(Rng &rng, int k, int j);

struct PfdbnlTraceRow {
  int round;
  double h;
  double max_primal_w;
  double max_primal_a;
  double objective;
  double rho1;
  double rho2;
  std::vector<int> participants;
  double mean_h_personal;
};

struct PfdbnlResult {
  std::vector<WeightedDbn> personal;
  WeightedDbn global;
  std::vector<PfdbnlTraceRow> trace;
  bool converged = false;
  int rounds = 0;
  double mean_h_personal = 0;
  double max_primal_w = 0;
  double max_primal_a = 0;
  int inner_failures = 0;
};

/// Personalized ADMM. `seed` drives the participant sampler only.
PfdbnlResult run_pfdbnl(const std::vector<ClientDataset> &datasets,
                        const PfdbnlConfig &cfg, std::uint64_t seed,
                        ThreadPool *pool = nullptr);

}  // namespace fdbn

#endif  // FDBN_PFDBNL_H_
