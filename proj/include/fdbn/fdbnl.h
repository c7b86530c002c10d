//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_FDBNL_H_
#define FDBN_FDBNL_H_

#include <vector>

#include "fdbn/datagen.h"
#include "fdbn/objective.h"

namespace fdbn {

class ThreadPool;

struct FdbnlConfig {
  double lambda_w = 0.5;
  double lambda_a = 0.5;
  double rho1_0 = 1.0;
  double rho2_0 = 1.0;
  double phi1 = 1.6;
  double phi2 = 1.1;
  int max_rounds = 200;
  double h_tol = 1e-8;
  double primal_tol = 1e-6;
  double rho_max = 1e16;
  // Solve the A block of the global step by soft-thresholding instead of
  // jointly with W.
  bool closed_form_a = false;
  BoundMinimizeConfig inner { .rel_ftol = 1e-12 };

  void validate() const;
};

struct FdbnlState {
  Mat w, a;
  std::vector<Mat> b, dk;        // local copies
  std::vector<Mat> beta, gamma;  // consensus multipliers
  double alpha = 0;
  double rho1 = 1;
  double rho2 = 1;
  int round = 0;

  static FdbnlState initial(int d, int p, int k, const FdbnlConfig &cfg);
};

struct LocalSolution {
  Mat b;
  Mat dk;
};

/// Exact minimizer over (B, D) of
///   l(B, D) + <beta, B - W> + rho2/2 ||B - W||^2
///           + <gamma, D - A> + rho2/2 ||D - A||^2
/// through two Schur-complement SPD solves.
LocalSolution local_update(const GramStats &g, const Mat &w, const Mat &a,
                           const Mat &beta, const Mat &gamma, double rho2);
LocalSolution local_update(const ClientDataset &data, const Mat &w,
                           const Mat &a, const Mat &beta, const Mat &gamma,
                           double rho2);

struct GlobalSolution {
  Mat w, a;
  BoundMinimizeResult solver;
};

/// Minimizes over (W, A), W with zero diagonal,
///   lambda_w |W|_1 + lambda_a |A|_1 + alpha h(W) + rho1/2 h(W)^2
///   + sum_k <beta_k, B_k - W> + rho2/2 ||B_k - W||^2 (same for A)
/// by bound_minimize on the nonnegative split, warm-started at (w0, a0).
GlobalSolution global_update(const std::vector<Mat> &b,
                             const std::vector<Mat> &dk,
                             const std::vector<Mat> &beta,
                             const std::vector<Mat> &gamma, double alpha,
                             double rho1, double rho2, const FdbnlConfig &cfg,
                             const Mat &w0, const Mat &a0);

/// Soft-thresholding solution of the A block alone.
Mat global_a_closed_form(const std::vector<Mat> &dk,
                         const std::vector<Mat> &gamma, double rho2,
                         double lambda_a);

/// Multiplier ascent and penalty growth; state.w, state.a, state.b and
/// state.dk must come from the current round.
void dual_update(FdbnlState &state, const FdbnlConfig &cfg);

struct FdbnlTraceRow {
  int round;
  double h;
  double max_primal_w;
  double max_primal_a;
  double objective;
  double rho1;
  double rho2;
};

struct FdbnlResult {
  WeightedDbn dbn;
  std::vector<FdbnlTraceRow> trace;
  bool converged = false;
  int rounds = 0;
  double h = 0;
  double max_primal_w = 0;
  double max_primal_a = 0;
  int inner_failures = 0;
};

/// sum_k l_k(W, A) + lambda_w |W|_1 + lambda_a |A|_1.
double fdbnl_objective(const std::vector<GramStats> &stats, const Mat &w,
                       const Mat &a, double lambda_w, double lambda_a);

/// Consensus ADMM over the clients. Local steps run on `pool` when given;
/// every reduction is in client order, so results do not depend on the
/// number of workers. The returned W has a zero diagonal.
FdbnlResult run_fdbnl(const std::vector<ClientDataset> &datasets,
                      const FdbnlConfig &cfg, ThreadPool *pool = nullptr);

}  // namespace fdbn

#endif  // FDBN_FDBNL_H_
