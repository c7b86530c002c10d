//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_NUMKIT_H_
#define FDBN_NUMKIT_H_

#include <functional>

#include <Eigen/Dense>

namespace fdbn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Returns e^M by scaling and squaring around a diagonal Pade approximant
/// (degree 3..13 chosen from the 1-norm of M).
///
/// Throws DimensionError for non-square input and NumericError when M has
/// non-finite entries or the result overflows.
Mat matrix_exponential(const Mat &m);

struct AcyclicityEval {
  double value;   // tr(e^{W o W}) - d
  Mat gradient;   // (e^{W o W})^T o 2W
};

/// Continuous acyclicity measure of a weighted adjacency matrix; zero
/// exactly when W has no directed cycle (self-loops included).
AcyclicityEval acyclicity(const Mat &w);

/// Value-only variant of acyclicity().
double acyclicity_value(const Mat &w);

/// Solves P X = B for symmetric positive definite P with a Cholesky
/// factorization. A non-positive pivot raises NumericError naming the pivot
/// index.
Mat spd_solve(const Mat &p, const Mat &b);

// Objective callback: returns f(x) and writes grad f(x) into the second
// argument (already sized to x.size()).
using ObjectiveFn = std::function<double(const Vec &x, Vec &grad)>;

struct BoundMinimizeConfig {
  int memory = 10;
  int max_iter = 500;
  double grad_tol = 1e-6;
  // Stop once (f_prev - f) <= rel_ftol * max(|f_prev|, |f|, 1). Disabled at
  // 0. Stopping this way does not set `converged`.
  double rel_ftol = 0.0;
};

enum class MinimizeStatus {
  kConverged,
  kMaxIterations,
  kSmallProgress,
  kLineSearchFailed,
  kNonFinite,
};

struct BoundMinimizeResult {
  Vec x;
  double objective = 0;
  double projected_gradient_norm = 0;
  int iterations = 0;
  bool converged = false;
  MinimizeStatus status = MinimizeStatus::kMaxIterations;
};

/// Limited-memory quasi-Newton minimization subject to x >= lower_bounds
/// (entries may be -infinity). Steps are projected onto the feasible set
/// and accepted by an Armijo backtracking search along the projection arc.
/// Once the predicted decrease drops below the rounding error of f, steps
/// are accepted on approximate Wolfe slope conditions and f may rise by at
/// most 1e-14 max(|f|, 1) per step. Trial points whose value is not finite,
/// or whose evaluation throws NumericError, are rejected by the line search;
/// a non-finite value or gradient at an accepted point stops the solve with
/// status kNonFinite and the last good iterate.
///
/// `converged` is set iff the infinity norm of the projected gradient
/// x - max(l, x - g) is at most grad_tol.
BoundMinimizeResult bound_minimize(const ObjectiveFn &objective, Vec x0,
                                   const Vec &lower_bounds,
                                   const BoundMinimizeConfig &config = {});

}  // namespace fdbn

#endif  // FDBN_NUMKIT_H_
